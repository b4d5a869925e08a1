#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "phi4/bddv.hpp"
#include "phi4/model.hpp"

namespace phi4 {

struct StressTensor {
    Row t00, t01, t10, t11;
};

// A residual field together with the largest |summand| of its defining sum.
struct ResidualField {
    Row eps0, eps1;
    Row scale0, scale1;
};

struct ResidualValue {
    double value = 0.0;
    double scale = 0.0;
};

struct DeltaMetric {
    double raw_residual = 0.0;
    double scale = 0.0;
    double value = 0.0;
};

DeltaMetric delta_normalize(const Row& residual, const Row& summand_scale);

struct Charges {
    double q0 = 0.0;
    double q1 = 0.0;
};

// Left-to-right sums, spacing times the T^{00} and T^{01} fields.
Charges charges(const StressTensor& t, double spacing);

// ---- aligned lattice ----
// Evaluated on row curr; plus uses (curr, next), minus uses (prev, curr).
StressTensor newton_stress_tensor(const Row& prev, const Row& curr, const Row& next, double delta,
                                  const PotentialParams& p, Branch branch);
// Plus-branch residuals at row curr.
ResidualField newton_residuals(const Row& prev, const Row& curr, const Row& next, double delta,
                               const PotentialParams& p);

// ---- light-cone lattice, scalar field ----
// Cells of row curr (sides on curr); sigma is the parity of curr.
StressTensor bddv_stress_tensor(const Row& prev, const Row& curr, const Row& next, int sigma,
                                double delta, const PotentialParams& p, Branch branch);
// Plus-branch residuals at the vertices of row curr.
ResidualField bddv_residuals(const Row& prev, const Row& curr, const Row& next, int sigma,
                             double delta, const PotentialParams& p);

// ---- light-cone lattice, four fields ----
struct CellVertices {
    Vec4 bottom{}, left{}, right{}, top{};
};
// cell j of row curr
CellVertices cell_vertices(const ZetaRow& prev, const ZetaRow& curr, const ZetaRow& next,
                           std::size_t j);

// Cell quantities the discrete tensor depends on.
struct CellJet {
    Vec4 mean{};
    Vec4 d0{}, d1{};  // light-cone differences
};
CellJet cell_jet(const CellVertices& v, double delta);
// Means of the two vertex pairs a difference D_mu compares: (forward, backward).
std::pair<Vec4, Vec4> lc_pair_means(const CellVertices& v, int mu);
CellJet pair_mean(const CellJet& a, const CellJet& b);

using Tensor2 = std::array<std::array<double, 2>, 2>;
// Light-cone components of the discrete tensor.
Tensor2 lightcone_tensor(const CellJet& z, const PotentialParams& p);
// Cartesian components from light-cone ones.
Tensor2 to_cartesian(const Tensor2& tc);

StressTensor msilcc_stress_tensor(const ZetaRow& prev, const ZetaRow& curr, const ZetaRow& next,
                                  double delta, const PotentialParams& p);

// Rows n-2 .. n+2 around the vertex row n.
using ZetaWindow = std::array<const ZetaRow*, 5>;

// Closed form of the discrete conservation defect; plus selects mu = 0.
ResidualValue msilcc_residual_exact(const ZetaWindow& w, std::size_t j, Branch branch,
                                    double delta, const PotentialParams& p);
// Single-cell estimator on cell j of the middle row of (prev, curr, next).
ResidualValue msilcc_residual_estimator(const ZetaRow& prev, const ZetaRow& curr,
                                        const ZetaRow& next, std::size_t j, Branch branch,
                                        double delta, const PotentialParams& p);
// Divergence of the discrete tensor evaluated term by term from its definition.
ResidualValue msilcc_tensor_divergence(const ZetaWindow& w, std::size_t j, Branch branch,
                                       double delta, const PotentialParams& p);

// Light-cone divergence of the symplectic forms for two tangent fields on one cell.
double msilcc_symplectic_defect(const CellVertices& u, const CellVertices& v, double delta);

// ---- generic light-cone difference operators ----
// Vertex rows (n-1, n, n+1) -> value of D_mu on cell j of row n.
double lc_cell_derivative(const Row& prev, const Row& curr, const Row& next, int sigma,
                          std::size_t j, int mu, double delta);
// Cell fields on rows (n-1, n) -> D_mu at vertex (n, j), using the four cells around it.
// cells_below: cells of row n-1, cells_curr: cells of row n, cells_above: cells of row n+1.
double lc_vertex_derivative(const Row& cells_below, const Row& cells_curr, const Row& cells_above,
                            int sigma, std::size_t j, int mu, double delta);

// ---- per-row records ----
struct DiagnosticsRecord {
    long row = 0;
    double time = 0.0;
    double energy = 0.0;
    double energy_plus = 0.0;
    double energy_minus = 0.0;
    double q0 = 0.0;
    double q1 = 0.0;
    double eps0_max = 0.0;
    double eps1_max = 0.0;
    double eps0_peak = 0.0;
    double eps1_peak = 0.0;
    int parity = 0;
    bool diverged = false;
};

// Running maxima of the normalised residuals.
class PeakTracker {
public:
    void update(DiagnosticsRecord& rec);

private:
    double peak0_ = 0.0;
    double peak1_ = 0.0;
};

DiagnosticsRecord newton_record(const Row& prev, const Row& curr, const Row& next, long row,
                                const GridSpec& grid, const PotentialParams& p);
DiagnosticsRecord bddv_record(const Row& prev, const Row& curr, const Row& next, long row,
                              const GridSpec& grid, const PotentialParams& p);
// w[2] is the recorded row; the exact defect is used when all five rows exist,
// otherwise the estimator.
DiagnosticsRecord msilcc_record(const ZetaWindow& w, const GridSpec& grid,
                                const PotentialParams& p);

}  // namespace phi4
