#pragma once

#include <cstdint>

#include "phi4/model.hpp"
#include "phi4/nlsolve.hpp"

namespace phi4 {

using CellUnknowns = Vec4;  // (phi, psi0, psi1, gamma) at (n+1, j)

// Known values of the cell whose top is the unknown: bottom (n-1, j),
// side (n, j) and shifted side (n, j + sigma_n).
struct CellNeighborhood {
    Vec4 below{};
    Vec4 side{};
    Vec4 side_shifted{};
    int parity = 1;
};

struct SolverStats {
    std::uint64_t total_iterations = 0;
    int max_cell_iterations = 0;
    std::uint64_t cells_solved = 0;
};

struct MsilccState {
    ZetaRow prev;
    ZetaRow curr;
    GridSpec grid;
    PotentialParams p;
    SolverSettings solver;
    SolverStats stats;
};

Vec4 msilcc_cell_residual(const CellUnknowns& u, const CellNeighborhood& nb, double delta,
                          const PotentialParams& p);
Mat4 msilcc_cell_jacobian(const CellUnknowns& u, const CellNeighborhood& nb, double delta,
                          const PotentialParams& p);

// Partial derivatives of the cell residual with respect to every vertex of the cell.
struct CellLinearization {
    Mat4 top, below, left, right;
};
CellLinearization msilcc_cell_linearization(const CellUnknowns& u, const CellNeighborhood& nb,
                                            double delta, const PotentialParams& p);

CellNeighborhood neighborhood(const ZetaRow& prev, const ZetaRow& curr, std::size_t j);

// Solves one cell; throws SolverError on failure.
LmResult<4> msilcc_solve_cell(const CellNeighborhood& nb, double delta, const PotentialParams& p,
                              const SolverSettings& s, long row, std::size_t j);

MsilccState msilcc_init(double amplitude, const GridSpec& grid, const PotentialParams& p,
                        const SolverSettings& solver);
MsilccState msilcc_init(const InitialData& data, const GridSpec& grid, const PotentialParams& p,
                        const SolverSettings& solver);

MsilccState msilcc_step(const MsilccState& state);

// Row -1 implied by the initial closure: bottom = left + right - top.
ZetaRow msilcc_virtual_row(const ZetaRow& row0, const ZetaRow& row1);

// Propagates a tangent perturbation through the linearised scheme: given the
// tangent on rows n-1 and n and the solved row n+1, returns the tangent on row n+1.
ZetaRow msilcc_tangent_step(const MsilccState& state, const ZetaRow& next, const ZetaRow& dprev,
                            const ZetaRow& dcurr);

struct MechState {
    double q = 0.0;
    double p = 0.0;
};

// Implicit midpoint step of q'' = -V'(q).
MechState midpoint_step_mech(const MechState& s, double delta, const PotentialParams& pot,
                             const SolverSettings& solver = {1e-13, 50, 1e-3});

}  // namespace phi4
