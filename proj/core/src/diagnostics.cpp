#include "phi4/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "phi4/newton.hpp"

namespace phi4 {

namespace {
constexpr double sqrt2 = std::numbers::sqrt2;

double dot(const Vec4& a, const Vec4& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}

// omega(X, Y) = -X^T M Y
double omega(const Mat4& m, const Vec4& x, const Vec4& y) {
    double s = 0.0;
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k) s += x[i] * m[i][k] * y[k];
    return -s;
}

Vec4 mean2(const Vec4& a, const Vec4& b) {
    return {0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2]), 0.5 * (a[3] + b[3])};
}

Vec4 diff(const Vec4& a, const Vec4& b) {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]};
}

const std::pair<Mat4, Mat4>& lc_matrices() {
    static const auto m = dwh_matrices_lightcone();
    return m;
}

double max_abs(const Row& r) {
    double m = 0.0;
    for (double v : r) m = std::max(m, std::abs(v));
    return m;
}

int mu_of(Branch b) { return b == Branch::plus ? 0 : 1; }

// The four cells around vertex (n, j) of w[2], as jets.
struct Dual {
    CellJet up, left, right, down;
};

Dual dual_cells(const ZetaWindow& w, std::size_t j, double delta) {
    const ZetaRow& c = *w[2];
    const std::size_t n = c.size();
    const long lj = static_cast<long>(j);
    const int sigma = c.parity();
    const std::size_t jr = sigma > 0 ? j : wrap(lj + 1, n);
    const std::size_t jl = sigma > 0 ? wrap(lj - 1, n) : j;
    return {cell_jet(cell_vertices(*w[2], *w[3], *w[4], j), delta),
            cell_jet(cell_vertices(*w[1], *w[2], *w[3], jl), delta),
            cell_jet(cell_vertices(*w[1], *w[2], *w[3], jr), delta),
            cell_jet(cell_vertices(*w[0], *w[1], *w[2], j), delta)};
}

// Forward/backward pairs of cells for D_nu on the dual lattice.
std::pair<CellJet, CellJet> dual_pairs(const Dual& d, int nu) {
    if (nu == 0) return {pair_mean(d.up, d.left), pair_mean(d.down, d.right)};
    return {pair_mean(d.up, d.right), pair_mean(d.down, d.left)};
}

// D^mu H_I - dH_I(mean)[D^mu], with D^0 = D_1 and D^1 = D_0
double chain_rule_defect(const Vec4& fwd, const Vec4& bwd, double delta, const PotentialParams& p) {
    Vec4 mid = mean2(fwd, bwd);
    const Vec4 g = hamiltonian_interaction_gradient(mid, p);
    return (hamiltonian_interaction(fwd, p) - hamiltonian_interaction(bwd, p) -
            dot(g, diff(fwd, bwd))) /
           delta;
}
}  // namespace

DeltaMetric delta_normalize(const Row& residual, const Row& summand_scale) {
    DeltaMetric m;
    m.raw_residual = max_abs(residual);
    m.scale = max_abs(summand_scale);
    m.value = m.scale > 0.0 ? m.raw_residual / m.scale : 0.0;
    return m;
}

Charges charges(const StressTensor& t, double spacing) {
    Charges c;
    for (double v : t.t00) c.q0 += v;
    for (double v : t.t01) c.q1 += v;
    c.q0 *= spacing;
    c.q1 *= spacing;
    return c;
}

StressTensor newton_stress_tensor(const Row& prev, const Row& curr, const Row& next, double delta,
                                  const PotentialParams& p, Branch branch) {
    const std::size_t n = curr.size();
    StressTensor t{Row(n), Row(n), Row(n), Row(n)};
    for (std::size_t j = 0; j < n; ++j) {
        const double d0 = branch == Branch::plus ? time_d_plus(curr, next, j, delta)
                                                 : time_d_minus(prev, curr, j, delta);
        const double d1 =
            branch == Branch::plus ? d_plus(curr, j, delta) : d_minus(curr, j, delta);
        const double v = potential_value(curr[j], p);
        const double kin = 0.5 * d0 * d0 + 0.5 * d1 * d1;
        t.t00[j] = kin + v;
        t.t01[j] = t.t10[j] = -d0 * d1;
        t.t11[j] = kin - v;
    }
    return t;
}

ResidualField newton_residuals(const Row& prev, const Row& curr, const Row& next, double delta,
                               const PotentialParams& p) {
    const std::size_t n = curr.size();
    const StressTensor below = newton_stress_tensor(prev, prev, curr, delta, p, Branch::plus);
    const StressTensor here = newton_stress_tensor(prev, curr, next, delta, p, Branch::plus);
    ResidualField f{Row(n), Row(n), Row(n), Row(n)};
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t jm = wrap(static_cast<long>(j) - 1, n);
        f.eps0[j] = (here.t00[j] - below.t00[j]) / delta + (here.t10[j] - here.t10[jm]) / delta;
        f.eps1[j] = (here.t01[j] - below.t01[j]) / delta + (here.t11[j] - here.t11[jm]) / delta;
        f.scale0[j] = std::max({std::abs(here.t00[j]), std::abs(below.t00[j]), std::abs(here.t10[j]),
                                std::abs(here.t10[jm])}) /
                      delta;
        f.scale1[j] = std::max({std::abs(here.t01[j]), std::abs(below.t01[j]), std::abs(here.t11[j]),
                                std::abs(here.t11[jm])}) /
                      delta;
    }
    return f;
}

StressTensor bddv_stress_tensor(const Row& prev, const Row& curr, const Row& next, int sigma,
                                double delta, const PotentialParams& p, Branch branch) {
    const std::size_t n = curr.size();
    StressTensor t{Row(n), Row(n), Row(n), Row(n)};
    for (std::size_t j = 0; j < n; ++j) {
        const auto [d0, d1] = bddv_lightcone_derivs(prev, curr, next, j, sigma, delta, branch);
        const double a = curr[j];
        const double b = curr[wrap(static_cast<long>(j) + sigma, n)];
        const double u = branch == Branch::plus ? next[j] : prev[j];
        const double w = p.r * (a * a + b * b + 2.0 * u * u) / 8.0 +
                         p.lambda * u * u * (a * a + b * b) / 8.0;
        const double kin = 0.5 * d0 * d0 + 0.5 * d1 * d1;
        t.t00[j] = kin + w;
        t.t01[j] = t.t10[j] = 0.5 * d0 * d0 - 0.5 * d1 * d1;
        t.t11[j] = kin - w;
    }
    return t;
}

ResidualField bddv_residuals(const Row& prev, const Row& curr, const Row& next, int sigma,
                             double delta, const PotentialParams& p) {
    const std::size_t n = curr.size();
    // cells of row n-1 (tops on row n) and of row n
    const StressTensor below = bddv_stress_tensor(prev, prev, curr, -sigma, delta, p, Branch::plus);
    const StressTensor here = bddv_stress_tensor(prev, curr, next, sigma, delta, p, Branch::plus);
    ResidualField f{Row(n), Row(n), Row(n), Row(n)};
    const double h = sqrt2 * delta;
    for (std::size_t j = 0; j < n; ++j) {
        const long lj = static_cast<long>(j);
        const std::size_t jr = sigma > 0 ? j : wrap(lj + 1, n);
        const std::size_t jl = sigma > 0 ? wrap(lj - 1, n) : j;
        const double a_l = here.t00[jl] - here.t10[jl], a_d = below.t00[j] - below.t10[j];
        const double b_r = here.t00[jr] + here.t10[jr], b_d = below.t00[j] + below.t10[j];
        const double c_l = here.t01[jl] - here.t11[jl], c_d = below.t01[j] - below.t11[j];
        const double e_r = here.t01[jr] + here.t11[jr], e_d = below.t01[j] + below.t11[j];
        f.eps0[j] = ((a_l - a_d) + (b_r - b_d)) / h;
        f.eps1[j] = ((c_l - c_d) + (e_r - e_d)) / h;
        // summands of the expanded differences are single tensor components
        f.scale0[j] = std::max({std::abs(here.t00[jl]), std::abs(here.t10[jl]), std::abs(here.t00[jr]),
                                std::abs(here.t10[jr]), std::abs(below.t00[j]), std::abs(below.t10[j])}) / h;
        f.scale1[j] = std::max({std::abs(here.t01[jl]), std::abs(here.t11[jl]), std::abs(here.t01[jr]),
                                std::abs(here.t11[jr]), std::abs(below.t01[j]), std::abs(below.t11[j])}) / h;
    }
    return f;
}

CellVertices cell_vertices(const ZetaRow& prev, const ZetaRow& curr, const ZetaRow& next,
                           std::size_t j) {
    const int sigma = curr.parity();
    const Vec4 s = curr.at(j);
    const Vec4 t = curr.at(wrap(static_cast<long>(j) + sigma, curr.size()));
    if (sigma > 0) return {prev.at(j), s, t, next.at(j)};
    return {prev.at(j), t, s, next.at(j)};
}

CellJet cell_jet(const CellVertices& v, double delta) {
    CellJet z;
    for (int i = 0; i < 4; ++i) {
        z.mean[i] = 0.25 * (v.bottom[i] + v.left[i] + v.right[i] + v.top[i]);
        z.d0[i] = ((v.top[i] + v.left[i]) - (v.bottom[i] + v.right[i])) / (2.0 * delta);
        z.d1[i] = ((v.top[i] + v.right[i]) - (v.bottom[i] + v.left[i])) / (2.0 * delta);
    }
    return z;
}

std::pair<Vec4, Vec4> lc_pair_means(const CellVertices& v, int mu) {
    if (mu == 0) return {mean2(v.top, v.left), mean2(v.bottom, v.right)};
    return {mean2(v.top, v.right), mean2(v.bottom, v.left)};
}

CellJet pair_mean(const CellJet& a, const CellJet& b) {
    return {mean2(a.mean, b.mean), mean2(a.d0, b.d0), mean2(a.d1, b.d1)};
}

Tensor2 lightcone_tensor(const CellJet& z, const PotentialParams& p) {
    const auto& [m0, m1] = lc_matrices();
    const double h = hamiltonian_density(z.mean, p);
    Tensor2 t{};
    t[0][0] = 0.5 * omega(m0, z.d1, z.mean);
    t[0][1] = -0.5 * omega(m0, z.d0, z.mean) + h;
    t[1][0] = -0.5 * omega(m1, z.d1, z.mean) + h;
    t[1][1] = 0.5 * omega(m1, z.d0, z.mean);
    return t;
}

Tensor2 to_cartesian(const Tensor2& c) {
    // T = L^T Tc L with L = [[1, -1], [1, 1]] / sqrt2
    Tensor2 t{};
    t[0][0] = 0.5 * (c[0][0] + c[0][1] + c[1][0] + c[1][1]);
    t[0][1] = 0.5 * (-c[0][0] + c[0][1] - c[1][0] + c[1][1]);
    t[1][0] = 0.5 * (-c[0][0] - c[0][1] + c[1][0] + c[1][1]);
    t[1][1] = 0.5 * (c[0][0] - c[0][1] - c[1][0] + c[1][1]);
    return t;
}

StressTensor msilcc_stress_tensor(const ZetaRow& prev, const ZetaRow& curr, const ZetaRow& next,
                                  double delta, const PotentialParams& p) {
    const std::size_t n = curr.size();
    StressTensor t{Row(n), Row(n), Row(n), Row(n)};
    for (std::size_t j = 0; j < n; ++j) {
        const Tensor2 c = to_cartesian(
            lightcone_tensor(cell_jet(cell_vertices(prev, curr, next, j), delta), p));
        t.t00[j] = c[0][0];
        t.t01[j] = c[0][1];
        t.t10[j] = c[1][0];
        t.t11[j] = c[1][1];
    }
    return t;
}

ResidualValue msilcc_tensor_divergence(const ZetaWindow& w, std::size_t j, Branch branch,
                                       double delta, const PotentialParams& p) {
    const int mu = mu_of(branch);
    const Dual d = dual_cells(w, j, delta);
    ResidualValue out;
    for (int nu = 0; nu < 2; ++nu) {
        const auto [fwd, bwd] = dual_pairs(d, nu);
        const double tf = lightcone_tensor(fwd, p)[mu][nu];
        const double tb = lightcone_tensor(bwd, p)[mu][nu];
        out.value += (tf - tb) / delta;
        out.scale = std::max({out.scale, std::abs(tf) / delta, std::abs(tb) / delta});
    }
    return out;
}

ResidualValue msilcc_residual_exact(const ZetaWindow& w, std::size_t j, Branch branch,
                                    double delta, const PotentialParams& p) {
    const int mu = mu_of(branch);
    const Dual d = dual_cells(w, j, delta);
    // D^0 = D_1 pairs (up, right | down, left); D^1 = D_0 pairs (up, left | down, right)
    const auto [fwd, bwd] = dual_pairs(d, mu == 0 ? 1 : 0);
    ResidualValue out;
    out.value = chain_rule_defect(fwd.mean, bwd.mean, delta, p);
    for (int nu = 0; nu < 2; ++nu) {
        const auto [f, b] = dual_pairs(d, nu);
        out.scale = std::max({out.scale, std::abs(lightcone_tensor(f, p)[mu][nu]) / delta,
                              std::abs(lightcone_tensor(b, p)[mu][nu]) / delta});
    }
    return out;
}

ResidualValue msilcc_residual_estimator(const ZetaRow& prev, const ZetaRow& curr,
                                        const ZetaRow& next, std::size_t j, Branch branch,
                                        double delta, const PotentialParams& p) {
    const int mu = mu_of(branch);
    const CellVertices v = cell_vertices(prev, curr, next, j);
    const auto [fwd, bwd] = lc_pair_means(v, mu == 0 ? 1 : 0);
    const CellJet z = cell_jet(v, delta);
    // mean of the cell, not of the pair means
    const Vec4 g = hamiltonian_interaction_gradient(z.mean, p);
    ResidualValue out;
    out.value =
        (hamiltonian_interaction(fwd, p) - hamiltonian_interaction(bwd, p) - dot(g, diff(fwd, bwd))) /
        delta;
    const Tensor2 t = lightcone_tensor(z, p);
    out.scale = std::max(std::abs(t[mu][0]), std::abs(t[mu][1])) / delta;
    return out;
}

double msilcc_symplectic_defect(const CellVertices& u, const CellVertices& v, double delta) {
    const auto& [m0, m1] = lc_matrices();
    double s = 0.0;
    for (int mu = 0; mu < 2; ++mu) {
        const Mat4& m = mu == 0 ? m0 : m1;
        const auto [uf, ub] = lc_pair_means(u, mu);
        const auto [vf, vb] = lc_pair_means(v, mu);
        s += (omega(m, uf, vf) - omega(m, ub, vb)) / delta;
    }
    return s;
}

double lc_cell_derivative(const Row& prev, const Row& curr, const Row& next, int sigma,
                          std::size_t j, int mu, double delta) {
    const double s = curr[j];
    const double t = curr[wrap(static_cast<long>(j) + sigma, curr.size())];
    const double left = sigma > 0 ? s : t;
    const double right = sigma > 0 ? t : s;
    if (mu == 0) return ((next[j] + left) - (prev[j] + right)) / (2.0 * delta);
    return ((next[j] + right) - (prev[j] + left)) / (2.0 * delta);
}

double lc_vertex_derivative(const Row& cells_below, const Row& cells_curr, const Row& cells_above,
                            int sigma, std::size_t j, int mu, double delta) {
    const std::size_t n = cells_curr.size();
    const long lj = static_cast<long>(j);
    const double right = cells_curr[sigma > 0 ? j : wrap(lj + 1, n)];
    const double left = cells_curr[sigma > 0 ? wrap(lj - 1, n) : j];
    if (mu == 0) return ((cells_above[j] + left) - (cells_below[j] + right)) / (2.0 * delta);
    return ((cells_above[j] + right) - (cells_below[j] + left)) / (2.0 * delta);
}

void PeakTracker::update(DiagnosticsRecord& rec) {
    if (std::isfinite(rec.eps0_max)) peak0_ = std::max(peak0_, rec.eps0_max);
    if (std::isfinite(rec.eps1_max)) peak1_ = std::max(peak1_, rec.eps1_max);
    rec.eps0_peak = peak0_;
    rec.eps1_peak = peak1_;
}

DiagnosticsRecord newton_record(const Row& prev, const Row& curr, const Row& next, long row,
                                const GridSpec& grid, const PotentialParams& p) {
    const double d = grid.delta;
    const StressTensor tp = newton_stress_tensor(prev, curr, next, d, p, Branch::plus);
    const StressTensor tm = newton_stress_tensor(prev, curr, next, d, p, Branch::minus);
    const Charges cp = charges(tp, d), cm = charges(tm, d);
    const ResidualField f = newton_residuals(prev, curr, next, d, p);
    DiagnosticsRecord r;
    r.row = row;
    r.time = grid.row_time(row);
    r.energy_plus = cp.q0;
    r.energy_minus = cm.q0;
    r.energy = 0.5 * (cp.q0 + cm.q0);
    r.q0 = r.energy;
    r.q1 = 0.5 * (cp.q1 + cm.q1);
    r.eps0_max = delta_normalize(f.eps0, f.scale0).value;
    r.eps1_max = delta_normalize(f.eps1, f.scale1).value;
    r.parity = row_parity(row);
    return r;
}

DiagnosticsRecord bddv_record(const Row& prev, const Row& curr, const Row& next, long row,
                              const GridSpec& grid, const PotentialParams& p) {
    const double d = grid.delta;
    const int sigma = row_parity(row);
    const StressTensor tp = bddv_stress_tensor(prev, curr, next, sigma, d, p, Branch::plus);
    const StressTensor tm = bddv_stress_tensor(prev, curr, next, sigma, d, p, Branch::minus);
    const Charges cp = charges(tp, sqrt2 * d), cm = charges(tm, sqrt2 * d);
    const ResidualField f = bddv_residuals(prev, curr, next, sigma, d, p);
    DiagnosticsRecord r;
    r.row = row;
    r.time = grid.row_time(row);
    r.energy_plus = cp.q0;
    r.energy_minus = cm.q0;
    r.energy = cp.q0;
    r.q0 = cp.q0;
    r.q1 = cp.q1;
    r.eps0_max = delta_normalize(f.eps0, f.scale0).value;
    r.eps1_max = delta_normalize(f.eps1, f.scale1).value;
    r.parity = sigma;
    return r;
}

DiagnosticsRecord msilcc_record(const ZetaWindow& w, const GridSpec& grid,
                                const PotentialParams& p) {
    const double d = grid.delta;
    const ZetaRow& c = *w[2];
    const std::size_t n = c.size();
    const StressTensor t = msilcc_stress_tensor(*w[1], c, *w[3], d, p);
    const Charges q = charges(t, sqrt2 * d);
    ResidualField f{Row(n), Row(n), Row(n), Row(n)};
    for (std::size_t j = 0; j < n; ++j) {
        const ResidualValue a = msilcc_residual_exact(w, j, Branch::plus, d, p);
        const ResidualValue b = msilcc_residual_exact(w, j, Branch::minus, d, p);
        f.eps0[j] = a.value;
        f.scale0[j] = a.scale;
        f.eps1[j] = b.value;
        f.scale1[j] = b.scale;
    }
    DiagnosticsRecord r;
    r.row = c.time_index;
    r.time = grid.row_time(c.time_index);
    r.energy = r.energy_plus = r.energy_minus = q.q0;
    r.q0 = q.q0;
    r.q1 = q.q1;
    r.eps0_max = delta_normalize(f.eps0, f.scale0).value;
    r.eps1_max = delta_normalize(f.eps1, f.scale1).value;
    r.parity = c.parity();
    return r;
}

}  // namespace phi4
