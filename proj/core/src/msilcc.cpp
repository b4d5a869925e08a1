#include "phi4/msilcc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace phi4 {

namespace {
constexpr double sqrt2 = std::numbers::sqrt2;

struct Sides {
    const Vec4& left;
    const Vec4& right;
};

Sides sides(const CellNeighborhood& nb) {
    if (nb.parity > 0) return {nb.side, nb.side_shifted};
    return {nb.side_shifted, nb.side};
}

Vec4 average(const Vec4& a, const Vec4& b, const Vec4& c, const Vec4& d) {
    Vec4 m{};
    for (int i = 0; i < 4; ++i) m[i] = 0.25 * (a[i] + b[i] + c[i] + d[i]);
    return m;
}

// d(c * nonlinear part)/d(average), already divided by 4
Mat4 average_coupling(const Vec4& avg, double c, const PotentialParams& p) {
    Mat4 g{};
    g[0][0] = 0.25 * c * potential_second_deriv(avg[0], p);
    g[1][1] = -0.25 * c;
    g[2][2] = 0.25 * c;
    g[3][3] = 0.25 * c * aux_potential_second_deriv(avg[3], p);
    return g;
}

double cell_noise_floor(const CellUnknowns& u, const CellNeighborhood& nb, double c,
                        const PotentialParams& p) {
    double m = 0.0;
    for (int i = 0; i < 4; ++i)
        m = std::max({m, std::abs(u[i]), std::abs(nb.below[i]), std::abs(nb.side[i]),
                      std::abs(nb.side_shifted[i])});
    const Vec4 avg = average(nb.below, nb.side, nb.side_shifted, u);
    m = std::max({m, c * std::abs(potential_deriv(avg[0], p)),
                  c * std::abs(aux_potential_deriv(avg[3], p))});
    return 64.0 * std::numeric_limits<double>::epsilon() * m;
}

Mat4 add(const Mat4& a, const Mat4& b, double sb = 1.0) {
    Mat4 m{};
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k) m[i][k] = a[i][k] + sb * b[i][k];
    return m;
}

Vec4 apply(const Mat4& a, const Vec4& v) {
    Vec4 out{};
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k) out[i] += a[i][k] * v[k];
    return out;
}
}  // namespace

Vec4 msilcc_cell_residual(const CellUnknowns& u, const CellNeighborhood& nb, double delta,
                          const PotentialParams& p) {
    const double c = sqrt2 * delta;
    const auto [l, r] = sides(nb);
    const Vec4& b = nb.below;
    const Vec4 avg = average(b, nb.side, nb.side_shifted, u);
    return {(u[1] - b[1]) + (r[2] - l[2]) + c * potential_deriv(avg[0], p),
            (u[0] - b[0]) + (r[3] - l[3]) - c * avg[1],
            (u[3] - b[3]) + (r[0] - l[0]) + c * avg[2],
            (u[2] - b[2]) + (r[1] - l[1]) + c * aux_potential_deriv(avg[3], p)};
}

CellLinearization msilcc_cell_linearization(const CellUnknowns& u, const CellNeighborhood& nb,
                                            double delta, const PotentialParams& p) {
    const double c = sqrt2 * delta;
    const Vec4 avg = average(nb.below, nb.side, nb.side_shifted, u);
    const Mat4 g = average_coupling(avg, c, p);
    // time pattern: row i differences component t[i]; space pattern s[i]
    Mat4 time{}, space{};
    time[0][1] = time[1][0] = time[2][3] = time[3][2] = 1.0;
    space[0][2] = space[1][3] = space[2][0] = space[3][1] = 1.0;
    return {add(g, time), add(g, time, -1.0), add(g, space, -1.0), add(g, space)};
}

Mat4 msilcc_cell_jacobian(const CellUnknowns& u, const CellNeighborhood& nb, double delta,
                          const PotentialParams& p) {
    return msilcc_cell_linearization(u, nb, delta, p).top;
}

CellNeighborhood neighborhood(const ZetaRow& prev, const ZetaRow& curr, std::size_t j) {
    const int sigma = curr.parity();
    return {prev.at(j), curr.at(j), curr.at(wrap(static_cast<long>(j) + sigma, curr.size())),
            sigma};
}

LmResult<4> msilcc_solve_cell(const CellNeighborhood& nb, double delta, const PotentialParams& p,
                              const SolverSettings& s, long row, std::size_t j) {
    Vec4 guess{};
    for (int i = 0; i < 4; ++i) guess[i] = nb.side[i] + nb.side_shifted[i] - nb.below[i];
    const double c = sqrt2 * delta;
    auto res = [&](const Vec4& u) { return msilcc_cell_residual(u, nb, delta, p); };
    auto jac = [&](const Vec4& u) { return msilcc_cell_jacobian(u, nb, delta, p); };
    auto out = lm_solve_with<4>(res, jac, guess, s, cell_noise_floor(guess, nb, c, p));
    if (out.status == LmStatus::converged) {
        // the floor depends on the magnitude of the solution, not only the guess
        out.final_norm = norm_inf(res(out.x));
    } else {
        const double floor = cell_noise_floor(out.x, nb, c, p);
        if (out.final_norm <= std::max(s.tol_residual, floor)) {
            out.status = LmStatus::converged;
        } else {
            throw SolverError(out.status == LmStatus::singular_normal_equations
                                  ? "singular cell system"
                                  : "cell solve did not converge",
                              row, j, out.final_norm);
        }
    }
    return out;
}

MsilccState msilcc_init(double amplitude, const GridSpec& grid, const PotentialParams& p,
                        const SolverSettings& solver) {
    if (grid.family != LatticeFamily::lightcone)
        throw ConfigError("msilcc scheme needs a light-cone lattice");
    return msilcc_init(InitialData::sine(amplitude, grid.length), grid, p, solver);
}

MsilccState msilcc_init(const InitialData& data, const GridSpec& grid, const PotentialParams& p,
                        const SolverSettings& solver) {
    if (grid.family != LatticeFamily::lightcone)
        throw ConfigError("msilcc scheme needs a light-cone lattice");
    grid.validate();
    p.validate();
    solver.validate();
    const std::size_t n = grid.n_sites;
    const long ln = static_cast<long>(n);
    const double h = 2.0 * sqrt2 * grid.delta;  // distance between sites j-1 and j+1

    ZetaRow row0(n, 0);
    for (std::size_t j = 0; j < n; ++j) {
        const double x = grid.site_position(0, j);
        row0.phi[j] = data.phi(x);
        row0.psi0[j] = data.dphi_dt(x);
    }
    for (long j = 0; j < ln; ++j) {
        const std::size_t jj = static_cast<std::size_t>(j);
        row0.psi1[jj] = -(row0.phi[wrap(j + 1, n)] - row0.phi[wrap(j - 1, n)]) / h;
    }

    // first cells: the bottom vertex is eliminated through bottom + top = left + right
    ZetaRow row1(n, 1);
    ZetaRow none(n, -1);
    SolverStats stats;
    for (std::size_t j = 0; j < n; ++j) {
        CellNeighborhood nb = neighborhood(none, row0, j);
        auto res = [&](const Vec4& u) {
            CellNeighborhood m = nb;
            for (int i = 0; i < 4; ++i) m.below[i] = nb.side[i] + nb.side_shifted[i] - u[i];
            return msilcc_cell_residual(u, m, grid.delta, p);
        };
        auto jac = [&](const Vec4& u) {
            CellNeighborhood m = nb;
            for (int i = 0; i < 4; ++i) m.below[i] = nb.side[i] + nb.side_shifted[i] - u[i];
            const auto lin = msilcc_cell_linearization(u, m, grid.delta, p);
            return add(lin.top, lin.below, -1.0);
        };
        Vec4 guess{};
        for (int i = 0; i < 4; ++i) guess[i] = 0.5 * (nb.side[i] + nb.side_shifted[i]);
        for (int i = 0; i < 4; ++i) nb.below[i] = guess[i];
        const double floor = cell_noise_floor(guess, nb, sqrt2 * grid.delta, p);
        auto out = lm_solve_with<4>(res, jac, guess, solver, floor);
        if (out.status != LmStatus::converged)
            throw SolverError("initial cell solve did not converge", 1, j, out.final_norm);
        row1.set(j, out.x);
        stats.total_iterations += static_cast<std::uint64_t>(out.iterations);
        stats.max_cell_iterations = std::max(stats.max_cell_iterations, out.iterations);
        ++stats.cells_solved;
    }
    return MsilccState{std::move(row0), std::move(row1), grid, p, solver, stats};
}

MsilccState msilcc_step(const MsilccState& s) {
    const std::size_t n = s.curr.size();
    const long ln = static_cast<long>(n);
    const long index = s.curr.time_index + 1;
    ZetaRow next(n, index);
    std::vector<double> failed(n, -1.0);
    std::vector<int> iters(n, 0);
    bool any_failed = false;
#pragma omp parallel for schedule(static) reduction(|| : any_failed)
    for (long j = 0; j < ln; ++j) {
        const std::size_t jj = static_cast<std::size_t>(j);
        try {
            const auto out = msilcc_solve_cell(neighborhood(s.prev, s.curr, jj), s.grid.delta, s.p,
                                               s.solver, index, jj);
            next.set(jj, out.x);
            iters[jj] = out.iterations;
        } catch (const SolverError& e) {
            failed[jj] = e.residual_norm;
            any_failed = true;
        }
    }
    if (any_failed) {
        for (std::size_t j = 0; j < n; ++j)
            if (failed[j] >= 0.0) throw SolverError("cell solve did not converge", index, j, failed[j]);
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (!std::isfinite(next.phi[j]) || std::abs(next.phi[j]) > 1e6)
            throw DivergenceError(index, j, next.phi[j]);
    }
    MsilccState out{s.curr, std::move(next), s.grid, s.p, s.solver, s.stats};
    for (int it : iters) {
        out.stats.total_iterations += static_cast<std::uint64_t>(it);
        out.stats.max_cell_iterations = std::max(out.stats.max_cell_iterations, it);
    }
    out.stats.cells_solved += n;
    return out;
}

ZetaRow msilcc_virtual_row(const ZetaRow& row0, const ZetaRow& row1) {
    const std::size_t n = row0.size();
    ZetaRow out(n, row0.time_index - 1);
    const int sigma = row0.parity();
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t k = wrap(static_cast<long>(j) + sigma, n);
        Vec4 v{};
        const Vec4 a = row0.at(j), b = row0.at(k), t = row1.at(j);
        for (int i = 0; i < 4; ++i) v[i] = a[i] + b[i] - t[i];
        out.set(j, v);
    }
    return out;
}

ZetaRow msilcc_tangent_step(const MsilccState& s, const ZetaRow& next, const ZetaRow& dprev,
                            const ZetaRow& dcurr) {
    const std::size_t n = s.curr.size();
    ZetaRow out(n, next.time_index);
    for (std::size_t j = 0; j < n; ++j) {
        const CellNeighborhood nb = neighborhood(s.prev, s.curr, j);
        const auto lin = msilcc_cell_linearization(next.at(j), nb, s.grid.delta, s.p);
        const CellNeighborhood dnb = neighborhood(dprev, dcurr, j);
        const auto [dl, dr] = sides(dnb);
        Vec4 rhs = apply(lin.below, dnb.below);
        const Vec4 a = apply(lin.left, dl), b = apply(lin.right, dr);
        for (int i = 0; i < 4; ++i) rhs[i] = -(rhs[i] + a[i] + b[i]);
        const auto x = solve_linear<4>(lin.top, rhs);
        if (!x) throw SolverError("singular tangent system", next.time_index, j, 0.0);
        out.set(j, *x);
    }
    return out;
}

MechState midpoint_step_mech(const MechState& s, double delta, const PotentialParams& pot,
                             const SolverSettings& solver) {
    using V2 = VecN<2>;
    auto res = [&](const V2& x) {
        const double qm = 0.5 * (s.q + x[0]);
        return V2{x[1] - s.p + delta * potential_deriv(qm, pot), x[0] - s.q - 0.5 * delta * (s.p + x[1])};
    };
    auto jac = [&](const V2& x) {
        const double qm = 0.5 * (s.q + x[0]);
        return MatN<2>{{{0.5 * delta * potential_second_deriv(qm, pot), 1.0}, {1.0, -0.5 * delta}}};
    };
    const V2 guess{s.q + delta * s.p, s.p - delta * potential_deriv(s.q, pot)};
    const double scale = std::max({std::abs(s.q), std::abs(s.p), std::abs(guess[0]), std::abs(guess[1]),
                                   delta * std::abs(potential_deriv(s.q, pot))});
    auto out = lm_solve_with<2>(res, jac, guess, solver,
                                16.0 * std::numeric_limits<double>::epsilon() * scale);
    if (out.status != LmStatus::converged)
        throw SolverError("midpoint step did not converge", 0, 0, out.final_norm);
    return {out.x[0], out.x[1]};
}

}  // namespace phi4
