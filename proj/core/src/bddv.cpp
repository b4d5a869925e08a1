#include "phi4/bddv.hpp"

#include <cmath>
#include <numbers>

#include "phi4/newton.hpp"

namespace phi4 {

BddvState bddv_init(double amplitude, const GridSpec& grid, const PotentialParams& p) {
    if (grid.family != LatticeFamily::lightcone)
        throw ConfigError("bddv scheme needs a light-cone lattice");
    return bddv_init(InitialData::sine(amplitude, grid.length), grid, p);
}

BddvState bddv_init(const InitialData& data, const GridSpec& grid, const PotentialParams& p) {
    if (grid.family != LatticeFamily::lightcone)
        throw ConfigError("bddv scheme needs a light-cone lattice");
    grid.validate();
    p.validate();
    const std::size_t n = grid.n_sites;
    const double tau = grid.row_time(1);
    Row r0(n), r1(n);
    for (std::size_t j = 0; j < n; ++j) {
        r0[j] = data.phi(grid.site_position(0, j));
        const double x = grid.site_position(1, j);
        const double f = data.phi(x);
        r1[j] = f + tau * data.dphi_dt(x) + 0.5 * tau * tau * (data.phi_xx(x) - potential_deriv(f, p));
    }
    BddvState s{{std::move(r0), std::move(r1), 1}, grid, p};
    check_bounded(s.rows.curr, 1, s.overflow);
    return s;
}

double bddv_denominator(double a, double b, double delta, const PotentialParams& p) {
    return 1.0 + delta * delta * (2.0 * p.r + p.lambda * (a * a + b * b)) / 8.0;
}

BddvState bddv_step(const BddvState& s) {
    const Row& prev = s.rows.prev;
    const Row& curr = s.rows.curr;
    const std::size_t n = curr.size();
    const long ln = static_cast<long>(n);
    const int sigma = s.rows.parity();
    const double d = s.grid.delta;
    Row next(n);
    long bad = -1;
#pragma omp parallel for schedule(static) reduction(max : bad)
    for (long j = 0; j < ln; ++j) {
        const std::size_t jj = static_cast<std::size_t>(j);
        const double a = curr[jj];
        const double b = curr[wrap(j + sigma, n)];
        const double den = bddv_denominator(a, b, d, s.p);
        if (!(den > 1e-12)) {
            bad = std::max(bad, j);
            next[jj] = 0.0;
            continue;
        }
        next[jj] = -prev[jj] + (a + b) / den;
    }
    if (bad >= 0) {
        const std::size_t jj = static_cast<std::size_t>(bad);
        throw SolverError("singular update denominator", s.rows.time_index + 1, jj,
                          bddv_denominator(curr[jj], curr[wrap(bad + sigma, n)], d, s.p));
    }
    check_bounded(next, s.rows.time_index + 1, s.overflow);
    return BddvState{{curr, std::move(next), s.rows.time_index + 1}, s.grid, s.p, s.overflow};
}

double bddv_residual_R(const Row& prev, const Row& curr, const Row& next, std::size_t j, int sigma,
                       double delta, const PotentialParams& p) {
    const double a = curr[j];
    const double b = curr[wrap(static_cast<long>(j) + sigma, curr.size())];
    return (next[j] + prev[j]) * bddv_denominator(a, b, delta, p) - a - b;
}

std::pair<double, double> bddv_lightcone_derivs(const Row& prev, const Row& curr, const Row& next,
                                                std::size_t j, int sigma, double delta,
                                                Branch branch) {
    const std::size_t n = curr.size();
    const long lj = static_cast<long>(j);
    const double up = curr[wrap(lj + (sigma + 1) / 2, n)];
    const double down = curr[wrap(lj + (sigma - 1) / 2, n)];
    if (branch == Branch::plus) return {(next[j] - up) / delta, (next[j] - down) / delta};
    return {-(prev[j] - down) / delta, -(prev[j] - up) / delta};
}

}  // namespace phi4
