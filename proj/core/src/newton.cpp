#include "phi4/newton.hpp"

#include <cmath>

namespace phi4 {

void check_bounded(const Row& row, long index, double bound) {
    for (std::size_t j = 0; j < row.size(); ++j)
        if (!std::isfinite(row[j]) || std::abs(row[j]) > bound)
            throw DivergenceError(index, j, row[j]);
}

double d_plus(const Row& row, std::size_t j, double delta) {
    return (row[wrap(static_cast<long>(j) + 1, row.size())] - row[j]) / delta;
}

double d_minus(const Row& row, std::size_t j, double delta) {
    return (row[j] - row[wrap(static_cast<long>(j) - 1, row.size())]) / delta;
}

double time_d_plus(const Row& curr, const Row& next, std::size_t j, double delta) {
    return (next[j] - curr[j]) / delta;
}

double time_d_minus(const Row& prev, const Row& curr, std::size_t j, double delta) {
    return (curr[j] - prev[j]) / delta;
}

NewtonState newton_init(double amplitude, const GridSpec& grid, const PotentialParams& p) {
    if (grid.family != LatticeFamily::aligned)
        throw ConfigError("newton scheme needs an aligned lattice");
    return newton_init(InitialData::sine(amplitude, grid.length), grid, p);
}

NewtonState newton_init(const InitialData& data, const GridSpec& grid, const PotentialParams& p) {
    if (grid.family != LatticeFamily::aligned)
        throw ConfigError("newton scheme needs an aligned lattice");
    grid.validate();
    p.validate();
    const std::size_t n = grid.n_sites;
    const double d = grid.delta;
    Row r0(n), r1(n);
    for (std::size_t j = 0; j < n; ++j) r0[j] = data.phi(grid.site_position(0, j));
    for (std::size_t j = 0; j < n; ++j) {
        const double x = grid.site_position(0, j);
        const double lap = (d_plus(r0, j, d) - d_minus(r0, j, d)) / d;
        r1[j] = r0[j] + d * data.dphi_dt(x) + 0.5 * d * d * (lap - potential_deriv(r0[j], p));
    }
    NewtonState s{{std::move(r0), std::move(r1), 1}, grid, p};
    check_bounded(s.rows.curr, 1, s.overflow);
    return s;
}

NewtonState newton_step(const NewtonState& s) {
    const Row& prev = s.rows.prev;
    const Row& curr = s.rows.curr;
    const std::size_t n = curr.size();
    const long ln = static_cast<long>(n);
    const double d2 = s.grid.delta * s.grid.delta;
    Row next(n);
#pragma omp parallel for schedule(static)
    for (long j = 0; j < ln; ++j) {
        const std::size_t jj = static_cast<std::size_t>(j);
        next[jj] = -prev[jj] + curr[wrap(j + 1, n)] + curr[wrap(j - 1, n)] -
                   d2 * potential_deriv(curr[jj], s.p);
    }
    check_bounded(next, s.rows.time_index + 1, s.overflow);
    NewtonState out{{curr, std::move(next), s.rows.time_index + 1}, s.grid, s.p, s.overflow};
    return out;
}

double newton_eom_residual(const Row& prev, const Row& curr, const Row& next, std::size_t j,
                           double delta, const PotentialParams& p) {
    const double tt = (next[j] - 2.0 * curr[j] + prev[j]) / (delta * delta);
    const double xx = (d_plus(curr, j, delta) - d_minus(curr, j, delta)) / delta;
    return tt - xx + potential_deriv(curr[j], p);
}

}  // namespace phi4
