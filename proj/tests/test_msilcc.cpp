#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "phi4/diagnostics.hpp"
#include "phi4/msilcc.hpp"
#include "phi4/reference.hpp"

using namespace phi4;

namespace {
constexpr double sqrt2 = std::numbers::sqrt2;

Vec4 random_vec(std::mt19937_64& rng, double scale) {
    std::uniform_real_distribution<double> u(-scale, scale);
    return {u(rng), u(rng), u(rng), u(rng)};
}

ZetaRow random_row(std::size_t n, long index, std::mt19937_64& rng, double scale) {
    ZetaRow r(n, index);
    for (std::size_t j = 0; j < n; ++j) r.set(j, random_vec(rng, scale));
    return r;
}

double energy_at_start(std::size_t n, double a) {
    const GridSpec g = GridSpec::lightcone(n, 1.0);
    const PotentialParams p{};
    MsilccState s = msilcc_init(a, g, p, SolverSettings{});
    const MsilccState t = msilcc_step(s);
    return charges(msilcc_stress_tensor(s.prev, s.curr, t.curr, g.delta, p), sqrt2 * g.delta).q0;
}

// bisection on the midpoint equation m = q + d p / 2 - d^2 V'(m) / 4
MechState midpoint_oracle(const MechState& s, double d, const PotentialParams& p) {
    auto f = [&](double m) { return m - s.q - 0.5 * d * s.p + 0.25 * d * d * potential_deriv(m, p); };
    double lo = -1e3, hi = 1e3;
    for (int k = 0; k < 200; ++k) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0 ? hi : lo) = mid;
    }
    const double m = 0.5 * (lo + hi);
    return {2 * m - s.q, s.p - d * potential_deriv(m, p)};
}
}  // namespace

TEST_CASE("cell residual of a constant state") {
    // equal vertices leave only the gradient of H at the average
    const PotentialParams p{1.0, 2.0, 0.5, 0.3};
    const Vec4 z{0.4, -0.3, 0.9, 1.1};
    const double delta = 0.05, c = sqrt2 * delta;
    for (int parity : {-1, 1}) {
        const Vec4 r = msilcc_cell_residual(z, CellNeighborhood{z, z, z, parity}, delta, p);
        CHECK(r[0] == doctest::Approx(c * potential_deriv(z[0], p)));
        CHECK(r[1] == doctest::Approx(-c * z[1]));
        CHECK(r[2] == doctest::Approx(c * z[2]));
        CHECK(r[3] == doctest::Approx(c * aux_potential_deriv(z[3], p)));
    }
    const Vec4 zero{};
    CHECK(msilcc_cell_residual(zero, CellNeighborhood{zero, zero, zero, 1}, delta, p) == zero);
}

TEST_CASE("cell residual differences") {
    // free fields: the residual is the sum of the box differences and c times the averages
    const PotentialParams p{0.0, 0.0};
    const double delta = 0.1, c = sqrt2 * delta;
    const Vec4 top{1, 2, 3, 4}, below{0, 0, 0, 0}, s{1, 0, 0, 0}, t{0, 1, 0, 0};
    // parity +1: side is the left vertex
    const Vec4 r = msilcc_cell_residual(top, CellNeighborhood{below, s, t, 1}, delta, p);
    CHECK(r[0] == doctest::Approx(2.0));
    CHECK(r[1] == doctest::Approx(1.0 - c * 0.75));
    CHECK(r[2] == doctest::Approx(4.0 - 1.0 + c * 0.75));
    CHECK(r[3] == doctest::Approx(3.0 + 1.0));
    const Vec4 q = msilcc_cell_residual(top, CellNeighborhood{below, s, t, -1}, delta, p);
    CHECK(q[2] == doctest::Approx(4.0 + 1.0 + c * 0.75));
    CHECK(q[3] == doctest::Approx(3.0 - 1.0));
}

TEST_CASE("Jacobian and linearization match finite differences") {
    std::mt19937_64 rng(17);
    const PotentialParams p{1.0, 1.5, 0.7, 0.4};
    const double delta = 0.08, h = 1e-6;
    for (int trial = 0; trial < 20; ++trial) {
        const Vec4 u = random_vec(rng, 3.0);
        CellNeighborhood nb{random_vec(rng, 3.0), random_vec(rng, 3.0), random_vec(rng, 3.0),
                            trial % 2 ? 1 : -1};
        const CellLinearization lin = msilcc_cell_linearization(u, nb, delta, p);
        const Mat4 jac = msilcc_cell_jacobian(u, nb, delta, p);
        // perturb one vertex at a time; vertex 0 is the top
        for (int which = 0; which < 4; ++which) {
            const Mat4& block = which == 0   ? lin.top
                                : which == 1 ? lin.below
                                : which == 2 ? (nb.parity > 0 ? lin.left : lin.right)
                                             : (nb.parity > 0 ? lin.right : lin.left);
            for (int k = 0; k < 4; ++k) {
                Vec4 up = u, um = u;
                CellNeighborhood np = nb, nm = nb;
                Vec4* tp = which == 0 ? &up : which == 1 ? &np.below : which == 2 ? &np.side : &np.side_shifted;
                Vec4* tm = which == 0 ? &um : which == 1 ? &nm.below : which == 2 ? &nm.side : &nm.side_shifted;
                (*tp)[k] += h;
                (*tm)[k] -= h;
                const Vec4 rp = msilcc_cell_residual(up, np, delta, p);
                const Vec4 rm = msilcc_cell_residual(um, nm, delta, p);
                for (int i = 0; i < 4; ++i) {
                    const double fd = (rp[i] - rm[i]) / (2 * h);
                    CHECK(std::abs(block[i][k] - fd) <= 1e-7 * std::max(1.0, std::abs(fd)));
                    if (which == 0) CHECK(jac[i][k] == block[i][k]);
                }
            }
        }
    }
}

TEST_CASE("cell solves") {
    std::mt19937_64 rng(2);
    const double delta = 0.01;
    // linear cell equations take one Gauss-Newton step
    for (int trial = 0; trial < 10; ++trial) {
        const CellNeighborhood nb{random_vec(rng, 1.0), random_vec(rng, 1.0), random_vec(rng, 1.0), 1};
        const auto out = msilcc_solve_cell(nb, delta, PotentialParams{1.0, 0.0}, SolverSettings{}, 3, 0);
        CHECK(out.iterations <= 1);
        CHECK(norm_inf(msilcc_cell_residual(out.x, nb, delta, PotentialParams{1.0, 0.0})) <= 1e-12);
    }
    // nonlinear cells converge quadratically in a few steps
    const PotentialParams p{1.0, 1.0};
    for (int trial = 0; trial < 10; ++trial) {
        const CellNeighborhood nb{random_vec(rng, 10.0), random_vec(rng, 10.0), random_vec(rng, 10.0), -1};
        const auto out = msilcc_solve_cell(nb, delta, p, SolverSettings{}, 3, 0);
        CHECK(out.status == LmStatus::converged);
        CHECK(out.iterations <= 6);
    }
    // a far-off cell with one iteration allowed fails loudly
    const CellNeighborhood hard{Vec4{-80, 0, 0, 0}, Vec4{90, 50, 0, 0}, Vec4{95, -40, 0, 0}, 1};
    CHECK_THROWS_AS(msilcc_solve_cell(hard, 0.5, p, SolverSettings{1e-12, 1, 1e-3}, 3, 0), SolverError);
}

TEST_CASE("initial rows") {
    const GridSpec g = GridSpec::lightcone(64, 1.0);
    const MsilccState z = msilcc_init(0.0, g, PotentialParams{}, SolverSettings{});
    for (std::size_t j = 0; j < 64; ++j) {
        CHECK(z.prev.at(j) == Vec4{});
        CHECK(z.curr.at(j) == Vec4{});
    }
    CHECK(z.prev.time_index == 0);
    CHECK(z.curr.time_index == 1);

    // psi1 = -phi_x at rest
    const double k = 2 * std::numbers::pi;
    const MsilccState s = msilcc_init(1.0, GridSpec::lightcone(256, 1.0), PotentialParams{}, SolverSettings{});
    const GridSpec gg = s.grid;
    for (std::size_t j = 0; j < 256; j += 17) {
        const double x = gg.site_position(0, j);
        CHECK(std::abs(s.prev.psi1[j] + k * std::cos(k * x)) <= 1e-3);
        CHECK(s.prev.psi0[j] == 0.0);
        CHECK(s.prev.gamma[j] == 0.0);
    }
    // the virtual row closes the first cells
    const ZetaRow v = msilcc_virtual_row(s.prev, s.curr);
    CHECK(v.time_index == -1);
    for (std::size_t j = 0; j < 256; j += 31) {
        const Vec4 r = msilcc_cell_residual(s.curr.at(j), neighborhood(v, s.prev, j), gg.delta, s.p);
        CHECK(norm_inf(r) <= 1e-11);
    }
}

TEST_CASE("discrete energy of the start converges at second order") {
    const double exact = exact_initial_energy(10.0, 1.0, PotentialParams{});
    const double e1 = std::abs(energy_at_start(64, 10.0) - exact);
    const double e2 = std::abs(energy_at_start(128, 10.0) - exact);
    CHECK(e2 < 1e-2 * exact);
    CHECK(e1 / e2 >= 3.0);
}

TEST_CASE("small amplitudes follow the massive linear mode") {
    const GridSpec g = GridSpec::lightcone(128, 1.0);
    const double a = 1e-3;
    MsilccState s = msilcc_init(a, g, PotentialParams{}, SolverSettings{});
    while (g.row_time(s.curr.time_index) < 1.0) s = msilcc_step(s);
    const double t = g.row_time(s.curr.time_index);
    double worst = 0.0;
    for (std::size_t j = 0; j < 128; ++j)
        worst = std::max(worst, std::abs(s.curr.phi[j] - linear_mode(a, 1.0, g.site_position(s.curr.time_index, j), t, 1.0)));
    CHECK(worst <= 0.01 * a);
}

TEST_CASE("stepped rows solve every cell") {
    const GridSpec g = GridSpec::lightcone(32, 1.0);
    const PotentialParams p{1.0, 1.0, 0.5, 0.25};
    MsilccState s = msilcc_init(10.0, g, p, SolverSettings{});
    for (int k = 0; k < 5; ++k) {
        const MsilccState t = msilcc_step(s);
        for (std::size_t j = 0; j < 32; ++j)
            CHECK(norm_inf(msilcc_cell_residual(t.curr.at(j), neighborhood(s.prev, s.curr, j), g.delta, p)) <=
                  1e-10);
        CHECK(t.curr.time_index == s.curr.time_index + 1);
        CHECK(t.stats.cells_solved == s.stats.cells_solved + 32);
        s = t;
    }
}

TEST_CASE("tangent propagation and the symplectic conservation law") {
    std::mt19937_64 rng(8);
    const GridSpec g = GridSpec::lightcone(16, 1.0);
    const PotentialParams p{1.0, 1.0, 0.5, 0.25};
    const SolverSettings tight{1e-14, 50, 1e-3};
    MsilccState s = msilcc_init(3.0, g, p, tight);
    s = msilcc_step(s);
    ZetaRow u0 = random_row(16, s.prev.time_index, rng, 1.0), u1 = random_row(16, s.curr.time_index, rng, 1.0);
    ZetaRow v0 = random_row(16, s.prev.time_index, rng, 1.0), v1 = random_row(16, s.curr.time_index, rng, 1.0);

    // finite-difference check of the tangent map
    {
        const double eps = 1e-5;
        auto shifted = [&](double e) {
            MsilccState m = s;
            for (std::size_t j = 0; j < 16; ++j) {
                Vec4 a = m.prev.at(j), b = m.curr.at(j), da = u0.at(j), db = u1.at(j);
                for (int i = 0; i < 4; ++i) {
                    a[i] += e * da[i];
                    b[i] += e * db[i];
                }
                m.prev.set(j, a);
                m.curr.set(j, b);
            }
            return msilcc_step(m).curr;
        };
        const ZetaRow hi = shifted(eps), lo = shifted(-eps);
        const ZetaRow next = msilcc_step(s).curr;
        const ZetaRow du = msilcc_tangent_step(s, next, u0, u1);
        for (std::size_t j = 0; j < 16; ++j)
            for (int i = 0; i < 4; ++i) {
                const double fd = (hi.at(j)[i] - lo.at(j)[i]) / (2 * eps);
                CHECK(std::abs(du.at(j)[i] - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
            }
    }

    double worst = 0.0;
    for (int step = 0; step < 10; ++step) {
        const MsilccState t = msilcc_step(s);
        const ZetaRow u2 = msilcc_tangent_step(s, t.curr, u0, u1);
        const ZetaRow v2 = msilcc_tangent_step(s, t.curr, v0, v1);
        for (std::size_t j = 0; j < 16; ++j)
            worst = std::max(worst, std::abs(msilcc_symplectic_defect(cell_vertices(u0, u1, u2, j),
                                                                      cell_vertices(v0, v1, v2, j), g.delta)) *
                                        g.delta);
        u0 = u1;
        u1 = u2;
        v0 = v1;
        v1 = v2;
        s = t;
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("implicit midpoint for the homogeneous oscillator") {
    const PotentialParams harm{1.0, 0.0};
    MechState m{1.0, 0.0};
    for (int k = 0; k < 1000; ++k) m = midpoint_step_mech(m, 0.1, harm);
    CHECK(0.5 * (m.q * m.q + m.p * m.p) == doctest::Approx(0.5).epsilon(1e-13));

    const PotentialParams p{};
    for (const MechState s : {MechState{1.0, 0.0}, MechState{10.0, -3.0}, MechState{-0.2, 5.0}}) {
        const MechState a = midpoint_step_mech(s, 0.05, p);
        const MechState b = midpoint_oracle(s, 0.05, p);
        CHECK(a.q == doctest::Approx(b.q).epsilon(1e-12));
        CHECK(a.p == doctest::Approx(b.p).epsilon(1e-12));
    }
}

TEST_CASE("lattice guard") {
    CHECK_THROWS_AS(msilcc_init(1.0, GridSpec::aligned(16, 1.0), PotentialParams{}, SolverSettings{}),
                    ConfigError);
    CHECK_THROWS_AS(msilcc_init(1.0, GridSpec::lightcone(16, 1.0), PotentialParams{}, SolverSettings{0.0, 5, 1.0}),
                    std::exception);
}
