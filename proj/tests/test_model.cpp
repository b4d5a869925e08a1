#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "phi4/model.hpp"
#include "phi4/reference.hpp"

using namespace phi4;

namespace {
constexpr double pi = std::numbers::pi;

// Pfaffian of a 4x4 skew matrix; det = Pf^2
double pfaffian(const Mat4& m) {
    return m[0][1] * m[2][3] - m[0][2] * m[1][3] + m[0][3] * m[1][2];
}

Mat4 matmul(const Mat4& a, const Mat4& b) {
    Mat4 c{};
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k)
            for (int m = 0; m < 4; ++m) c[i][k] += a[i][m] * b[m][k];
    return c;
}
}  // namespace

TEST_CASE("potential values and derivatives") {
    const PotentialParams p{};
    CHECK(potential_value(0.0, p) == 0.0);
    CHECK(potential_value(1.0, p) == doctest::Approx(0.75));
    CHECK(potential_value(2.0, PotentialParams{-1.0, 1.0}) == doctest::Approx(2.0));
    CHECK(potential_deriv(0.0, PotentialParams{3.0, 7.0}) == 0.0);
    CHECK(potential_deriv(1.0, p) == doctest::Approx(2.0));
    CHECK(potential_deriv(-2.0, p) == doctest::Approx(-10.0));
    CHECK(interaction_value(2.0, p) == doctest::Approx(4.0));
    CHECK(aux_potential_value(1.0, p) == 0.0);
}

TEST_CASE("potential derivatives match central differences") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    const PotentialParams p{1.3, 0.7, -0.4, 2.0};
    const double h = 1e-5;
    for (int k = 0; k < 100; ++k) {
        const double x = u(rng);
        const double fd = (potential_value(x + h, p) - potential_value(x - h, p)) / (2 * h);
        CHECK(std::abs(fd - potential_deriv(x, p)) <= 1e-8 * std::max(1.0, std::abs(fd)));
        const double fd2 = (potential_deriv(x + h, p) - potential_deriv(x - h, p)) / (2 * h);
        CHECK(std::abs(fd2 - potential_second_deriv(x, p)) <= 1e-8 * std::max(1.0, std::abs(fd2)));
        const double fa = (aux_potential_value(x + h, p) - aux_potential_value(x - h, p)) / (2 * h);
        CHECK(std::abs(fa - aux_potential_deriv(x, p)) <= 1e-8 * std::max(1.0, std::abs(fa)));
    }
}

TEST_CASE("potential parameters reject a negative quartic coefficient") {
    CHECK_THROWS_AS(PotentialParams({1.0, -1.0}).validate(), ConfigError);
    CHECK_THROWS_AS(PotentialParams({1.0, 1.0, 0.0, -0.5}).validate(), ConfigError);
    CHECK_NOTHROW(PotentialParams({-5.0, 1.0}).validate());
}

TEST_CASE("sine initial condition") {
    auto [a, b] = initial_condition_sine(1.0, 4.0, 1.0);
    CHECK(a == doctest::Approx(1.0));
    CHECK(b == 0.0);
    CHECK(std::abs(initial_condition_sine(1.0, 4.0, 0.0).first) < 1e-15);
    CHECK(initial_condition_sine(3.0, 8.0, 1.0).first == doctest::Approx(2.12132034).epsilon(1e-8));
}

TEST_CASE("exact initial energy") {
    const PotentialParams p{};
    CHECK(exact_initial_energy(0.0, 3.0, p) == 0.0);
    CHECK(exact_initial_energy(1.0, 2 * pi, p) == doctest::Approx(19 * pi / 16).epsilon(1e-14));

    // periodic trapezoid rule, 1e6 points
    for (double a : {1.0, 10.0}) {
        for (double l : {1.0, 2 * pi}) {
            const PotentialParams q{0.6, 1.4};
            const int n = 1000000;
            const double h = l / n, k = 2 * pi / l;
            double sum = 0.0;
            for (int i = 0; i < n; ++i) {
                const double x = i * h;
                const double dx = a * k * std::cos(k * x);
                sum += 0.5 * dx * dx + potential_value(a * std::sin(k * x), q);
            }
            CHECK(std::abs(sum * h - exact_initial_energy(a, l, q)) <=
                  1e-10 * exact_initial_energy(a, l, q));
        }
    }
}

TEST_CASE("light-cone coordinate map") {
    auto [c0, c1] = lightcone_map(0.0, 0.0);
    CHECK(c0 == 0.0);
    CHECK(c1 == 0.0);
    auto [d0, d1] = lightcone_map(1.0, 0.0);
    CHECK(d0 == doctest::Approx(1 / std::sqrt(2.0)));
    CHECK(d1 == doctest::Approx(1 / std::sqrt(2.0)));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 1000; ++k) {
        const double x0 = u(rng), x1 = u(rng);
        auto [y0, y1] = lightcone_map(x0, x1);
        auto [z0, z1] = lightcone_unmap(y0, y1);
        CHECK(std::abs(z0 - x0) <= 1e-14);
        CHECK(std::abs(z1 - x1) <= 1e-14);
    }
    auto [e0, e1] = lightcone_unmap(lightcone_map(0.3, -0.7).first, lightcone_map(0.3, -0.7).second);
    CHECK(e0 == doctest::Approx(0.3).epsilon(1e-14));
    CHECK(e1 == doctest::Approx(-0.7).epsilon(1e-14));
}

TEST_CASE("De Donder-Weyl matrices") {
    const auto [m0, m1] = dwh_matrices_1p1();
    CHECK(m0[0][0] == 0.0);
    CHECK(m0[0][1] == -1.0);
    CHECK(m0[0][2] == 0.0);
    CHECK(m0[0][3] == 0.0);
    for (const Mat4* m : {&m0, &m1}) {
        const Mat4 sq = matmul(*m, *m);
        for (int i = 0; i < 4; ++i)
            for (int k = 0; k < 4; ++k) {
                CHECK((*m)[i][k] == -(*m)[k][i]);
                // M^2 = -1 and zero trace: eigenvalues +i, +i, -i, -i
                CHECK(sq[i][k] == doctest::Approx(i == k ? -1.0 : 0.0));
            }
        CHECK(pfaffian(*m) * pfaffian(*m) == doctest::Approx(1.0));
    }
    // not proportional: some entry is nonzero in one and zero in the other
    bool independent = false;
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k) independent |= (m0[i][k] == 0.0) != (m1[i][k] == 0.0);
    CHECK(independent);

    const auto [c0, c1] = dwh_matrices_lightcone();
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k) {
            CHECK(c0[i][k] == doctest::Approx((m0[i][k] - m1[i][k]) / std::sqrt(2.0)));
            CHECK(c1[i][k] == doctest::Approx((m0[i][k] + m1[i][k]) / std::sqrt(2.0)));
        }
}

TEST_CASE("Hamiltonian density and gradient") {
    const PotentialParams p{1.0, 1.0, 0.5, 0.25};
    const Vec4 z{0.3, -1.2, 0.8, 0.4};
    const double h = 1e-6;
    const Vec4 g = hamiltonian_gradient(z, p);
    const Vec4 gi = hamiltonian_interaction_gradient(z, p);
    for (int i = 0; i < 4; ++i) {
        Vec4 zp = z, zm = z;
        zp[i] += h;
        zm[i] -= h;
        CHECK(g[i] == doctest::Approx((hamiltonian_density(zp, p) - hamiltonian_density(zm, p)) / (2 * h)));
        CHECK(gi[i] == doctest::Approx(
                           (hamiltonian_interaction(zp, p) - hamiltonian_interaction(zm, p)) / (2 * h))
                           .epsilon(1e-7));
    }
    CHECK(hamiltonian_interaction(z, PotentialParams{1.0, 0.0}) == 0.0);
}

TEST_CASE("continuum residual") {
    CHECK(continuum_residual(0.0, 0.0, 0.0, PotentialParams{}) == 0.0);
    // free standing wave: phi_tt = phi_xx
    const PotentialParams free{0.0, 0.0};
    const double k = 2 * pi, x = 0.3, t = 0.7, eps = 0.01;
    const double f = eps * std::sin(k * x) * std::cos(k * t);
    CHECK(std::abs(continuum_residual(f, -k * k * f, -k * k * f, free)) < 1e-15);

    // homogeneous cn oscillation, eighth-order central differences at h = 1e-3
    const PotentialParams p{};
    const CnSolution sol = CnSolution::make(1.5, p);
    const double hh = 1e-3;
    const double w[] = {-1.0 / 560, 8.0 / 315, -1.0 / 5, 8.0 / 5, -205.0 / 72};
    for (double tt : {0.0, 0.4, 1.9, 3.3}) {
        double d2 = w[4] * cn_value(sol, tt);
        for (int m = 1; m <= 4; ++m)
            d2 += w[4 - m] * (cn_value(sol, tt + m * hh) + cn_value(sol, tt - m * hh));
        d2 /= hh * hh;
        CHECK(std::abs(continuum_residual(cn_value(sol, tt), d2, 0.0, p)) <= 1e-8);
    }
}

TEST_CASE("grid geometry") {
    const GridSpec a = GridSpec::aligned(128, 2.0);
    CHECK(a.delta * 128 == doctest::Approx(2.0));
    CHECK(a.site_position(5, 3) == doctest::Approx(3 * a.delta));
    CHECK(a.row_time(4) == doctest::Approx(4 * a.delta));

    const GridSpec c = GridSpec::lightcone(128, 1.0);
    CHECK(std::sqrt(2.0) * 128 * c.delta == doctest::Approx(1.0));
    CHECK(c.row_time(3) == doctest::Approx(3 * c.delta / std::sqrt(2.0)));
    // even rows sit at sqrt(2) delta j
    CHECK(c.site_position(0, 7) == doctest::Approx(std::sqrt(2.0) * c.delta * 7));
    // a vertex sits midway between the two sides of its cell on the row below
    for (long n : {0L, 1L, 2L, 5L})
        for (std::size_t j : {std::size_t{0}, std::size_t{10}, std::size_t{127}}) {
            const int s = row_parity(n);
            const std::size_t js = wrap(static_cast<long>(j) + s, 128);
            double xa = c.site_position(n, j), xb = c.site_position(n, js);
            if (std::abs(xa - xb) > 0.5) (xa < xb ? xa : xb) += 1.0;  // periodic image
            double mid = 0.5 * (xa + xb), up = c.site_position(n + 1, j);
            CHECK(std::remainder(mid - up, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
        }

    CHECK_THROWS_AS(GridSpec::lightcone(127, 1.0), ConfigError);
    CHECK_THROWS_AS(GridSpec::aligned(3, 1.0), ConfigError);
    CHECK_THROWS_AS(GridSpec::aligned(16, -1.0), ConfigError);
    CHECK(row_parity(0) == -1);
    CHECK(row_parity(1) == 1);
    CHECK(wrap(-1, 8) == 7);
    CHECK(wrap(8, 8) == 0);
}

TEST_CASE("state containers") {
    ZetaRow z(6, 3);
    CHECK(z.parity() == 1);
    z.set(2, {1.0, 2.0, 3.0, 4.0});
    CHECK(z.at(2) == Vec4{1.0, 2.0, 3.0, 4.0});
    CHECK(z.psi1[2] == 3.0);
    ScalarRows r{Row(4), Row(4), 2};
    CHECK(r.parity() == -1);
}
