#include "phi4/model.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace phi4 {

namespace {
constexpr double pi = std::numbers::pi;
constexpr double sqrt2 = std::numbers::sqrt2;

std::string divergence_message(long row, std::size_t site, double value) {
    std::ostringstream os;
    os << "field diverged at row " << row << ", site " << site << " (value " << value << ")";
    return os.str();
}

std::string solver_message(const std::string& what, long row, std::size_t site, double norm) {
    std::ostringstream os;
    os << what << " at row " << row << ", site " << site << " (residual " << norm << ")";
    return os.str();
}
}  // namespace

DivergenceError::DivergenceError(long r, std::size_t s, double v)
    : std::runtime_error(divergence_message(r, s, v)), row(r), site(s), value(v) {}

SolverError::SolverError(const std::string& what, long r, std::size_t s, double norm)
    : std::runtime_error(solver_message(what, r, s, norm)), row(r), site(s), residual_norm(norm) {}

void PotentialParams::validate() const {
    if (!std::isfinite(r) || !std::isfinite(lambda) || !std::isfinite(r_tilde) ||
        !std::isfinite(lambda_tilde))
        throw ConfigError("potential coefficients must be finite");
    if (lambda < 0.0) throw ConfigError("lambda must be non-negative");
    if (lambda_tilde < 0.0) throw ConfigError("lambda_tilde must be non-negative");
}

double potential_value(double phi, const PotentialParams& p) {
    const double f2 = phi * phi;
    return 0.5 * p.r * f2 + 0.25 * p.lambda * f2 * f2;
}
double potential_deriv(double phi, const PotentialParams& p) {
    return phi * (p.r + p.lambda * phi * phi);
}
double potential_second_deriv(double phi, const PotentialParams& p) {
    return p.r + 3.0 * p.lambda * phi * phi;
}
double interaction_value(double phi, const PotentialParams& p) {
    const double f2 = phi * phi;
    return 0.25 * p.lambda * f2 * f2;
}
double interaction_deriv(double phi, const PotentialParams& p) { return p.lambda * phi * phi * phi; }

double aux_potential_value(double g, const PotentialParams& p) {
    const double g2 = g * g;
    return 0.5 * p.r_tilde * g2 + 0.25 * p.lambda_tilde * g2 * g2;
}
double aux_potential_deriv(double g, const PotentialParams& p) {
    return g * (p.r_tilde + p.lambda_tilde * g * g);
}
double aux_potential_second_deriv(double g, const PotentialParams& p) {
    return p.r_tilde + 3.0 * p.lambda_tilde * g * g;
}
double aux_interaction_value(double g, const PotentialParams& p) {
    const double g2 = g * g;
    return 0.25 * p.lambda_tilde * g2 * g2;
}
double aux_interaction_deriv(double g, const PotentialParams& p) {
    return p.lambda_tilde * g * g * g;
}

GridSpec GridSpec::aligned(std::size_t n, double length) {
    GridSpec g{LatticeFamily::aligned, n, n > 0 ? length / static_cast<double>(n) : 0.0, length};
    g.validate();
    return g;
}

GridSpec GridSpec::lightcone(std::size_t n, double length) {
    GridSpec g{LatticeFamily::lightcone, n,
               n > 0 ? length / (sqrt2 * static_cast<double>(n)) : 0.0, length};
    g.validate();
    return g;
}

void GridSpec::validate() const {
    if (!(length > 0.0) || !std::isfinite(length)) throw ConfigError("length must be positive");
    if (!(delta > 0.0)) throw ConfigError("spacing must be positive");
    if (n_sites < 4) throw ConfigError("at least 4 sites are required");
    const double n = static_cast<double>(n_sites);
    if (family == LatticeFamily::lightcone) {
        if (n_sites % 2 != 0) throw ConfigError("light-cone lattice needs an even site count");
        if (std::abs(sqrt2 * n * delta - length) > 1e-12 * length)
            throw ConfigError("light-cone lattice requires L = sqrt(2) N delta");
    } else if (std::abs(n * delta - length) > 1e-12 * length) {
        throw ConfigError("aligned lattice requires L = N delta");
    }
}

double GridSpec::row_time(long n) const {
    const double dn = static_cast<double>(n);
    return family == LatticeFamily::aligned ? dn * delta : dn * delta / sqrt2;
}

double GridSpec::site_position(long n, std::size_t j) const {
    const double dj = static_cast<double>(j);
    if (family == LatticeFamily::aligned) return dj * delta;
    return sqrt2 * delta * (dj - 0.25 * (1.0 + row_parity(n)));
}

InitialData InitialData::sine(double a, double length) {
    const double k = 2.0 * pi / length;
    return {[a, k](double x) { return a * std::sin(k * x); }, [](double) { return 0.0; },
            [a, k](double x) { return -a * k * k * std::sin(k * x); }};
}

InitialData InitialData::homogeneous(double a) {
    return {[a](double) { return a; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
}

std::pair<double, double> initial_condition_sine(double a, double length, double x) {
    if (!(length > 0.0)) throw ConfigError("length must be positive");
    return {a * std::sin(2.0 * pi * x / length), 0.0};
}

double exact_initial_energy(double a, double length, const PotentialParams& p) {
    if (!(length > 0.0)) throw ConfigError("length must be positive");
    const double a2 = a * a;
    return a2 * pi * pi / length + p.r * a2 * length / 4.0 + 3.0 * p.lambda * a2 * a2 * length / 32.0;
}

std::pair<double, double> lightcone_map(double x0, double x1) {
    const double c0 = (x0 - x1) / sqrt2;
    return {c0, sqrt2 * x1 + c0};
}

std::pair<double, double> lightcone_unmap(double c0, double c1) {
    return {(c0 + c1) / sqrt2, (c1 - c0) / sqrt2};
}

std::pair<Mat4, Mat4> dwh_matrices_1p1() {
    const Mat4 m0{{{0, -1, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, 1}, {0, 0, -1, 0}}};
    const Mat4 m1{{{0, 0, -1, 0}, {0, 0, 0, 1}, {1, 0, 0, 0}, {0, -1, 0, 0}}};
    return {m0, m1};
}

std::pair<Mat4, Mat4> dwh_matrices_lightcone() {
    const auto [m0, m1] = dwh_matrices_1p1();
    Mat4 a{}, b{};
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k) {
            a[i][k] = (m0[i][k] - m1[i][k]) / sqrt2;
            b[i][k] = (m0[i][k] + m1[i][k]) / sqrt2;
        }
    return {a, b};
}

double hamiltonian_density(const Vec4& z, const PotentialParams& p) {
    return 0.5 * z[1] * z[1] - 0.5 * z[2] * z[2] + potential_value(z[0], p) +
           aux_potential_value(z[3], p);
}

Vec4 hamiltonian_gradient(const Vec4& z, const PotentialParams& p) {
    return {potential_deriv(z[0], p), z[1], -z[2], aux_potential_deriv(z[3], p)};
}

double hamiltonian_interaction(const Vec4& z, const PotentialParams& p) {
    return interaction_value(z[0], p) + aux_interaction_value(z[3], p);
}

Vec4 hamiltonian_interaction_gradient(const Vec4& z, const PotentialParams& p) {
    return {interaction_deriv(z[0], p), 0.0, 0.0, aux_interaction_deriv(z[3], p)};
}

double continuum_residual(double phi, double d2t, double d2x, const PotentialParams& p) {
    return d2t - d2x + potential_deriv(phi, p);
}

}  // namespace phi4
