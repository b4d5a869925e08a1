#include "phi4/reference.hpp"

#include <array>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <numbers>

namespace phi4 {

namespace {
constexpr double pi = std::numbers::pi;
constexpr int max_landen = 32;
}  // namespace

CnSolution CnSolution::make(double a, const PotentialParams& p) {
    const double w2 = p.r + p.lambda * a * a;
    if (!(w2 > 0.0)) throw ConfigError("cn solution needs r + lambda A^2 > 0");
    const double m = p.lambda * a * a / (2.0 * w2);
    if (m < 0.0 || m >= 1.0) throw ConfigError("cn modulus out of range");
    return {a, std::sqrt(w2), std::sqrt(m)};
}

double CnSolution::period() const {
    return 4.0 * elliptic_k(modulus * modulus) / omega;
}

double elliptic_k(double m) {
    if (m < 0.0 || m >= 1.0) throw ConfigError("elliptic parameter out of range");
    double a = 1.0, b = std::sqrt(1.0 - m);
    for (int i = 0; i < max_landen && std::abs(a - b) > 1e-16 * a; ++i) {
        const double an = 0.5 * (a + b);
        b = std::sqrt(a * b);
        a = an;
    }
    return pi / (2.0 * a);
}

JacobiTriple jacobi_sncndn(double u, double m) {
    if (m < 0.0 || m >= 1.0) throw ConfigError("elliptic parameter out of range");
    if (m == 0.0) return {std::sin(u), std::cos(u), 1.0};
    const double period = 4.0 * elliptic_k(m);
    u = std::fmod(u, period);
    if (u < 0.0) u += period;

    std::array<double, max_landen + 1> a{}, c{};
    a[0] = 1.0;
    double b = std::sqrt(1.0 - m);
    c[0] = std::sqrt(m);
    int n = 0;
    while (n < max_landen && std::abs(c[n]) > 1e-16) {
        a[n + 1] = 0.5 * (a[n] + b);
        c[n + 1] = 0.5 * (a[n] - b);
        b = std::sqrt(a[n] * b);
        ++n;
    }
    double phi = std::ldexp(a[n] * u, n);
    for (int i = n; i > 0; --i) phi = 0.5 * (phi + std::asin(c[i] / a[i] * std::sin(phi)));
    const double s = std::sin(phi), cc = std::cos(phi);
    return {s, cc, std::sqrt(1.0 - m * s * s)};
}

double jacobi_cn(double u, double m) { return jacobi_sncndn(u, m).cn; }

double cn_value(const CnSolution& sol, double t) {
    return sol.amplitude * jacobi_cn(sol.omega * t, sol.modulus * sol.modulus);
}

double cn_velocity(const CnSolution& sol, double t) {
    const auto j = jacobi_sncndn(sol.omega * t, sol.modulus * sol.modulus);
    return -sol.amplitude * sol.omega * j.sn * j.dn;
}

std::pair<double, double> ode_oracle(double phi0, double dphi0, const PotentialParams& p,
                                     double t, double tol) {
    namespace odeint = boost::numeric::odeint;
    if (!(tol > 0.0)) throw ConfigError("ode tolerance must be positive");
    using State = std::array<double, 2>;
    State y{phi0, dphi0};
    if (t == 0.0) return {phi0, dphi0};
    auto rhs = [&p](const State& s, State& ds, double) {
        ds[0] = s[1];
        ds[1] = -potential_deriv(s[0], p);
    };
    auto stepper =
        odeint::make_controlled(tol, tol, odeint::runge_kutta_fehlberg78<State>());
    const double h0 = (t > 0 ? 1.0 : -1.0) * std::min(1e-3, std::abs(t));
    try {
        odeint::integrate_adaptive(stepper, rhs, y, 0.0, t, h0);
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("ode oracle step-size failure: ") + e.what());
    }
    return {y[0], y[1]};
}

double linear_mode(double a, double length, double x, double t, double r) {
    const double k = 2.0 * pi / length;
    const double w2 = k * k + r;
    if (w2 < 0.0) throw ConfigError("linear mode needs k^2 + r >= 0");
    return a * std::sin(k * x) * std::cos(std::sqrt(w2) * t);
}

}  // namespace phi4
