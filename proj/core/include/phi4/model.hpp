#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace phi4 {

using Row = std::vector<double>;
using Vec4 = std::array<double, 4>;
using Mat4 = std::array<std::array<double, 4>, 4>;

// Thrown for invalid parameters, grids or configurations.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class DivergenceError : public std::runtime_error {
public:
    DivergenceError(long row, std::size_t site, double value);
    long row;
    std::size_t site;
    double value;
};

class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, long row, std::size_t site, double residual_norm);
    long row;
    std::size_t site;
    double residual_norm;
};

// V(phi) = r/2 phi^2 + lambda/4 phi^4, and the same form for the auxiliary
// potential of gamma with (r_tilde, lambda_tilde).
struct PotentialParams {
    double r = 1.0;
    double lambda = 1.0;
    double r_tilde = 0.0;
    double lambda_tilde = 0.0;

    void validate() const;
};

double potential_value(double phi, const PotentialParams& p);
double potential_deriv(double phi, const PotentialParams& p);
double potential_second_deriv(double phi, const PotentialParams& p);
// lambda/4 phi^4, the non-quadratic part of V
double interaction_value(double phi, const PotentialParams& p);
double interaction_deriv(double phi, const PotentialParams& p);

double aux_potential_value(double gamma, const PotentialParams& p);
double aux_potential_deriv(double gamma, const PotentialParams& p);
double aux_potential_second_deriv(double gamma, const PotentialParams& p);
double aux_interaction_value(double gamma, const PotentialParams& p);
double aux_interaction_deriv(double gamma, const PotentialParams& p);

enum class LatticeFamily { aligned, lightcone };

struct GridSpec {
    LatticeFamily family = LatticeFamily::aligned;
    std::size_t n_sites = 0;
    double delta = 0.0;
    double length = 0.0;

    // aligned: L = N delta. lightcone: L = sqrt(2) N delta.
    static GridSpec aligned(std::size_t n, double length);
    static GridSpec lightcone(std::size_t n, double length);

    void validate() const;
    // time of row n
    double row_time(long n) const;
    // position of site j on row n (lightcone odd rows sit half a cell to the left)
    double site_position(long n, std::size_t j) const;
};

// sigma_n = 2 (n mod 2) - 1
inline int row_parity(long n) { return (n % 2 != 0) ? 1 : -1; }

inline std::size_t wrap(long j, std::size_t n) {
    const long m = static_cast<long>(n);
    long r = j % m;
    return static_cast<std::size_t>(r < 0 ? r + m : r);
}

struct InitialData {
    std::function<double(double)> phi;
    std::function<double(double)> dphi_dt;
    std::function<double(double)> phi_xx;

    static InitialData sine(double amplitude, double length);
    static InitialData homogeneous(double amplitude);
};

std::pair<double, double> initial_condition_sine(double amplitude, double length, double x);

double exact_initial_energy(double amplitude, double length, const PotentialParams& p);

std::pair<double, double> lightcone_map(double x0, double x1);
std::pair<double, double> lightcone_unmap(double xc0, double xc1);

// Field ordering (phi, psi0, psi1, gamma).
std::pair<Mat4, Mat4> dwh_matrices_1p1();
// M_check^0 = (M0 - M1)/sqrt2, M_check^1 = (M0 + M1)/sqrt2
std::pair<Mat4, Mat4> dwh_matrices_lightcone();

// H = psi0^2/2 - psi1^2/2 + V(phi) + Vt(gamma)
double hamiltonian_density(const Vec4& z, const PotentialParams& p);
Vec4 hamiltonian_gradient(const Vec4& z, const PotentialParams& p);
// lambda/4 phi^4 + lambda_tilde/4 gamma^4
double hamiltonian_interaction(const Vec4& z, const PotentialParams& p);
Vec4 hamiltonian_interaction_gradient(const Vec4& z, const PotentialParams& p);

double continuum_residual(double phi, double d2phi_dt2, double d2phi_dx2, const PotentialParams& p);

struct ScalarRows {
    Row prev;
    Row curr;
    long time_index = 1;  // index of curr
    int parity() const { return row_parity(time_index); }
};

struct ZetaRow {
    Row phi, psi0, psi1, gamma;
    long time_index = 0;

    explicit ZetaRow(std::size_t n = 0, long index = 0)
        : phi(n, 0.0), psi0(n, 0.0), psi1(n, 0.0), gamma(n, 0.0), time_index(index) {}

    std::size_t size() const { return phi.size(); }
    int parity() const { return row_parity(time_index); }
    Vec4 at(std::size_t j) const { return {phi[j], psi0[j], psi1[j], gamma[j]}; }
    void set(std::size_t j, const Vec4& z) {
        phi[j] = z[0];
        psi0[j] = z[1];
        psi1[j] = z[2];
        gamma[j] = z[3];
    }
};

}  // namespace phi4
