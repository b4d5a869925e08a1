#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

namespace phi4 {

struct SolverSettings {
    double tol_residual = 1e-12;
    int max_iter = 50;
    double lm_damping_init = 1e-3;

    void validate() const;
};

enum class LmStatus { converged, max_iterations, singular_normal_equations };

template <std::size_t N>
using VecN = std::array<double, N>;
template <std::size_t N>
using MatN = std::array<std::array<double, N>, N>;

template <std::size_t N>
struct LmProblem {
    std::function<VecN<N>(const VecN<N>&)> residual;
    std::function<MatN<N>(const VecN<N>&)> jacobian;
    // Residuals below this level are treated as converged; lets callers
    // account for rounding in residuals built from large terms.
    double noise_floor = 0.0;
};

template <std::size_t N>
struct LmResult {
    VecN<N> x{};
    int iterations = 0;
    double final_norm = 0.0;  // infinity norm
    LmStatus status = LmStatus::converged;
    std::vector<double> norm_history;  // ||r||_2 per accepted iterate, only when requested
};

template <std::size_t N>
double norm_inf(const VecN<N>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

template <std::size_t N>
double norm2_sq(const VecN<N>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

// Gaussian elimination with partial pivoting.
template <std::size_t N>
std::optional<VecN<N>> solve_linear(MatN<N> a, VecN<N> b) {
    double scale = 0.0;
    for (const auto& row : a)
        for (double v : row) scale = std::max(scale, std::abs(v));
    if (!(scale > 0.0) || !std::isfinite(scale)) return std::nullopt;
    const double tiny = scale * 1e-14;
    for (std::size_t c = 0; c < N; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < N; ++r)
            if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
        if (std::abs(a[piv][c]) <= tiny) return std::nullopt;
        std::swap(a[c], a[piv]);
        std::swap(b[c], b[piv]);
        for (std::size_t r = c + 1; r < N; ++r) {
            const double f = a[r][c] / a[c][c];
            if (f == 0.0) continue;
            for (std::size_t k = c; k < N; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    VecN<N> x{};
    for (std::size_t i = N; i-- > 0;) {
        double s = b[i];
        for (std::size_t k = i + 1; k < N; ++k) s -= a[i][k] * x[k];
        x[i] = s / a[i][i];
    }
    return x;
}

// Each iteration first tries the undamped Gauss-Newton step; when it fails to
// reduce ||r||_2 the damped normal equations (J^T J + mu diag(J^T J)) dx = -J^T r
// are solved, with mu x10 on rejection and /10 on acceptance.
template <std::size_t N, class ResidualFn, class JacobianFn>
LmResult<N> lm_solve_with(ResidualFn&& residual, JacobianFn&& jacobian, VecN<N> x0,
                          const SolverSettings& s, double noise_floor = 0.0,
                          bool keep_history = false) {
    LmResult<N> out;
    const double tol = std::max(s.tol_residual, noise_floor);
    VecN<N> x = x0;
    VecN<N> r = residual(x);
    double f = norm2_sq(r);
    double mu = s.lm_damping_init;
    if (keep_history) out.norm_history.push_back(std::sqrt(f));

    auto finish = [&](LmStatus st) {
        out.x = x;
        out.final_norm = norm_inf(r);
        out.status = st;
        return out;
    };

    if (norm_inf(r) <= tol) return finish(LmStatus::converged);

    for (int it = 1; it <= s.max_iter; ++it) {
        out.iterations = it;
        const MatN<N> jac = jacobian(x);
        VecN<N> neg_r{};
        for (std::size_t i = 0; i < N; ++i) neg_r[i] = -r[i];

        bool accepted = false;
        if (auto dx = solve_linear<N>(jac, neg_r)) {
            VecN<N> xt{};
            for (std::size_t i = 0; i < N; ++i) xt[i] = x[i] + (*dx)[i];
            VecN<N> rt = residual(xt);
            const double ft = norm2_sq(rt);
            if (ft < f || norm_inf(rt) <= tol) {
                x = xt;
                r = rt;
                f = ft;
                accepted = true;
                mu = std::max(mu / 10.0, 1e-12);
            }
        }

        if (!accepted) {
            MatN<N> jtj{};
            VecN<N> jtr{};
            for (std::size_t i = 0; i < N; ++i) {
                for (std::size_t k = 0; k < N; ++k) {
                    double acc = 0.0;
                    for (std::size_t m = 0; m < N; ++m) acc += jac[m][i] * jac[m][k];
                    jtj[i][k] = acc;
                }
                double acc = 0.0;
                for (std::size_t m = 0; m < N; ++m) acc += jac[m][i] * r[m];
                jtr[i] = -acc;
            }
            for (int attempt = 0; attempt < 30 && !accepted; ++attempt) {
                MatN<N> damped = jtj;
                for (std::size_t i = 0; i < N; ++i) {
                    const double d = jtj[i][i] > 0.0 ? jtj[i][i] : 1.0;
                    damped[i][i] += mu * d;
                }
                auto dx = solve_linear<N>(damped, jtr);
                if (!dx) {
                    if (keep_history) out.norm_history.push_back(std::sqrt(f));
                    return finish(LmStatus::singular_normal_equations);
                }
                VecN<N> xt{};
                for (std::size_t i = 0; i < N; ++i) xt[i] = x[i] + (*dx)[i];
                VecN<N> rt = residual(xt);
                const double ft = norm2_sq(rt);
                if (ft < f) {
                    x = xt;
                    r = rt;
                    f = ft;
                    accepted = true;
                    mu = std::max(mu / 10.0, 1e-12);
                } else {
                    mu *= 10.0;
                }
            }
            if (!accepted) {
                // no descent possible at this precision
                if (keep_history) out.norm_history.push_back(std::sqrt(f));
                return finish(norm_inf(r) <= tol ? LmStatus::converged : LmStatus::max_iterations);
            }
        }
        if (keep_history) out.norm_history.push_back(std::sqrt(f));
        if (norm_inf(r) <= tol) return finish(LmStatus::converged);
    }
    return finish(LmStatus::max_iterations);
}

template <std::size_t N>
LmResult<N> lm_solve(const LmProblem<N>& problem, const VecN<N>& x0, const SolverSettings& s,
                     bool keep_history = false) {
    return lm_solve_with<N>(problem.residual, problem.jacobian, x0, s, problem.noise_floor,
                            keep_history);
}

}  // namespace phi4
