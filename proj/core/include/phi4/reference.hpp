#pragma once

#include <utility>

#include "phi4/model.hpp"

namespace phi4 {

// Spatially homogeneous oscillation phi(t) = A cn(omega t, k).
struct CnSolution {
    double amplitude = 0.0;
    double omega = 0.0;
    double modulus = 0.0;  // k

    static CnSolution make(double amplitude, const PotentialParams& p);
    double period() const;  // 4 K(k) / omega
};

// Complete elliptic integral of the first kind K(m), m = k^2.
double elliptic_k(double m);

// Jacobi cn(u | m) with parameter m = k^2, via AGM and descending Landen.
double jacobi_cn(double u, double m);
// cn, sn, dn together
struct JacobiTriple {
    double sn, cn, dn;
};
JacobiTriple jacobi_sncndn(double u, double m);

double cn_value(const CnSolution& sol, double t);
double cn_velocity(const CnSolution& sol, double t);

// phi'' = -V'(phi), integrated with an adaptive 7(8) Runge-Kutta-Fehlberg stepper.
std::pair<double, double> ode_oracle(double phi0, double dphi0, const PotentialParams& p, double t,
                                     double tol);

// A sin(kx) cos(wt), k = 2 pi / L, w^2 = k^2 + r: the lambda = 0 standing wave
double linear_mode(double amplitude, double length, double x, double t, double r = 0.0);

}  // namespace phi4
