#pragma once

#include <utility>

#include "phi4/model.hpp"

namespace phi4 {

// Energy-conserving explicit scheme on the light-cone lattice.
struct BddvState {
    ScalarRows rows;
    GridSpec grid;
    PotentialParams p;
    double overflow = 1e6;
};

BddvState bddv_init(double amplitude, const GridSpec& grid, const PotentialParams& p);
BddvState bddv_init(const InitialData& data, const GridSpec& grid, const PotentialParams& p);

BddvState bddv_step(const BddvState& state);

// 1 + delta^2 (2r + lambda (a^2 + b^2)) / 8
double bddv_denominator(double a, double b, double delta, const PotentialParams& p);

// R for the cell with sides (n, j), (n, j + sigma_n); sigma is the parity of curr
double bddv_residual_R(const Row& prev, const Row& curr, const Row& next, std::size_t j, int sigma,
                       double delta, const PotentialParams& p);

enum class Branch { plus, minus };

// (D0, D1) light-cone differences of the cell (n, j); plus uses next, minus uses prev
std::pair<double, double> bddv_lightcone_derivs(const Row& prev, const Row& curr, const Row& next,
                                                std::size_t j, int sigma, double delta,
                                                Branch branch);

}  // namespace phi4
