#pragma once

#include "phi4/model.hpp"

namespace phi4 {

// Explicit scheme on the aligned square lattice.
struct NewtonState {
    ScalarRows rows;
    GridSpec grid;
    PotentialParams p;
    double overflow = 1e6;
};

NewtonState newton_init(double amplitude, const GridSpec& grid, const PotentialParams& p);
NewtonState newton_init(const InitialData& data, const GridSpec& grid, const PotentialParams& p);

// spatial forward/backward differences with periodic wrap
double d_plus(const Row& row, std::size_t j, double delta);
double d_minus(const Row& row, std::size_t j, double delta);
// temporal forward/backward differences at site j
double time_d_plus(const Row& curr, const Row& next, std::size_t j, double delta);
double time_d_minus(const Row& prev, const Row& curr, std::size_t j, double delta);

NewtonState newton_step(const NewtonState& state);

// D0+ D0- phi - D1+ D1- phi + V'(phi) at row curr
double newton_eom_residual(const Row& prev, const Row& curr, const Row& next, std::size_t j,
                           double delta, const PotentialParams& p);

// throws DivergenceError if any entry is non-finite or above bound
void check_bounded(const Row& row, long index, double bound);

}  // namespace phi4
