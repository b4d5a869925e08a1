#include "phi4/nlsolve.hpp"

#include "phi4/model.hpp"

namespace phi4 {

void SolverSettings::validate() const {
    if (!(tol_residual > 0.0)) throw ConfigError("solver tolerance must be positive");
    if (max_iter < 1) throw ConfigError("solver max_iter must be at least 1");
    if (!(lm_damping_init > 0.0)) throw ConfigError("initial damping must be positive");
}

}  // namespace phi4
