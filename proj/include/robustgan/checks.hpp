#ifndef ROBUSTGAN_CHECKS_HPP
#define ROBUSTGAN_CHECKS_HPP

#include <cstdint>
#include <string>
#include <vector>

namespace robustgan {

struct CheckResult {
    std::string name;
    bool pass;
    std::string detail;
};

// Outer-objective theta-gradients against central finite differences on
// random off-knot instances, for every objective x transform x penalty
// combination (plus the two-objective gradient path).
std::vector<CheckResult> check_gradients(std::uint64_t seed = 20240801, int instances = 50,
                                         double tol = 1e-4);

// Variational bounds: K_f equals D_f at the log density ratio and stays below
// D_f for random spline discriminators; the hinge objective equals 2 TV at
// the density-sign discriminator and stays below 2 TV.
std::vector<CheckResult> check_bounds(std::uint64_t seed = 20240802, int n_splines = 20);

// Divergence-family verdicts against the expected check-mark matrix.
std::vector<CheckResult> check_assumptions();

// Inner-solver properties on randomized instances: concavity witness,
// monotone ascent of the recorded objective, and first-order optimality
// residual at the returned coefficients.
std::vector<CheckResult> check_solver(std::uint64_t seed = 20240803, int instances = 100);

std::vector<CheckResult> check_all();

bool all_pass(const std::vector<CheckResult>& results);

}  // namespace robustgan

#endif
