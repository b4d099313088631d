#pragma once

// Finite-difference checks of the analytic gradients, shared by the CLI and
// the test suites.

#include "edmp/chain.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace edmp::gradcheck {

struct SuiteResult {
  std::string name;
  int cases = 0;
  int failures = 0;
  double max_rel_err = 0.0;
  double tol = 0.0;

  bool passed() const { return failures == 0; }
};

// Relative error ||a - b|| / max(||a||, ||b||); 0 when both vanish.
double relative_error(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

// Random trajectories with obstacles dropped onto the arm so most cases
// collide; clearance and expansion vary per case.
SuiteResult check_intersection(const chain::ChainSpec& chain, int cases, std::uint64_t seed, double tol = 1e-4);
SuiteResult check_swept(const chain::ChainSpec& chain, int cases, std::uint64_t seed, double tol = 1e-4);
// Denoiser loss gradient on a tiny random network.
SuiteResult check_denoiser(int cases, std::uint64_t seed, double tol = 1e-3);

std::vector<SuiteResult> run_all(const chain::ChainSpec& chain, int cases, std::uint64_t seed, double tol = 1e-4,
                                 double net_tol = 1e-3);

}  // namespace edmp::gradcheck
