#pragma once

// Self-verification suite: quadrature identity checks, dominance checks,
// unbiasedness, equivariance fuzz, and Monte Carlo cross-validation. Every
// check is a true invariant of the implementation (a fresh build passes);
// each reports its worst numeric residual against a pinned tolerance.

#include <string>
#include <vector>

namespace dtl {

struct CheckResult {
  std::string name;
  bool pass = false;
  double residual = 0.0;   // worst observed |error|
  double tolerance = 0.0;  // pinned acceptance bound
  std::string details;
};

// Runs all checks; deterministic. The full suite takes on the order of a
// minute single-threaded.
std::vector<CheckResult> run_verification();

}  // namespace dtl
