#pragma once

#include <cstdint>

#include "thor/losses.hpp"

namespace thor {

struct GradcheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;   // relative error
  double kink_guard = 1e-3;  // pairs with a hinge or rectifier argument this close to 0 are skipped
  int pairs = 4;
  std::vector<int> hidden = {6, 5};
};

struct GradcheckResult {
  double max_rel_error = 0.0;
  size_t checked = 0;   // parameters compared
  size_t passed = 0;    // parameters within tolerance
  size_t excluded_pairs = 0;

  double pass_fraction() const { return checked ? static_cast<double>(passed) / static_cast<double>(checked) : 0.0; }
};

// |a - n| / max(|a|, |n|, 1e-6)
double relative_error(double analytic, double numeric);

// Compares the analytic parameter gradient of the method's mean pair loss,
// through a randomly initialised model, against central differences of the
// loss value.
GradcheckResult gradcheck_method(Method m, std::uint64_t seed, const GradcheckOptions& opt = {});

}  // namespace thor
