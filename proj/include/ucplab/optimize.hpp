#pragma once

#include <functional>

namespace ucplab {

struct ScalarMinimum {
  double x = 0.0;
  double value = 0.0;
};

// Golden-section search for a minimum of f on [lo, hi]. Runs until the
// bracket shrinks to x_tol or to rounding level.
ScalarMinimum golden_section(const std::function<double(double)>& f, double lo,
                             double hi, double x_tol = 0.0, int max_iter = 200);

// Dense scan of `samples` equispaced points on [lo, hi], then golden-section
// refinement on the bracket around the best sample. Robust to kinks that
// would mislead a derivative-based method.
ScalarMinimum scan_and_refine(const std::function<double(double)>& f,
                              double lo, double hi, int samples = 1000);

}  // namespace ucplab
