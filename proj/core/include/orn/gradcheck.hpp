#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "orn/params.hpp"

namespace orn {

struct GradCheckOptions {
  double eps = 1e-5;
  // Five-point stencil (8 (f(x+h) - f(x-h)) - (f(x+2h) - f(x-2h))) / 12h.
  bool fourth_order = false;
  // Probe at most this many coordinates per tensor (evenly strided); 0 = all.
  std::size_t max_coords_per_tensor = 0;
  // Halve the step of a coordinate up to this many times while a probe flips
  // a ReLU on or off; a coordinate that still flips is skipped.
  std::size_t max_halvings = 12;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coordinates = 0;  // compared
  std::size_t halved = 0;       // compared with a reduced step
  std::size_t skipped = 0;      // at a ReLU kink at every step tried
};

// A scalar-valued composite built from bound parameters. It must be
// deterministic: it is re-evaluated for every probe.
using ScalarFn = std::function<ad::Var<double>(Bindings<double>&)>;

// Compares analytic gradients with central differences
// (f(x+eps) - f(x-eps)) / (2 eps) per coordinate, in 64-bit. A difference is
// only used when every probe keeps the ReLU activation pattern of the base
// point, i.e. the function is smooth on the probed interval. The error of a
// coordinate is |ga - gn| / max(1e-8, |ga| + |gn|); the maximum is reported.
// Non-finite probes raise NumericError naming the coordinate.
GradCheckReport check_gradients(const ScalarFn& f, ParamStore<double>& params, const GradCheckOptions& options = {});

}  // namespace orn
