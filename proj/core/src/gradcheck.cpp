#include "orn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <string_view>

namespace orn {

namespace {

struct Probe {
  double value = 0.0;
  std::vector<bool> active;  // ReLU outputs > 0, in graph order
};

Probe evaluate(const ScalarFn& f, const ParamStore<double>& params) {
  ad::Graph<double> graph(false);
  Bindings<double> bound(graph, params);
  Probe out;
  out.value = f(bound).item();
  for (std::size_t i = 0; i < graph.size(); ++i) {
    const auto& node = graph.node(i);
    if (std::string_view(node.op) != "relu") continue;
    for (double v : node.value.data()) out.active.push_back(v > 0.0);
  }
  return out;
}

}  // namespace

GradCheckReport check_gradients(const ScalarFn& f, ParamStore<double>& params, const GradCheckOptions& options) {
  ParamStore<double> analytic;
  {
    ad::Graph<double> graph;
    Bindings<double> bound(graph, params);
    auto out = f(bound);
    graph.backward(out);
    analytic = bound.gradients();
  }

  const Probe base = evaluate(f, params);
  GradCheckReport report;
  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor<double>& value = params.value(p);
    const std::size_t n = value.size();
    std::size_t step = 1;
    if (options.max_coords_per_tensor != 0 && n > options.max_coords_per_tensor) {
      step = (n + options.max_coords_per_tensor - 1) / options.max_coords_per_tensor;
    }
    for (std::size_t i = 0; i < n; i += step) {
      const double saved = value[i];
      bool smooth = true;
      auto probe = [&](double offset) {
        value[i] = saved + offset;
        const auto y = evaluate(f, params);
        if (!std::isfinite(y.value)) {
          value[i] = saved;
          throw NumericError("non-finite value probing " + params.name(p) + "[" + std::to_string(i) + "]");
        }
        if (y.active != base.active) smooth = false;
        return y.value;
      };
      double h = options.eps, numeric = 0.0;
      std::size_t halvings = 0;
      for (;; ++halvings, h *= 0.5) {
        smooth = true;
        const double d1 = probe(h) - probe(-h);
        numeric = d1 / (2.0 * h);
        if (options.fourth_order) numeric = (8.0 * d1 - (probe(2.0 * h) - probe(-2.0 * h))) / (12.0 * h);
        if (smooth || halvings == options.max_halvings) break;
      }
      value[i] = saved;
      if (!smooth) {
        ++report.skipped;
        continue;
      }
      if (halvings > 0) ++report.halved;
      const double ga = analytic.value(p)[i];
      const double err = std::abs(ga - numeric) / std::max(1e-8, std::abs(ga) + std::abs(numeric));
      ++report.coordinates;
      if (err > report.max_rel_error || report.worst_param.empty()) {
        report.max_rel_error = err;
        report.worst_param = params.name(p);
        report.worst_index = i;
        report.worst_analytic = ga;
        report.worst_numeric = numeric;
      }
    }
  }
  return report;
}

}  // namespace orn
