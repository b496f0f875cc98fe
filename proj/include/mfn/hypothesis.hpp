#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mfn/grid.hpp"
#include "mfn/model.hpp"
#include "mfn/segment.hpp"
#include "mfn/spatial.hpp"

namespace mfn {

// One audited inequality. Violations are normalized (LHS - RHS) / scale with
// a positive scale, so <= 0 means the condition held on every sample.
struct ConditionReport {
  std::string name;
  double max_violation = 0.0;
  double mc_se = 0.0;  // standard error of Monte Carlo jump moments, if used
  std::string worst_sample;
};

struct CheckReport {
  std::vector<ConditionReport> conditions;
  int trials = 0;

  double max_violation() const {
    double m = -1e300;
    for (const auto& c : conditions) m = std::max(m, c.max_violation);
    return conditions.empty() ? 0.0 : m;
  }
  bool satisfied() const { return max_violation() <= 0.0; }
};

struct CheckerOptions {
  int trials = 10000;
  uint64_t seed = 0;
  double state_spread = 2.0;    // sd of sampled states/segments
  double horizon = 1.0;         // sampled t ~ U(0, horizon)
  int mc_mark_draws = 256;      // fallback sample size for jump moments
  DisorderSpec disorder;        // per-trial disorder draws
  std::optional<DelayMeasure> delay_measure;  // overrides the model's lambda
};

// Difference-form conditions: local monotonicity against L, synaptic
// Lipschitz against Lbar (when the model has coupling).
CheckReport check_monotonicity(const ModelPtr& model, const TimeGrid& grid,
                               const SpatialLayout& layout, const CheckerOptions& opts);

// Single-point conditions: local growth against K, synaptic growth against
// Kbar (when the model has coupling).
CheckReport check_growth(const ModelPtr& model, const TimeGrid& grid, const SpatialLayout& layout,
                         const CheckerOptions& opts);

}  // namespace mfn
