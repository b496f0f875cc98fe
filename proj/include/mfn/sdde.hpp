#pragma once

#include <functional>
#include <vector>

#include "mfn/errors.hpp"
#include "mfn/grid.hpp"
#include "mfn/model.hpp"
#include "mfn/noise.hpp"
#include "mfn/parallel.hpp"
#include "mfn/segment.hpp"
#include "mfn/stats.hpp"

namespace mfn {

// Full grid trajectory of one path: rows 0..num_steps, row i at time
// -tau + i*dt.
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(const TimeGrid& grid, int dim)
      : dim_(dim), rows_(grid.rows()), data_(static_cast<size_t>(grid.rows()) * dim, 0.0) {}

  int dim() const { return dim_; }
  int rows() const { return rows_; }
  double* row(int i) { return data_.data() + static_cast<size_t>(i) * dim_; }
  const double* row(int i) const { return data_.data() + static_cast<size_t>(i) * dim_; }
  const std::vector<double>& data() const { return data_; }

  // Segment of the delay window ending at row i (rows i-n .. i).
  SegmentView segment_ending_at(int i, const TimeGrid& grid) const {
    return SegmentView(row(i - grid.steps_per_delay), dim_, grid.steps_per_delay + 1);
  }

 private:
  int dim_ = 0;
  int rows_ = 0;
  std::vector<double> data_;
};

// Generalized coefficient triple of the single-path engine: drift, diffusion
// and jump integrand all act on the frozen delay segment. The compensator is
// the model-supplied integral of h against nu. Output arguments arrive
// zeroed; callbacks only need to write the nonzero entries.
struct SddeCoefficients {
  int state_dim = 1;
  int brownian_dim = 1;
  double nu_total = 0.0;
  std::function<void(double, const SegmentView&, Vec&)> f;
  std::function<void(double, const SegmentView&, Mat&)> g;                 // null = no diffusion
  std::function<void(double, const SegmentView&, double, Vec&)> h;         // null = no jumps
  std::function<void(double, const SegmentView&, Vec&)> h_compensator;
  std::function<double(CounterRng&)> sample_mark;  // null = marks all zero
};

// Adapter: a model's local dynamics, evaluated at the newest segment value,
// as a segment-form triple. Site and disorder are bound.
SddeCoefficients local_coefficients(const ModelPtr& model, Site site, Disorder disorder);

// Per-step noise bundle for one path. Tests drive euler_step with hand-built
// bundles (e.g. refined couplings); simulate_sdde derives them from keys.
struct StepNoise {
  Vec dW;
  std::vector<JumpEvent> jumps;
};

// Ring-buffered integration state holding exactly the delay window.
class SddeState {
 public:
  SddeState() = default;
  SddeState(const TimeGrid& grid, int dim, const double* initial_rows)
      : dim_(dim),
        window_(grid.steps_per_delay + 1),
        hist_(static_cast<size_t>(grid.steps_per_delay + 1) * dim),
        head_(0),
        step_index_(grid.time_zero_index()) {
    std::copy(initial_rows, initial_rows + hist_.size(), hist_.begin());
  }

  int dim() const { return dim_; }
  int step_index() const { return step_index_; }
  const double* current() const {
    int idx = head_ + window_ - 1;
    if (idx >= window_) idx -= window_;
    return hist_.data() + static_cast<size_t>(idx) * dim_;
  }
  SegmentView segment() const { return SegmentView(hist_.data(), dim_, window_, head_, window_); }

  void push(const Vec& next) {
    double* slot = hist_.data() + static_cast<size_t>(head_) * dim_;
    for (int k = 0; k < dim_; ++k) slot[k] = next[k];
    head_ = (head_ + 1 == window_) ? 0 : head_ + 1;
    ++step_index_;
  }

 private:
  int dim_ = 0;
  int window_ = 0;
  std::vector<double> hist_;
  int head_ = 0;
  int step_index_ = 0;
};

// The shared one-step Euler update. All engines funnel through this exact
// operation order so that reductions between them are bit-identical.
inline void euler_core_begin(const double* x, int d, Vec& next) { next.assign(x, d); }

inline void euler_core_finish(Vec& next, double r_guard, int unit, int step) {
  const double n2 = next.squared_norm();
  if (!(n2 <= r_guard * r_guard)) throw BlowUpError(unit, step, std::sqrt(n2));
}

// One explicit Euler step of the generalized triple. Throws BlowUpError when
// the updated state leaves the guard radius (or is non-finite).
SddeState euler_step(const SddeState& state, const SddeCoefficients& coeffs, const StepNoise& noise,
                     double t, double dt, double r_guard = 1e6);

struct SddePathSpec {
  uint64_t run_seed = 0;
  uint32_t particle = 0;
  uint32_t replica = 0;
  int population = 0;
  double r_guard = 1e6;
};

// Full-trajectory single-path run; a pure function of (inputs, keys).
Trajectory simulate_sdde(const SddeCoefficients& coeffs,
                         const std::function<void(CounterRng&, double*)>& initial_path,
                         const TimeGrid& grid, const SddePathSpec& spec);

// Convenience wrapper using the model's local dynamics and initial law.
Trajectory simulate_sdde(const ModelPtr& model, const TimeGrid& grid, const Site& site,
                         const Disorder& disorder, const SddePathSpec& spec);

// Streaming ensemble of independent paths: per-row power sums of each state
// component and of |X|^2. Paths are processed in fixed chunks and merged in
// chunk order, so results are independent of the thread count.
struct MomentSeries {
  int dim = 0;
  int rows = 0;
  std::vector<PowerSums> component;  // rows * dim
  std::vector<PowerSums> norm_sq;    // rows

  PowerSums& comp(int row, int k) { return component[static_cast<size_t>(row) * dim + k]; }
  const PowerSums& comp(int row, int k) const {
    return component[static_cast<size_t>(row) * dim + k];
  }
};

MomentSeries simulate_sdde_ensemble(const ModelPtr& model, const TimeGrid& grid, const Site& site,
                                    const Disorder& disorder, uint64_t run_seed, int num_paths,
                                    double r_guard = 1e6);

}  // namespace mfn
