#pragma once

#include "mfn/model.hpp"

namespace mfn::testing {

// Scalar electrical coupling theta = y(0-) - x, no local dynamics, no noise.
// Separability deliberately not declared: exercises the direct pairwise sum.
class MeanShiftModel : public Model {
 public:
  std::string id() const override { return "toy-mean-shift"; }
  ModelDims dims() const override { return {1, 1, 1}; }
  void drift(double, const Site&, const double*, const Disorder&, Vec& out) const override {
    out.set_zero();
  }
  bool has_coupling() const override { return true; }
  void coupling_drift(double, const Site&, const Site&, const double* x, const SegmentView& y,
                      const Disorder&, Vec& out) const override {
    out[0] = y.newest()[0] - x[0];
  }
  RateSet declared_rates(const Disorder&) const override {
    RateSet r;
    r.Kbar = PiecewiseRate::constant(4.0);
    r.Lbar = PiecewiseRate::constant(4.0);
    return r;
  }
  void sample_initial_path(int, const TimeGrid& grid, CounterRng&, double* rows) const override {
    for (int j = 0; j <= grid.steps_per_delay; ++j) rows[j] = init_value;
  }
  double initial_sup_second_moment() const override { return init_value * init_value; }

  double init_value = 1.0;
};

// theta = y(-tau): pulls in the delayed presynaptic value, nothing else.
class DelayedValueModel : public Model {
 public:
  std::string id() const override { return "toy-delayed-value"; }
  ModelDims dims() const override { return {1, 1, 1}; }
  void drift(double, const Site&, const double*, const Disorder&, Vec& out) const override {
    out.set_zero();
  }
  bool has_coupling() const override { return true; }
  void coupling_drift(double, const Site&, const Site&, const double*, const SegmentView& y,
                      const Disorder&, Vec& out) const override {
    out[0] = y.oldest()[0];
  }
  RateSet declared_rates(const Disorder&) const override {
    RateSet r;
    r.Kbar = PiecewiseRate::constant(2.0);
    r.Lbar = PiecewiseRate::constant(2.0);
    return r;
  }
  void sample_initial_path(int, const TimeGrid& grid, CounterRng&, double* rows) const override {
    for (int j = 0; j <= grid.steps_per_delay; ++j) rows[j] = init_value;
  }
  double initial_sup_second_moment() const override { return init_value * init_value; }

  double init_value = 0.0;
};

// Mean-field fixed point probe: theta = y(0-) - x with expectation averaging.
// Same functional as MeanShiftModel but with the separable fast path, so the
// two evaluation routes can be compared on a model other than the neuron one.
class SeparableMeanShiftModel : public MeanShiftModel {
 public:
  std::string id() const override { return "toy-mean-shift-separable"; }
  bool coupling_separable() const override { return true; }
  int coupling_stat_dim() const override { return 1; }
  void coupling_stat(double, const Site&, const SegmentView& y, const Disorder&,
                     double* out) const override {
    out[0] = y.newest()[0];
  }
  void coupling_drift_at(double, const Site&, int, int, const double* x, const double* stat,
                         const Disorder&, Vec& out) const override {
    out[0] = stat[0] - x[0];
  }
};

}  // namespace mfn::testing
