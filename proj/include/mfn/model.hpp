#pragma once

#include <memory>
#include <optional>
#include <string>

#include "mfn/disorder.hpp"
#include "mfn/grid.hpp"
#include "mfn/philox.hpp"
#include "mfn/segment.hpp"
#include "mfn/spatial.hpp"
#include "mfn/vec.hpp"

namespace mfn {

struct ModelDims {
  int state = 1;         // d
  int brownian = 1;      // m, dimension of W^r
  int pop_brownian = 1;  // n_b, dimension of each B^{r,alpha}
};

// A compiled-in coefficient set: local dynamics (f, g, h with its analytic
// compensator), interaction functionals (theta, beta, eta with compensator),
// the jump mark law, the delay measure, declared hypothesis rates, and the
// initial law. Engines never see model internals, only this surface.
class Model {
 public:
  virtual ~Model() = default;

  virtual std::string id() const = 0;
  virtual ModelDims dims() const = 0;

  // Total jump intensity nu(U) of each Poisson measure; marks are drawn from
  // the normalized law nu/nu(U).
  virtual double jump_intensity() const { return 0.0; }
  virtual double sample_mark(CounterRng&) const { return 0.0; }

  // --- local dynamics ------------------------------------------------------
  virtual void drift(double t, const Site& site, const double* x, const Disorder& w,
                     Vec& out) const = 0;
  virtual void diffusion(double /*t*/, const Site&, const double* /*x*/, const Disorder&,
                         Mat& out) const {
    out.set_zero();
  }
  virtual bool has_local_jumps() const { return false; }
  virtual void jump(double /*t*/, const Site&, const double* /*x*/, const Disorder&,
                    double /*mark*/, Vec& out) const {
    out.set_zero();
  }
  virtual void jump_compensator(double /*t*/, const Site&, const double* /*x*/, const Disorder&,
                                Vec& out) const {
    out.set_zero();
  }

  // --- interaction ---------------------------------------------------------
  virtual bool has_coupling() const { return false; }
  virtual bool has_coupling_jumps() const { return false; }
  virtual void coupling_drift(double /*t*/, const Site& /*receiver*/, const Site& /*source*/,
                              const double* /*x*/, const SegmentView& /*y*/, const Disorder&,
                              Vec& out) const {
    out.set_zero();
  }
  virtual void coupling_diffusion(double /*t*/, const Site&, const Site&, const double* /*x*/,
                                  const SegmentView&, const Disorder&, Mat& out) const {
    out.set_zero();
  }
  virtual void coupling_jump(double /*t*/, const Site&, const Site&, const double* /*x*/,
                             const SegmentView&, const Disorder&, double /*mark*/, Vec& out) const {
    out.set_zero();
  }
  virtual void coupling_jump_compensator(double /*t*/, const Site&, const Site&, const double* /*x*/,
                                         const SegmentView&, const Disorder&, Vec& out) const {
    out.set_zero();
  }

  // --- separable fast path -------------------------------------------------
  // Interaction functionals that are affine in a low-dimensional per-source
  // statistic with coefficients constant per cell pair may declare
  // separability; engines then aggregate the statistic per cell and evaluate
  // the *_at forms at the cell mean, which is exact up to float rounding.
  virtual bool coupling_separable() const { return false; }
  virtual int coupling_stat_dim() const { return 0; }
  virtual void coupling_stat(double /*t*/, const Site& /*source*/, const SegmentView& /*y*/,
                             const Disorder&, double* /*out*/) const {}
  virtual void coupling_drift_at(double /*t*/, const Site& /*receiver*/, int /*src_pop*/,
                                 int /*src_cell*/, const double* /*x*/, const double* /*stat*/,
                                 const Disorder&, Vec& out) const {
    out.set_zero();
  }
  virtual void coupling_diffusion_at(double /*t*/, const Site&, int, int, const double* /*x*/,
                                     const double* /*stat*/, const Disorder&, Mat& out) const {
    out.set_zero();
  }
  virtual void coupling_jump_at(double /*t*/, const Site&, int, int, const double* /*x*/,
                                const double* /*stat*/, const Disorder&, double /*mark*/,
                                Vec& out) const {
    out.set_zero();
  }
  virtual void coupling_jump_compensator_at(double /*t*/, const Site&, int, int, const double* /*x*/,
                                            const double* /*stat*/, const Disorder&,
                                            Vec& out) const {
    out.set_zero();
  }

  // --- hypotheses ----------------------------------------------------------
  virtual DelayMeasure delay_measure(double /*tau*/) const { return DelayMeasure::point(0.0); }
  virtual RateSet declared_rates(const Disorder& w) const = 0;
  // Growth rate for the segment-form condition of the single-path engine;
  // models whose delay measure lacks the needed mass at 0 return nullopt.
  virtual std::optional<PiecewiseRate> appendix_growth_rate(const Disorder&) const {
    return std::nullopt;
  }

  // Analytic jump second moments (checkers fall back to Monte Carlo when
  // these return nullopt).
  virtual std::optional<double> local_jump_sq(double /*t*/, const Site&, const double* /*x*/,
                                              const Disorder&) const {
    return has_local_jumps() ? std::optional<double>() : std::optional<double>(0.0);
  }
  virtual std::optional<double> local_jump_sq_diff(double /*t*/, const Site&, const double* /*x*/,
                                                   const double* /*y*/, const Disorder&) const {
    return has_local_jumps() ? std::optional<double>() : std::optional<double>(0.0);
  }
  virtual std::optional<double> coupling_jump_sq(double /*t*/, const Site&, const Site&,
                                                 const double* /*x*/, const SegmentView&,
                                                 const Disorder&) const {
    return has_coupling_jumps() ? std::optional<double>() : std::optional<double>(0.0);
  }
  virtual std::optional<double> coupling_jump_sq_diff(double /*t*/, const Site&, const Site&,
                                                      const double* /*x1*/, const SegmentView&,
                                                      const double* /*x2*/, const SegmentView&,
                                                      const Disorder&) const {
    return has_coupling_jumps() ? std::optional<double>() : std::optional<double>(0.0);
  }

  // --- initial law ---------------------------------------------------------
  // Fills rows 0..n (the window [-tau, 0]) with one draw of z-hat^alpha.
  virtual void sample_initial_path(int population, const TimeGrid& grid, CounterRng& rng,
                                   double* rows) const = 0;
  // sup over u in [-tau,0] and populations of E|z-hat(u)|^2.
  virtual double initial_sup_second_moment() const = 0;

  // --- spatial regularity metadata ------------------------------------------
  // True when coefficients are constant within every refinement cell; the
  // convergence study may then share mean-field representatives across N.
  virtual bool cellwise_constant() const { return true; }
  // Declared epsilon of the cell partition (0 when cellwise constant).
  virtual double cell_epsilon() const { return 0.0; }
};

using ModelPtr = std::shared_ptr<const Model>;

}  // namespace mfn
