#include "mfn/hypothesis.hpp"

#include <cmath>
#include <functional>
#include <sstream>

#include "mfn/noise.hpp"
#include "mfn/philox.hpp"
#include "mfn/segment.hpp"
#include "mfn/stats.hpp"

namespace mfn {

namespace {

struct TrialDraw {
  double t = 0.0;
  Site receiver;
  Site source;
  Vec x;
  Vec x2;
  PathBuffer seg1;
  PathBuffer seg2;
  Disorder disorder;
};

class TrialSampler {
 public:
  TrialSampler(const ModelPtr& model, const TimeGrid& grid, const SpatialLayout& layout,
               const CheckerOptions& opts)
      : model_(model), grid_(grid), layout_(layout), opts_(opts) {}

  TrialDraw draw(CounterRng& rng) const {
    TrialDraw d;
    const int dim = model_->dims().state;
    d.t = opts_.horizon * rng.next_unit();
    const auto& sites = layout_.sites();
    d.receiver = sites[static_cast<size_t>(rng.next_u32() % sites.size())];
    d.source = sites[static_cast<size_t>(rng.next_u32() % sites.size())];
    d.x.resize(dim);
    d.x2.resize(dim);
    for (int k = 0; k < dim; ++k) {
      d.x[k] = opts_.state_spread * rng.next_normal();
      d.x2[k] = opts_.state_spread * rng.next_normal();
    }
    d.seg1 = random_segment(rng, dim);
    d.seg2 = random_segment(rng, dim);
    d.disorder = opts_.disorder.sample(rng);
    return d;
  }

 private:
  PathBuffer random_segment(CounterRng& rng, int dim) const {
    PathBuffer b(dim, grid_.steps_per_delay + 1);
    for (int j = 0; j <= grid_.steps_per_delay; ++j)
      for (int k = 0; k < dim; ++k) b.row(j)[k] = opts_.state_spread * rng.next_normal();
    return b;
  }

  const ModelPtr& model_;
  const TimeGrid& grid_;
  const SpatialLayout& layout_;
  const CheckerOptions& opts_;
};

std::string describe(const TrialDraw& d) {
  std::ostringstream os;
  os << "t=" << d.t << " |x|=" << d.x.norm() << " |x2|=" << d.x2.norm();
  return os.str();
}

struct Tracker {
  double max_violation = -1e300;
  double mc_se = 0.0;
  std::string worst;

  void update(double v, double se, const TrialDraw& d) {
    mc_se = std::max(mc_se, se);
    if (v > max_violation) {
      max_violation = v;
      worst = describe(d);
    }
  }
  ConditionReport report(const std::string& name) const {
    return {name, max_violation, mc_se, worst};
  }
};

// Monte Carlo second moment of a jump integrand over the normalized mark
// law, scaled by nu(U). Returns {estimate, se}.
std::pair<double, double> mc_jump_sq(const ModelPtr& model, int draws, CounterRng& rng,
                                     const std::function<double(double)>& sq_of_mark) {
  PowerSums acc;
  for (int i = 0; i < draws; ++i) acc.add(sq_of_mark(model->sample_mark(rng)));
  const double nu = model->jump_intensity();
  return {nu * acc.mean(), nu * acc.se_mean()};
}

}  // namespace

CheckReport check_monotonicity(const ModelPtr& model, const TimeGrid& grid,
                               const SpatialLayout& layout, const CheckerOptions& opts) {
  TrialSampler sampler(model, grid, layout, opts);
  const int dim = model->dims().state;
  const ModelDims dims = model->dims();
  const DelayMeasure lambda =
      opts.delay_measure ? *opts.delay_measure : model->delay_measure(grid.tau);
  Tracker local, synaptic;

  for (int trial = 0; trial < opts.trials; ++trial) {
    CounterRng rng(mix_seed(opts.seed, 0xC0FFEEull, static_cast<uint64_t>(trial)), 0, 0, 0);
    TrialDraw d = sampler.draw(rng);
    const RateSet rates = model->declared_rates(d.disorder);

    // Local: 2<x-y, f(x)-f(y)> + |g(x)-g(y)|^2 + int |h(x)-h(y)|^2 dnu
    //        <= L_t |x-y|^2.
    {
      Vec fx(dim), fy(dim);
      model->drift(d.t, d.receiver, d.x.data(), d.disorder, fx);
      model->drift(d.t, d.receiver, d.x2.data(), d.disorder, fy);
      Mat gx(dim, dims.brownian), gy(dim, dims.brownian);
      model->diffusion(d.t, d.receiver, d.x.data(), d.disorder, gx);
      model->diffusion(d.t, d.receiver, d.x2.data(), d.disorder, gy);
      const Vec dx = d.x - d.x2;
      double lhs = 2.0 * dot(dx, fx - fy);
      Mat dg = gx;
      dg.axpy(-1.0, gy);
      lhs += dg.squared_frobenius();
      double se = 0.0;
      if (model->has_local_jumps()) {
        auto analytic = model->local_jump_sq_diff(d.t, d.receiver, d.x.data(), d.x2.data(), d.disorder);
        if (analytic) {
          lhs += *analytic;
        } else {
          Vec hx(dim), hy(dim);
          auto [est, e] = mc_jump_sq(model, opts.mc_mark_draws, rng, [&](double mark) {
            hx.set_zero();
            hy.set_zero();
            model->jump(d.t, d.receiver, d.x.data(), d.disorder, mark, hx);
            model->jump(d.t, d.receiver, d.x2.data(), d.disorder, mark, hy);
            return (hx - hy).squared_norm();
          });
          lhs += est;
          se = e;
        }
      }
      const double rhs = rates.L.at(d.t) * dx.squared_norm();
      local.update((lhs - rhs) / (1.0 + dx.squared_norm()), se, d);
    }

    // Synaptic: sum over theta,beta of squared differences + eta second
    // moment <= Lbar_t [ |x-x2|^2 + delay difference integral ].
    if (model->has_coupling()) {
      Vec th1(dim), th2(dim);
      model->coupling_drift(d.t, d.receiver, d.source, d.x.data(), d.seg1.view(), d.disorder, th1);
      model->coupling_drift(d.t, d.receiver, d.source, d.x2.data(), d.seg2.view(), d.disorder, th2);
      Mat b1(dim, dims.pop_brownian), b2(dim, dims.pop_brownian);
      model->coupling_diffusion(d.t, d.receiver, d.source, d.x.data(), d.seg1.view(), d.disorder, b1);
      model->coupling_diffusion(d.t, d.receiver, d.source, d.x2.data(), d.seg2.view(), d.disorder, b2);
      double lhs = (th1 - th2).squared_norm();
      b1.axpy(-1.0, b2);
      lhs += b1.squared_frobenius();
      double se = 0.0;
      if (model->has_coupling_jumps()) {
        auto analytic = model->coupling_jump_sq_diff(d.t, d.receiver, d.source, d.x.data(),
                                                     d.seg1.view(), d.x2.data(), d.seg2.view(),
                                                     d.disorder);
        if (analytic) {
          lhs += *analytic;
        } else {
          Vec e1(dim), e2(dim);
          auto [est, e] = mc_jump_sq(model, opts.mc_mark_draws, rng, [&](double mark) {
            e1.set_zero();
            e2.set_zero();
            model->coupling_jump(d.t, d.receiver, d.source, d.x.data(), d.seg1.view(), d.disorder,
                                 mark, e1);
            model->coupling_jump(d.t, d.receiver, d.source, d.x2.data(), d.seg2.view(), d.disorder,
                                 mark, e2);
            return (e1 - e2).squared_norm();
          });
          lhs += est;
          se = e;
        }
      }
      const SegmentView s1 = d.seg1.view();
      const SegmentView s2 = d.seg2.view();
      const double delay_term = delay_integral(s1, &s2, grid, lambda);
      const double base = (d.x - d.x2).squared_norm() + delay_term;
      const double rhs = rates.Lbar.at(d.t) * base;
      synaptic.update((lhs - rhs) / (1.0 + base), se, d);
    }
  }

  CheckReport report;
  report.trials = opts.trials;
  report.conditions.push_back(local.report("local-monotonicity"));
  if (model->has_coupling()) report.conditions.push_back(synaptic.report("synaptic-lipschitz"));
  return report;
}

CheckReport check_growth(const ModelPtr& model, const TimeGrid& grid, const SpatialLayout& layout,
                         const CheckerOptions& opts) {
  TrialSampler sampler(model, grid, layout, opts);
  const int dim = model->dims().state;
  const ModelDims dims = model->dims();
  const DelayMeasure lambda =
      opts.delay_measure ? *opts.delay_measure : model->delay_measure(grid.tau);
  Tracker local, synaptic;

  for (int trial = 0; trial < opts.trials; ++trial) {
    CounterRng rng(mix_seed(opts.seed, 0x6407Bull, static_cast<uint64_t>(trial)), 0, 0, 0);
    TrialDraw d = sampler.draw(rng);
    const RateSet rates = model->declared_rates(d.disorder);

    // Local growth: 2<x, f(x)> + |g(x)|^2 + int |h(x)|^2 dnu <= K_t (1+|x|^2).
    {
      Vec fx(dim);
      model->drift(d.t, d.receiver, d.x.data(), d.disorder, fx);
      Mat gx(dim, dims.brownian);
      model->diffusion(d.t, d.receiver, d.x.data(), d.disorder, gx);
      double lhs = 2.0 * dot(d.x, fx) + gx.squared_frobenius();
      double se = 0.0;
      if (model->has_local_jumps()) {
        auto analytic = model->local_jump_sq(d.t, d.receiver, d.x.data(), d.disorder);
        if (analytic) {
          lhs += *analytic;
        } else {
          Vec hx(dim);
          auto [est, e] = mc_jump_sq(model, opts.mc_mark_draws, rng, [&](double mark) {
            hx.set_zero();
            model->jump(d.t, d.receiver, d.x.data(), d.disorder, mark, hx);
            return hx.squared_norm();
          });
          lhs += est;
          se = e;
        }
      }
      const double base = 1.0 + d.x.squared_norm();
      local.update((lhs - rates.K.at(d.t) * base) / base, se, d);
    }

    // Synaptic growth: |theta|^2 + |beta|^2 + int |eta|^2 dnu
    //                  <= Kbar_t [1 + |x|^2 + delay integral].
    if (model->has_coupling()) {
      Vec th(dim);
      model->coupling_drift(d.t, d.receiver, d.source, d.x.data(), d.seg1.view(), d.disorder, th);
      Mat be(dim, dims.pop_brownian);
      model->coupling_diffusion(d.t, d.receiver, d.source, d.x.data(), d.seg1.view(), d.disorder, be);
      double lhs = th.squared_norm() + be.squared_frobenius();
      double se = 0.0;
      if (model->has_coupling_jumps()) {
        auto analytic =
            model->coupling_jump_sq(d.t, d.receiver, d.source, d.x.data(), d.seg1.view(), d.disorder);
        if (analytic) {
          lhs += *analytic;
        } else {
          Vec ev(dim);
          auto [est, e] = mc_jump_sq(model, opts.mc_mark_draws, rng, [&](double mark) {
            ev.set_zero();
            model->coupling_jump(d.t, d.receiver, d.source, d.x.data(), d.seg1.view(), d.disorder,
                                 mark, ev);
            return ev.squared_norm();
          });
          lhs += est;
          se = e;
        }
      }
      const SegmentView s1 = d.seg1.view();
      const double base = 1.0 + d.x.squared_norm() + delay_integral(s1, nullptr, grid, lambda);
      synaptic.update((lhs - rates.Kbar.at(d.t) * base) / base, se, d);
    }
  }

  CheckReport report;
  report.trials = opts.trials;
  report.conditions.push_back(local.report("local-growth"));
  if (model->has_coupling()) report.conditions.push_back(synaptic.report("synaptic-growth"));
  return report;
}

}  // namespace mfn
