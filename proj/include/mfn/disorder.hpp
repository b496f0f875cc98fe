#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mfn/errors.hpp"
#include "mfn/philox.hpp"

namespace mfn {

// Nonnegative piecewise-constant rate of t on [0, inf); integrals are exact.
class PiecewiseRate {
 public:
  PiecewiseRate() : values_{0.0} {}
  static PiecewiseRate constant(double v) {
    PiecewiseRate r;
    r.values_ = {v};
    r.check();
    return r;
  }
  // value[i] holds on [knots[i-1], knots[i]) with knots[-1] = 0, last value
  // extends to infinity.
  PiecewiseRate(std::vector<double> knots, std::vector<double> values)
      : knots_(std::move(knots)), values_(std::move(values)) {
    if (values_.size() != knots_.size() + 1)
      throw ConfigError("rate: values must have one more entry than knots");
    if (!std::is_sorted(knots_.begin(), knots_.end()))
      throw ConfigError("rate: knots must be ascending");
    check();
  }

  double at(double t) const {
    size_t i = 0;
    while (i < knots_.size() && t >= knots_[i]) ++i;
    return values_[i];
  }

  double integral(double t0, double t1) const {
    if (t1 <= t0) return 0.0;
    double total = 0.0;
    double lo = t0;
    for (size_t i = 0; i <= knots_.size(); ++i) {
      const double hi = (i < knots_.size()) ? knots_[i] : t1;
      const double upper = std::min(hi, t1);
      if (upper > lo) total += values_[i] * (upper - lo);
      lo = std::max(lo, upper);
      if (lo >= t1) break;
    }
    return total;
  }

  PiecewiseRate& operator+=(double c) {
    for (auto& v : values_) v += c;
    return *this;
  }

 private:
  void check() const {
    for (double v : values_)
      if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError("rate: values must be finite and >= 0");
  }
  std::vector<double> knots_;
  std::vector<double> values_;
};

// The four hypothesis rate functions a model declares for a given disorder
// realization: local growth K, local monotonicity L, synaptic growth Kbar,
// synaptic Lipschitz Lbar.
struct RateSet {
  PiecewiseRate K;
  PiecewiseRate L;
  PiecewiseRate Kbar;
  PiecewiseRate Lbar;
};

struct Disorder {
  std::vector<double> omega;
  double operator[](size_t i) const { return i < omega.size() ? omega[i] : 0.0; }
};

struct DisorderSpec {
  enum class Dist { none, normal, uniform };
  Dist dist = Dist::none;
  int dim = 1;
  double scale = 1.0;  // normal: sd; uniform: half-width around 0

  Disorder sample(CounterRng& rng) const {
    Disorder d;
    if (dist == Dist::none) return d;
    d.omega.resize(static_cast<size_t>(dim));
    for (auto& w : d.omega) {
      switch (dist) {
        case Dist::normal: w = scale * rng.next_normal(); break;
        case Dist::uniform: w = scale * (2.0 * rng.next_unit() - 1.0); break;
        default: w = 0.0;
      }
    }
    return d;
  }

  static Dist parse(const std::string& s) {
    if (s == "none") return Dist::none;
    if (s == "normal") return Dist::normal;
    if (s == "uniform") return Dist::uniform;
    throw ConfigError("disorder.distribution: unknown value '" + s + "'");
  }
};

}  // namespace mfn
