#include "mfn/presets.hpp"

#include <cmath>

#include "mfn/errors.hpp"

namespace mfn {

namespace {

double get_param(const std::map<std::string, double>& params, const ModelInfo& info,
                 const std::string& key) {
  auto it = params.find(key);
  if (it != params.end()) return it->second;
  for (const auto& d : info.params)
    if (d.key == key) return d.default_value;
  throw ConfigError("model." + key + ": key not declared for model '" + info.id + "'");
}

void reject_unknown(const std::map<std::string, double>& params, const ModelInfo& info) {
  for (const auto& [k, v] : params) {
    (void)v;
    bool known = false;
    for (const auto& d : info.params)
      if (d.key == k) known = true;
    if (!known) throw ConfigError("model." + k + ": unknown key for model '" + info.id + "'");
  }
}

// ---------------------------------------------------------------------------
// Scalar linear jump diffusion with optional delayed feedback; every moment
// has a closed form or a cheap deterministic oracle, so it anchors the
// statistical test suite.
class LinearModel final : public Model {
 public:
  explicit LinearModel(const LinearParams& p) : p_(p) {
    if (!(p_.a > 0.0)) throw ConfigError("model.a: linear model requires a > 0");
    if (p_.nu_total < 0.0) throw ConfigError("model.nu_total: must be >= 0");
  }

  std::string id() const override { return "linear"; }
  ModelDims dims() const override { return {1, 1, 1}; }
  double jump_intensity() const override { return p_.nu_total; }
  double sample_mark(CounterRng& rng) const override { return rng.next_normal(); }

  void drift(double, const Site&, const double* x, const Disorder&, Vec& out) const override {
    out[0] = -p_.a * x[0];
  }
  void diffusion(double, const Site&, const double*, const Disorder&, Mat& out) const override {
    out(0, 0) = p_.sigma;
  }
  bool has_local_jumps() const override { return p_.c_jump != 0.0 && p_.nu_total > 0.0; }
  void jump(double, const Site&, const double*, const Disorder&, double, Vec& out) const override {
    out[0] = p_.c_jump;
  }
  void jump_compensator(double, const Site&, const double*, const Disorder&, Vec& out) const override {
    out[0] = p_.c_jump * p_.nu_total;
  }

  bool has_coupling() const override { return p_.b_delay != 0.0; }
  void coupling_drift(double, const Site&, const Site&, const double*, const SegmentView& y,
                      const Disorder&, Vec& out) const override {
    out[0] = p_.b_delay * y.oldest()[0];
  }

  bool coupling_separable() const override { return true; }
  int coupling_stat_dim() const override { return 1; }
  void coupling_stat(double, const Site&, const SegmentView& y, const Disorder&,
                     double* out) const override {
    out[0] = y.oldest()[0];
  }
  void coupling_drift_at(double, const Site&, int, int, const double*, const double* stat,
                         const Disorder&, Vec& out) const override {
    out[0] = p_.b_delay * stat[0];
  }

  DelayMeasure delay_measure(double tau) const override {
    return DelayMeasure{{{-tau, 0.5}, {0.0, 0.5}}};
  }

  RateSet declared_rates(const Disorder&) const override {
    RateSet r;
    r.K = PiecewiseRate::constant(p_.sigma * p_.sigma + p_.c_jump * p_.c_jump * p_.nu_total);
    r.L = PiecewiseRate::constant(0.0);
    const double bb = 2.0 * p_.b_delay * p_.b_delay;
    r.Kbar = PiecewiseRate::constant(bb);
    r.Lbar = PiecewiseRate::constant(bb);
    return r;
  }
  std::optional<PiecewiseRate> appendix_growth_rate(const Disorder&) const override {
    const double k = std::max(2.0 * std::abs(p_.b_delay),
                              p_.sigma * p_.sigma + p_.c_jump * p_.c_jump * p_.nu_total);
    return PiecewiseRate::constant(k);
  }

  std::optional<double> local_jump_sq(double, const Site&, const double*,
                                      const Disorder&) const override {
    return p_.c_jump * p_.c_jump * p_.nu_total;
  }
  std::optional<double> local_jump_sq_diff(double, const Site&, const double*, const double*,
                                           const Disorder&) const override {
    return 0.0;  // jump size is state independent
  }

  void sample_initial_path(int, const TimeGrid& grid, CounterRng& rng, double* rows) const override {
    const double v = p_.x0 + p_.init_sd * (p_.init_sd > 0.0 ? rng.next_normal() : 0.0);
    for (int j = 0; j <= grid.steps_per_delay; ++j) rows[j] = v;
  }
  double initial_sup_second_moment() const override {
    return p_.x0 * p_.x0 + p_.init_sd * p_.init_sd;
  }

  const LinearParams& params() const { return p_; }

 private:
  LinearParams p_;
};

// ---------------------------------------------------------------------------
// FitzHugh-Nagumo network with electrical synapses whose maximum conductance
// carries drift, diffusion and compensated-jump components. State (V, w);
// the synaptic functionals act on the delayed presynaptic voltage.
class FhnModel final : public Model {
 public:
  explicit FhnModel(const FhnParams& p) : p_(p) {
    if (!(p_.lambda3 > 0.0) || !(p_.lambda5 > 0.0))
      throw ConfigError("model.lambda3/lambda5: recovery parameters must be positive");
    if (p_.nu_total < 0.0) throw ConfigError("model.nu_total: must be >= 0");
    if (p_.lambda1_spread < 0.0) throw ConfigError("model.lambda1_spread: must be >= 0");
    eta_sq_ = p_.eta0 * p_.eta0 * p_.nu_total * (p_.mark_mean * p_.mark_mean + p_.mark_sd * p_.mark_sd);
    eta_first_ = p_.eta0 * p_.nu_total * p_.mark_mean;
  }

  std::string id() const override { return "fhn"; }
  ModelDims dims() const override { return {2, 1, 1}; }
  double jump_intensity() const override { return p_.nu_total; }
  double sample_mark(CounterRng& rng) const override {
    return p_.mark_mean + p_.mark_sd * rng.next_normal();
  }

  double lambda1_at(const Site& site, const Disorder& w) const {
    return p_.lambda1 + p_.disorder_scale * w[0] + p_.lambda1_spread * (site.cell_frac - 0.5);
  }

  void drift(double, const Site& site, const double* x, const Disorder& w, Vec& out) const override {
    const double v = x[0];
    const double rec = x[1];
    out[0] = -v * v * v / 3.0 + v - rec + lambda1_at(site, w);
    out[1] = p_.lambda3 * (v + p_.lambda4 - p_.lambda5 * rec);
  }
  void diffusion(double, const Site&, const double*, const Disorder&, Mat& out) const override {
    out.set_zero();
    out(0, 0) = p_.lambda2;
  }

  bool has_coupling() const override { return true; }
  bool has_coupling_jumps() const override { return p_.eta0 != 0.0 && p_.nu_total > 0.0; }

  void coupling_drift(double, const Site&, const Site&, const double* x, const SegmentView& y,
                      const Disorder&, Vec& out) const override {
    out.set_zero();
    out[0] = (y.oldest()[0] - x[0]) * p_.a1;
  }
  void coupling_diffusion(double, const Site&, const Site&, const double* x, const SegmentView& y,
                          const Disorder&, Mat& out) const override {
    out.set_zero();
    out(0, 0) = (y.oldest()[0] - x[0]) * p_.a2;
  }
  void coupling_jump(double, const Site&, const Site&, const double* x, const SegmentView& y,
                     const Disorder&, double mark, Vec& out) const override {
    out.set_zero();
    out[0] = (y.oldest()[0] - x[0]) * p_.eta0 * mark;
  }
  void coupling_jump_compensator(double, const Site&, const Site&, const double* x,
                                 const SegmentView& y, const Disorder&, Vec& out) const override {
    out.set_zero();
    out[0] = (y.oldest()[0] - x[0]) * eta_first_;
  }

  bool coupling_separable() const override { return true; }
  int coupling_stat_dim() const override { return 1; }
  void coupling_stat(double, const Site&, const SegmentView& y, const Disorder&,
                     double* out) const override {
    out[0] = y.oldest()[0];
  }
  void coupling_drift_at(double, const Site&, int, int, const double* x, const double* stat,
                         const Disorder&, Vec& out) const override {
    out.set_zero();
    out[0] = (stat[0] - x[0]) * p_.a1;
  }
  void coupling_diffusion_at(double, const Site&, int, int, const double* x, const double* stat,
                             const Disorder&, Mat& out) const override {
    out.set_zero();
    out(0, 0) = (stat[0] - x[0]) * p_.a2;
  }
  void coupling_jump_at(double, const Site&, int, int, const double* x, const double* stat,
                        const Disorder&, double mark, Vec& out) const override {
    out.set_zero();
    out[0] = (stat[0] - x[0]) * p_.eta0 * mark;
  }
  void coupling_jump_compensator_at(double, const Site&, int, int, const double* x,
                                    const double* stat, const Disorder&, Vec& out) const override {
    out.set_zero();
    out[0] = (stat[0] - x[0]) * eta_first_;
  }

  DelayMeasure delay_measure(double tau) const override { return DelayMeasure::point(-tau); }

  RateSet declared_rates(const Disorder& w) const override {
    RateSet r;
    const double l3gap = std::abs(p_.lambda3 - 1.0);
    const double l1max = std::abs(p_.lambda1) + std::abs(p_.disorder_scale * w[0]) +
                         0.5 * p_.lambda1_spread;
    const double k_quad = l1max * l1max + p_.lambda3 * p_.lambda4 * p_.lambda3 * p_.lambda4 +
                          p_.lambda2 * p_.lambda2;
    r.K = PiecewiseRate::constant(std::max(3.0 + l3gap, k_quad));
    r.L = PiecewiseRate::constant((p_.lambda1_spread > 0.0 ? 3.0 : 2.0) + l3gap);
    const double syn = 2.0 * (p_.a1 * p_.a1 + p_.a2 * p_.a2 + eta_sq_);
    r.Kbar = PiecewiseRate::constant(syn);
    r.Lbar = PiecewiseRate::constant(syn);
    return r;
  }

  std::optional<double> coupling_jump_sq(double, const Site&, const Site&, const double* x,
                                         const SegmentView& y, const Disorder&) const override {
    const double s = y.oldest()[0] - x[0];
    return s * s * eta_sq_;
  }
  std::optional<double> coupling_jump_sq_diff(double, const Site&, const Site&, const double* x1,
                                              const SegmentView& y1, const double* x2,
                                              const SegmentView& y2, const Disorder&) const override {
    const double s = (y1.oldest()[0] - x1[0]) - (y2.oldest()[0] - x2[0]);
    return s * s * eta_sq_;
  }

  void sample_initial_path(int, const TimeGrid& grid, CounterRng& rng, double* rows) const override {
    const double v = p_.init_v_mean + p_.init_v_sd * rng.next_normal();
    const double rec = p_.init_w_mean + p_.init_w_sd * rng.next_normal();
    for (int j = 0; j <= grid.steps_per_delay; ++j) {
      rows[2 * j] = v;
      rows[2 * j + 1] = rec;
    }
  }
  double initial_sup_second_moment() const override {
    return p_.init_v_mean * p_.init_v_mean + p_.init_v_sd * p_.init_v_sd +
           p_.init_w_mean * p_.init_w_mean + p_.init_w_sd * p_.init_w_sd;
  }

  bool cellwise_constant() const override { return p_.lambda1_spread == 0.0; }
  double cell_epsilon() const override { return p_.lambda1_spread; }

  const FhnParams& params() const { return p_; }

 private:
  FhnParams p_;
  double eta_sq_ = 0.0;    // int eta-bar^2 dnu per unit squared voltage gap
  double eta_first_ = 0.0; // int eta-bar dnu per unit voltage gap
};

// ---------------------------------------------------------------------------
// Deliberately broken model: quadratic drift with claimed zero rates, so the
// hypothesis checkers have a known positive violation to detect.
class CounterexampleModel final : public Model {
 public:
  explicit CounterexampleModel(const CounterexampleParams& p) : p_(p) {}

  std::string id() const override { return "counterexample"; }
  ModelDims dims() const override { return {1, 1, 1}; }

  void drift(double, const Site&, const double* x, const Disorder&, Vec& out) const override {
    out[0] = x[0] * x[0];
  }

  RateSet declared_rates(const Disorder&) const override {
    return RateSet{};  // all-zero claims; wrong on purpose
  }

  void sample_initial_path(int, const TimeGrid& grid, CounterRng&, double* rows) const override {
    for (int j = 0; j <= grid.steps_per_delay; ++j) rows[j] = p_.x0;
  }
  double initial_sup_second_moment() const override { return p_.x0 * p_.x0; }

 private:
  CounterexampleParams p_;
};

}  // namespace

ModelPtr make_linear_model(const LinearParams& p) { return std::make_shared<LinearModel>(p); }
ModelPtr make_fhn_model(const FhnParams& p) { return std::make_shared<FhnModel>(p); }
ModelPtr make_counterexample_model(const CounterexampleParams& p) {
  return std::make_shared<CounterexampleModel>(p);
}

const std::vector<ModelInfo>& model_catalogue() {
  static const std::vector<ModelInfo> catalogue = {
      {"linear",
       "scalar linear jump diffusion dX = (-aX + b X_{t-tau})dt + sigma dW + c dN~ with "
       "closed-form moments",
       {{"a", 1.0, "mean-reversion rate, > 0"},
        {"b_delay", 0.0, "delayed feedback coefficient"},
        {"sigma", 1.0, "diffusion coefficient"},
        {"c_jump", 0.0, "jump size"},
        {"nu_total", 0.0, "jump intensity nu(U)"},
        {"x0", 1.0, "initial value"},
        {"init_sd", 0.0, "sd of the initial value"}}},
      {"fhn",
       "FitzHugh-Nagumo neurons with delayed electrical synapses; conductance noise enters "
       "as drift, diffusion and compensated jumps",
       {{"lambda1", 0.4, "external current"},
        {"lambda2", 0.25, "current noise"},
        {"lambda3", 0.08, "recovery rate, > 0"},
        {"lambda4", 0.7, "recovery offset"},
        {"lambda5", 0.8, "recovery decay, > 0"},
        {"a1", 0.6, "conductance drift"},
        {"a2", 0.12, "conductance diffusion"},
        {"eta0", 0.08, "conductance jump amplitude"},
        {"nu_total", 1.0, "jump intensity nu(U)"},
        {"mark_mean", 0.0, "jump mark mean"},
        {"mark_sd", 1.0, "jump mark sd"},
        {"init_v_mean", 0.0, "initial V mean"},
        {"init_v_sd", 0.4, "initial V sd"},
        {"init_w_mean", 0.0, "initial w mean"},
        {"init_w_sd", 0.25, "initial w sd"},
        {"lambda1_spread", 0.0, "within-cell lambda1 spread (cell epsilon)"},
        {"disorder_scale", 0.0, "lambda1 disorder coupling"}}},
      {"counterexample",
       "quadratic drift with (wrongly) claimed zero rates; trips the hypothesis checkers",
       {{"x0", 0.5, "initial value"}}},
  };
  return catalogue;
}

ModelPtr make_model(const std::string& id, const std::map<std::string, double>& params) {
  for (const auto& info : model_catalogue()) {
    if (info.id != id) continue;
    reject_unknown(params, info);
    auto p = [&](const std::string& k) { return get_param(params, info, k); };
    if (id == "linear") {
      LinearParams lp;
      lp.a = p("a");
      lp.b_delay = p("b_delay");
      lp.sigma = p("sigma");
      lp.c_jump = p("c_jump");
      lp.nu_total = p("nu_total");
      lp.x0 = p("x0");
      lp.init_sd = p("init_sd");
      return make_linear_model(lp);
    }
    if (id == "fhn") {
      FhnParams fp;
      fp.lambda1 = p("lambda1");
      fp.lambda2 = p("lambda2");
      fp.lambda3 = p("lambda3");
      fp.lambda4 = p("lambda4");
      fp.lambda5 = p("lambda5");
      fp.a1 = p("a1");
      fp.a2 = p("a2");
      fp.eta0 = p("eta0");
      fp.nu_total = p("nu_total");
      fp.mark_mean = p("mark_mean");
      fp.mark_sd = p("mark_sd");
      fp.init_v_mean = p("init_v_mean");
      fp.init_v_sd = p("init_v_sd");
      fp.init_w_mean = p("init_w_mean");
      fp.init_w_sd = p("init_w_sd");
      fp.lambda1_spread = p("lambda1_spread");
      fp.disorder_scale = p("disorder_scale");
      return make_fhn_model(fp);
    }
    CounterexampleParams cp;
    cp.x0 = p("x0");
    return make_counterexample_model(cp);
  }
  throw ConfigError("model.id: unknown model '" + id + "'");
}

double linear_mean_exact(double a, double x0, double t) { return x0 * std::exp(-a * t); }

double linear_variance_exact(double a, double sigma, double c_jump, double nu_total, double v0,
                             double t) {
  const double q = sigma * sigma + c_jump * c_jump * nu_total;
  return q * (1.0 - std::exp(-2.0 * a * t)) / (2.0 * a) + v0 * std::exp(-2.0 * a * t);
}

std::vector<double> linear_delay_ode_mean(double a, double b_delay, double tau, double x0,
                                          double dt, int rows, int refine) {
  const int fine_per = refine;
  const double h = dt / fine_per;
  const int delay_fine = static_cast<int>(std::lround(tau / h));
  const int total_fine = (rows - 1) * fine_per;
  std::vector<double> fine(static_cast<size_t>(delay_fine + total_fine + 1), x0);
  for (int i = 0; i < total_fine; ++i) {
    const size_t cur = static_cast<size_t>(delay_fine + i);
    fine[cur + 1] = fine[cur] + h * (-a * fine[cur] + b_delay * fine[cur - delay_fine]);
  }
  std::vector<double> out(static_cast<size_t>(rows));
  for (int i = 0; i < rows; ++i) out[static_cast<size_t>(i)] = fine[static_cast<size_t>(delay_fine + i * fine_per)];
  return out;
}

}  // namespace mfn
