#pragma once

#include <map>
#include <string>
#include <vector>

#include "mfn/model.hpp"

namespace mfn {

struct ModelParamDoc {
  std::string key;
  double default_value;
  std::string doc;
};

struct ModelInfo {
  std::string id;
  std::string summary;
  std::vector<ModelParamDoc> params;
};

const std::vector<ModelInfo>& model_catalogue();

// Builds a catalogue model from key-value parameters; unknown ids and keys
// are configuration errors naming the offending key.
ModelPtr make_model(const std::string& id, const std::map<std::string, double>& params);

// --- closed forms of the linear model (validation oracles) -----------------

// E X_t for dX = -a X dt + ... with X_0 = x0 and no delay feedback.
double linear_mean_exact(double a, double x0, double t);

// Var X_t for the same model with diffusion sigma, jump size c, intensity nu.
double linear_variance_exact(double a, double sigma, double c_jump, double nu_total, double v0,
                             double t);

// Deterministic first-moment curve of the delayed linear model
// m'(t) = -a m(t) + b m(t - tau), m = x0 on [-tau, 0], solved on a grid
// `refine` times finer than dt and sampled at the coarse grid times
// t = 0, dt, ..., capped at `rows` entries.
std::vector<double> linear_delay_ode_mean(double a, double b_delay, double tau, double x0,
                                          double dt, int rows, int refine = 64);

// Parameter blocks, exposed so tests can build models directly.
struct LinearParams {
  double a = 1.0;
  double b_delay = 0.0;
  double sigma = 1.0;
  double c_jump = 0.0;
  double nu_total = 0.0;
  double x0 = 1.0;
  double init_sd = 0.0;
};
ModelPtr make_linear_model(const LinearParams& p);

struct FhnParams {
  double lambda1 = 0.4;
  double lambda2 = 0.25;
  double lambda3 = 0.08;
  double lambda4 = 0.7;
  double lambda5 = 0.8;
  double a1 = 0.6;    // conductance drift coefficient
  double a2 = 0.12;   // conductance diffusion coefficient
  double eta0 = 0.08; // conductance jump amplitude factor
  double nu_total = 1.0;
  double mark_mean = 0.0;
  double mark_sd = 1.0;
  double init_v_mean = 0.0;
  double init_v_sd = 0.4;
  double init_w_mean = 0.0;
  double init_w_sd = 0.25;
  double lambda1_spread = 0.0;  // within-cell spread of lambda1 (the cell epsilon)
  double disorder_scale = 0.0;  // lambda1 <- lambda1 + scale * omega'_0
};
ModelPtr make_fhn_model(const FhnParams& p);

struct CounterexampleParams {
  double x0 = 0.5;
};
ModelPtr make_counterexample_model(const CounterexampleParams& p);

}  // namespace mfn
