#pragma once

#include <functional>

#include "mfn/meanfield.hpp"
#include "mfn/network.hpp"

namespace mfn {

// Squared coupling gaps |X^{r,N}_t - Xbar^r_t|^2 of one replica pair on the
// full grid (initial window included, where they vanish by construction).
struct CoupledGap {
  int rows = 0;
  int particles = 0;
  std::vector<double> sq_gap;  // rows x particles, row-major
  double sup = 0.0;
  int sup_row = 0;
  int sup_particle = 0;

  double at(int row, int r) const { return sq_gap[static_cast<size_t>(row) * particles + r]; }
};

// The statistic is meaningless unless both runs share seed, grid and noise
// keys; mismatches are hard errors.
CoupledGap coupled_gap(const EnsembleStore& network, uint64_t network_seed,
                       const MeanFieldResult& meanfield, uint64_t meanfield_seed, int particles);

struct ChaosEntry {
  int particles = 0;              // N
  std::vector<double> weights;    // S per population
  double gap = 0.0;               // mean over disorder draws of sup_{t,r} E|...|^2
  double se = 0.0;                // across-draw SE (NaN when draws < 2)
  double inner_se = 0.0;          // replica SE at the sup argmax, averaged over draws
  double bound = 0.0;             // explicit per-draw bound, averaged over draws
  std::vector<double> per_draw_gap;
};

struct RatioAuditEntry {
  int population = 0;
  int cell = 0;
  double ratio = 0.0;
  double mass = 0.0;
};

struct ChaosReport {
  std::vector<ChaosEntry> entries;  // sorted by N
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;  // NaN when disorder draws < 2
  int copies = 0;
  int disorder_draws = 0;
  int replicas = 0;
  double weight_sup = 0.0;  // max over N of sum_alpha count^2/S^2
  std::vector<double> c1_horizon;  // per disorder draw, C1(T)
  std::vector<double> c2_horizon;  // per disorder draw, C2(T)
  std::vector<RatioAuditEntry> ratio_audit;  // at the largest N
};

struct StudyOptions {
  std::vector<int> n_list;
  int copies = 256;        // M
  int disorder_draws = 4;  // D
  int replicas = 16;       // Rp
  uint64_t seed = 0;
  double r_guard = 1e6;
};

using LayoutFactory = std::function<SpatialLayout(int)>;

// Coupled network/limit runs over the N list with nested Monte Carlo over
// (disorder draw, replica); shares noise, initial paths and (when the model
// is cellwise constant) the mean-field trajectories across N.
ChaosReport convergence_study(const ModelPtr& model, const LayoutFactory& layout_of,
                              const TimeGrid& grid, const DisorderSpec& disorder,
                              const StudyOptions& options);

// Explicit per-disorder bound on the sup gap: the spatial deficit summed
// over populations times C2(T) times the Gronwall factor.
double chaos_gap_bound(const SpatialLayout& layout, const RateSet& rates, double cell_epsilon,
                       double horizon, double c2_horizon);

struct H9Audit {
  double estimate = 0.0;
  double se = 0.0;
  bool divergence_flag = false;
  std::vector<double> prefix_estimates;  // at D/4, D/2, D
  int draws = 0;
};

// Monte Carlo estimate of the disorder integrability expectation
// E exp(int_0^T [2L + Lbar (P + 6 weight_sup) + K + 3 P Kbar]) with a
// growth-based divergence heuristic.
H9Audit disorder_integrability_audit(const std::function<RateSet(const Disorder&)>& rates_of,
                                     const DisorderSpec& disorder, int populations,
                                     double weight_sup, double horizon, int draws, uint64_t seed);

H9Audit disorder_integrability_audit(const ModelPtr& model, const DisorderSpec& disorder,
                                     int populations, double weight_sup, double horizon, int draws,
                                     uint64_t seed);

}  // namespace mfn
