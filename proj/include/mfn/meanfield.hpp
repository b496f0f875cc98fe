#pragma once

#include "mfn/ensemble.hpp"
#include "mfn/stats.hpp"

namespace mfn {

// A tracked solution of the limit equation: evolves at `site` driven by the
// streams of `particle_key` on the primary replica lane, so a network run
// with the same seed shares its noise and initial path.
struct Representative {
  Site site;
  uint32_t particle_key = 0;
};

struct MeanFieldOptions {
  uint64_t run_seed = 0;
  int copies_per_population = 64;  // M
  double r_guard = 1e6;
  bool force_direct = false;
  bool record_diagnostics = false;
};

struct MeanFieldResult {
  EnsembleStore store;          // copies first, then representatives
  std::vector<Site> copy_sites; // aligned with units [0, copy_count)
  int copy_count = 0;
  StepDiagnostics diagnostics;

  int rep_unit(int rep_index) const { return copy_count + rep_index; }
  const double* rep_at(int row, int rep_index) const { return store.at(row, rep_unit(rep_index)); }
};

// Copy placement: per population, copies are spread over the refinement
// cells proportionally to R-mass (largest remainder) and sit at the cell
// midpoints. Every positive-mass cell must receive at least two copies.
std::vector<Site> plan_copy_sites(const SpatialLayout& layout, int copies_per_population);

// Approximates the limit equation by the grid-frozen Euler recursion with
// the law expectation replaced by the empirical average over the copies.
// Representatives are driven by the copy field but do not feed back into it.
MeanFieldResult simulate_mean_field(const ModelPtr& model, const SpatialLayout& layout,
                                    const TimeGrid& grid, const Disorder& disorder,
                                    const std::vector<Representative>& representatives,
                                    const MeanFieldOptions& options);

// Builds the mean-field coupling field over a copy ensemble (cell weights =
// R-masses; per-copy weights = R(cell)/count).
CouplingField make_meanfield_field(const ModelPtr& model, const SpatialLayout& layout,
                                   const TimeGrid& grid, const EnsembleStore* copies,
                                   const std::vector<Site>& copy_sites, bool force_direct);

// The cell-quadrature empirical expectation of the interaction drift against
// a frozen copy ensemble: sum over cells of R(cell) * (copy average of
// theta(t, receiver, cell, x, segment)).
Vec empirical_expectation_drift(const ModelPtr& model, const SpatialLayout& layout,
                                const TimeGrid& grid, const EnsembleStore& copies,
                                const std::vector<Site>& copy_sites, int end_row,
                                const Site& receiver, const double* x, const Disorder& disorder,
                                bool force_direct = false);

// Second-moment curve of a unit range [begin, end): per-row power sums of
// |X|^2 across units.
std::vector<PowerSums> ensemble_norm_moments(const EnsembleStore& store, int begin_unit,
                                             int end_unit);

// Lemma-style a-priori bounds with exact integrals of the piecewise rates.
// moment_bound_c1: (init_sup + 1) * exp(int_0^t (K + 3 P Kbar + P)).
double moment_bound_c1(double t, const RateSet& rates, int populations,
                       double init_sup_second_moment);
// continuity_bound_c2: exp(int_0^t (L + P Lbar + P)) * (1 + 3 C1(t)).
double continuity_bound_c2(double t, const RateSet& rates, int populations, double c1_value);

}  // namespace mfn
