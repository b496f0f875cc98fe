#pragma once

#include "mfn/ensemble.hpp"

namespace mfn {

struct NetworkOptions {
  uint64_t run_seed = 0;
  double r_guard = 1e6;
  bool force_direct = false;  // evaluate the pairwise sums without the fast path
  bool exclude_self = false;  // default follows the equation: self-interaction included
  bool record_diagnostics = false;
  // Optional relabeling of the per-particle stream keys (defaults to the
  // site index); permuting it realizes the exchangeability relabeling.
  std::vector<uint32_t> particle_keys;
};

struct NetworkResult {
  EnsembleStore store;  // one unit per site, in layout order
  StepDiagnostics diagnostics;
};

// Simulates the finite network: per-neuron local dynamics plus the
// 1/S-weighted interaction sums over each subpopulation, with delayed
// presynaptic segments frozen at committed grid values (Jacobi update).
NetworkResult simulate_network(const ModelPtr& model, const SpatialLayout& layout,
                               const TimeGrid& grid, const Disorder& disorder,
                               const NetworkOptions& options);

// Interaction terms at one frozen step, exposed for direct inspection: the
// aggregated drift, the per-population diffusion factor, and the jump
// integrand/compensator per population at a given mark.
struct InteractionTerms {
  Vec drift;
  std::vector<Mat> diffusion;        // per population
  std::vector<Vec> jump_compensator; // per population
};

InteractionTerms interaction_terms(const ModelPtr& model, const SpatialLayout& layout,
                                   const TimeGrid& grid, const EnsembleStore& store, int end_row,
                                   const Site& receiver, const Disorder& disorder,
                                   bool force_direct = false, bool exclude_self = false);

// Builds the network-semantics coupling field over `store` (sources = all
// layout sites, weights 1/S per source, count/S per cell).
CouplingField make_network_field(const ModelPtr& model, const SpatialLayout& layout,
                                 const TimeGrid& grid, const EnsembleStore* store,
                                 bool force_direct, bool exclude_self);

}  // namespace mfn
