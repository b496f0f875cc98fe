#include "mfn/network.hpp"

#include "mfn/parallel.hpp"

namespace mfn {

CouplingField make_network_field(const ModelPtr& model, const SpatialLayout& layout,
                                 const TimeGrid& grid, const EnsembleStore* store,
                                 bool force_direct, bool exclude_self) {
  const auto& sites = layout.sites();
  std::vector<double> per_source(sites.size());
  for (size_t s = 0; s < sites.size(); ++s)
    per_source[s] = 1.0 / layout.population(sites[s].population).weight;

  std::vector<double> per_cell;
  for (int a = 0; a < layout.populations(); ++a) {
    std::vector<int> counts(static_cast<size_t>(layout.num_cells(a)), 0);
    for (const auto& s : sites)
      if (s.population == a) ++counts[static_cast<size_t>(s.cell)];
    for (int m = 0; m < layout.num_cells(a); ++m)
      per_cell.push_back(counts[static_cast<size_t>(m)] / layout.population(a).weight);
  }
  return CouplingField(model, layout, grid, store, sites, std::move(per_source),
                       std::move(per_cell), !force_direct, exclude_self);
}

NetworkResult simulate_network(const ModelPtr& model, const SpatialLayout& layout,
                               const TimeGrid& grid, const Disorder& disorder,
                               const NetworkOptions& options) {
  const ModelDims dims = model->dims();
  const auto& sites = layout.sites();
  const int N = static_cast<int>(sites.size());

  NetworkResult result;
  result.store = EnsembleStore(N, grid, dims.state);

  if (!options.particle_keys.empty() && static_cast<int>(options.particle_keys.size()) != N)
    throw ShapeError("network: particle_keys must cover every site");
  auto key_of = [&options](int u) {
    return options.particle_keys.empty() ? static_cast<uint32_t>(u)
                                         : options.particle_keys[static_cast<size_t>(u)];
  };

  // Per-population iid initial paths, keyed by particle so that a coupled
  // mean-field run regenerates identical initial data.
  parallel_for(N, [&](int u) {
    const NoiseStreamKey init_key{options.run_seed, StreamKind::init, key_of(u), 0, 0};
    CounterRng rng = init_key.stream(0);
    std::vector<double> rows(static_cast<size_t>(grid.steps_per_delay + 1) * dims.state);
    model->sample_initial_path(sites[static_cast<size_t>(u)].population, grid, rng, rows.data());
    for (int j = 0; j <= grid.steps_per_delay; ++j) {
      double* dst = result.store.at(j, u);
      for (int k = 0; k < dims.state; ++k)
        dst[k] = rows[static_cast<size_t>(j) * dims.state + k];
    }
  });

  std::vector<UnitStreams> streams(static_cast<size_t>(N));
  for (int u = 0; u < N; ++u) streams[static_cast<size_t>(u)] = {key_of(u), 0};

  AdvanceOptions adv;
  adv.run_seed = options.run_seed;
  adv.r_guard = options.r_guard;
  adv.record_diagnostics = options.record_diagnostics;

  if (model->has_coupling()) {
    CouplingField field = make_network_field(model, layout, grid, &result.store,
                                             options.force_direct, options.exclude_self);
    result.diagnostics =
        advance_ensemble(model, grid, result.store, sites, streams, &field, disorder, adv);
  } else {
    result.diagnostics =
        advance_ensemble(model, grid, result.store, sites, streams, nullptr, disorder, adv);
  }
  return result;
}

InteractionTerms interaction_terms(const ModelPtr& model, const SpatialLayout& layout,
                                   const TimeGrid& grid, const EnsembleStore& store, int end_row,
                                   const Site& receiver, const Disorder& disorder,
                                   bool force_direct, bool exclude_self) {
  CouplingField field = make_network_field(model, layout, grid, &store, force_direct, exclude_self);
  const double t = grid.time_of(end_row);
  field.refresh(t, end_row, disorder);
  const double* x = store.at(end_row, receiver.index);

  InteractionTerms terms;
  field.drift(t, receiver, x, disorder, terms.drift);
  terms.diffusion.resize(static_cast<size_t>(layout.populations()));
  terms.jump_compensator.resize(static_cast<size_t>(layout.populations()));
  for (int a = 0; a < layout.populations(); ++a) {
    field.diffusion(t, receiver, a, x, disorder, terms.diffusion[static_cast<size_t>(a)]);
    field.jump_compensator(t, receiver, a, x, disorder,
                           terms.jump_compensator[static_cast<size_t>(a)]);
  }
  return terms;
}

}  // namespace mfn
