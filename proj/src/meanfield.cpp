#include "mfn/meanfield.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mfn/parallel.hpp"

namespace mfn {

std::vector<Site> plan_copy_sites(const SpatialLayout& layout, int copies_per_population) {
  if (copies_per_population < 2)
    throw ConfigError("run.copies: need at least 2 copies per population");
  std::vector<Site> sites;
  for (int a = 0; a < layout.populations(); ++a) {
    const auto& pop = layout.population(a);
    const int cells = static_cast<int>(pop.cells.size());
    std::vector<int> alloc(static_cast<size_t>(cells), 0);
    std::vector<std::pair<double, int>> remainders;
    int assigned = 0;
    for (int m = 0; m < cells; ++m) {
      const double quota =
          copies_per_population * pop.cells[static_cast<size_t>(m)].mass / pop.total_mass;
      alloc[static_cast<size_t>(m)] = static_cast<int>(std::floor(quota));
      assigned += alloc[static_cast<size_t>(m)];
      remainders.push_back({-(quota - std::floor(quota)), m});
    }
    std::sort(remainders.begin(), remainders.end());
    for (int i = 0; i < copies_per_population - assigned; ++i)
      ++alloc[static_cast<size_t>(remainders[static_cast<size_t>(i % cells)].second)];
    for (int m = 0; m < cells; ++m) {
      if (pop.cells[static_cast<size_t>(m)].mass > 0.0 && alloc[static_cast<size_t>(m)] < 2)
        throw ConfigError(
            "run.copies: too few copies to cover a positive-mass cell (need >= 2 per cell)");
      for (int i = 0; i < alloc[static_cast<size_t>(m)]; ++i) {
        Site s;
        s.population = a;
        s.cell = m;
        s.pos = pop.cells[static_cast<size_t>(m)].box.midpoint();
        s.cell_frac = 0.5;
        s.index = static_cast<int>(sites.size());
        sites.push_back(s);
      }
    }
  }
  return sites;
}

CouplingField make_meanfield_field(const ModelPtr& model, const SpatialLayout& layout,
                                   const TimeGrid& grid, const EnsembleStore* copies,
                                   const std::vector<Site>& copy_sites, bool force_direct) {
  std::vector<int> counts;
  for (int a = 0; a < layout.populations(); ++a)
    for (int m = 0; m < layout.num_cells(a); ++m) counts.push_back(0);
  auto slot = [&layout](int a, int m) {
    int s = 0;
    for (int i = 0; i < a; ++i) s += layout.num_cells(i);
    return s + m;
  };
  for (const auto& s : copy_sites) ++counts[static_cast<size_t>(slot(s.population, s.cell))];

  std::vector<double> per_cell;
  for (int a = 0; a < layout.populations(); ++a)
    for (int m = 0; m < layout.num_cells(a); ++m) per_cell.push_back(layout.cell(a, m).mass);

  std::vector<double> per_source(copy_sites.size(), 0.0);
  for (size_t s = 0; s < copy_sites.size(); ++s) {
    const auto& site = copy_sites[s];
    const int c = slot(site.population, site.cell);
    per_source[s] = layout.cell(site.population, site.cell).mass / counts[static_cast<size_t>(c)];
  }
  return CouplingField(model, layout, grid, copies, copy_sites, std::move(per_source),
                       std::move(per_cell), !force_direct, /*exclude_self=*/false);
}

MeanFieldResult simulate_mean_field(const ModelPtr& model, const SpatialLayout& layout,
                                    const TimeGrid& grid, const Disorder& disorder,
                                    const std::vector<Representative>& representatives,
                                    const MeanFieldOptions& options) {
  const ModelDims dims = model->dims();
  const bool couple = model->has_coupling();

  MeanFieldResult result;
  result.copy_sites = couple ? plan_copy_sites(layout, options.copies_per_population)
                             : std::vector<Site>{};
  result.copy_count = static_cast<int>(result.copy_sites.size());
  const int R = static_cast<int>(representatives.size());
  const int units = result.copy_count + R;
  result.store = EnsembleStore(units, grid, dims.state);

  std::vector<Site> sites(static_cast<size_t>(units));
  std::vector<UnitStreams> streams(static_cast<size_t>(units));
  for (int u = 0; u < result.copy_count; ++u) {
    sites[static_cast<size_t>(u)] = result.copy_sites[static_cast<size_t>(u)];
    streams[static_cast<size_t>(u)] = {static_cast<uint32_t>(u), 1};
  }
  for (int r = 0; r < R; ++r) {
    Site s = representatives[static_cast<size_t>(r)].site;
    s.index = result.copy_count + r;  // unit index within this store
    sites[static_cast<size_t>(result.copy_count + r)] = s;
    streams[static_cast<size_t>(result.copy_count + r)] = {
        representatives[static_cast<size_t>(r)].particle_key, 0};
  }

  parallel_for(units, [&](int u) {
    const bool is_copy = u < result.copy_count;
    const NoiseStreamKey init_key{options.run_seed,
                                  is_copy ? StreamKind::copy_init : StreamKind::init,
                                  streams[static_cast<size_t>(u)].particle, 0,
                                  is_copy ? 1u : 0u};
    CounterRng rng = init_key.stream(0);
    std::vector<double> rows(static_cast<size_t>(grid.steps_per_delay + 1) * dims.state);
    model->sample_initial_path(sites[static_cast<size_t>(u)].population, grid, rng, rows.data());
    for (int j = 0; j <= grid.steps_per_delay; ++j) {
      double* dst = result.store.at(j, u);
      for (int k = 0; k < dims.state; ++k)
        dst[k] = rows[static_cast<size_t>(j) * dims.state + k];
    }
  });

  AdvanceOptions adv;
  adv.run_seed = options.run_seed;
  adv.r_guard = options.r_guard;
  adv.record_diagnostics = options.record_diagnostics;

  if (couple) {
    CouplingField field = make_meanfield_field(model, layout, grid, &result.store,
                                               result.copy_sites, options.force_direct);
    result.diagnostics =
        advance_ensemble(model, grid, result.store, sites, streams, &field, disorder, adv);
  } else {
    result.diagnostics =
        advance_ensemble(model, grid, result.store, sites, streams, nullptr, disorder, adv);
  }
  return result;
}

Vec empirical_expectation_drift(const ModelPtr& model, const SpatialLayout& layout,
                                const TimeGrid& grid, const EnsembleStore& copies,
                                const std::vector<Site>& copy_sites, int end_row,
                                const Site& receiver, const double* x, const Disorder& disorder,
                                bool force_direct) {
  CouplingField field = make_meanfield_field(model, layout, grid, &copies, copy_sites, force_direct);
  const double t = grid.time_of(end_row);
  field.refresh(t, end_row, disorder);
  Vec out;
  field.drift(t, receiver, x, disorder, out);
  return out;
}

std::vector<PowerSums> ensemble_norm_moments(const EnsembleStore& store, int begin_unit,
                                             int end_unit) {
  std::vector<PowerSums> out(static_cast<size_t>(store.rows()));
  for (int row = 0; row < store.rows(); ++row)
    for (int u = begin_unit; u < end_unit; ++u) {
      const double* x = store.at(row, u);
      double nsq = 0.0;
      for (int k = 0; k < store.dim(); ++k) nsq += x[k] * x[k];
      out[static_cast<size_t>(row)].add(nsq);
    }
  return out;
}

double moment_bound_c1(double t, const RateSet& rates, int populations,
                       double init_sup_second_moment) {
  if (t < 0.0) throw std::domain_error("moment_bound_c1: t must be >= 0");
  if (populations < 1) throw std::domain_error("moment_bound_c1: populations must be >= 1");
  if (init_sup_second_moment < 0.0)
    throw std::domain_error("moment_bound_c1: initial second moment must be >= 0");
  const double P = populations;
  const double integral =
      rates.K.integral(0.0, t) + 3.0 * P * rates.Kbar.integral(0.0, t) + P * t;
  return (init_sup_second_moment + 1.0) * std::exp(integral);
}

double continuity_bound_c2(double t, const RateSet& rates, int populations, double c1_value) {
  if (t < 0.0) throw std::domain_error("continuity_bound_c2: t must be >= 0");
  if (populations < 1) throw std::domain_error("continuity_bound_c2: populations must be >= 1");
  if (c1_value < 0.0) throw std::domain_error("continuity_bound_c2: C1 must be >= 0");
  const double P = populations;
  const double integral = rates.L.integral(0.0, t) + P * rates.Lbar.integral(0.0, t) + P * t;
  return std::exp(integral) * (1.0 + 3.0 * c1_value);
}

}  // namespace mfn
