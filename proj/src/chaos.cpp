#include "mfn/chaos.hpp"

#include <algorithm>
#include <cmath>

#include "mfn/parallel.hpp"

namespace mfn {

CoupledGap coupled_gap(const EnsembleStore& network, uint64_t network_seed,
                       const MeanFieldResult& meanfield, uint64_t meanfield_seed, int particles) {
  if (network_seed != meanfield_seed)
    throw ShapeError("coupled_gap: runs were not driven by the same seed");
  if (network.rows() != meanfield.store.rows() || network.dim() != meanfield.store.dim())
    throw ShapeError("coupled_gap: runs disagree on grid or state dimension");
  if (network.units() < particles ||
      meanfield.store.units() - meanfield.copy_count < particles)
    throw ShapeError("coupled_gap: fewer units than requested particles");

  CoupledGap g;
  g.rows = network.rows();
  g.particles = particles;
  g.sq_gap.resize(static_cast<size_t>(g.rows) * particles);
  for (int row = 0; row < g.rows; ++row)
    for (int r = 0; r < particles; ++r) {
      const double* a = network.at(row, r);
      const double* b = meanfield.rep_at(row, r);
      double s = 0.0;
      for (int k = 0; k < network.dim(); ++k) {
        const double d = a[k] - b[k];
        s += d * d;
      }
      g.sq_gap[static_cast<size_t>(row) * particles + r] = s;
      if (s > g.sup) {
        g.sup = s;
        g.sup_row = row;
        g.sup_particle = r;
      }
    }
  return g;
}

double chaos_gap_bound(const SpatialLayout& layout, const RateSet& rates, double cell_epsilon,
                       double horizon, double c2_horizon) {
  const int P = layout.populations();
  double deficit = 0.0;
  const auto ratios = layout.ratio_audit();
  for (int a = 0; a < P; ++a) {
    const auto& pop = layout.population(a);
    const double count = pop.count;
    const double S = pop.weight;
    double cell_term = 0.0;
    for (const auto& r : ratios)
      if (r.population == a) {
        const double d = r.ratio - r.mass;
        cell_term += d * d;
      }
    const double m_cells = static_cast<double>(layout.num_cells(a));
    deficit += count / (S * S) + cell_epsilon * count * count / (S * S) + m_cells * cell_term;
  }
  const double wsum = layout.weight_bound();
  const double gronwall = rates.L.integral(0.0, horizon) +
                          6.0 * wsum * rates.Lbar.integral(0.0, horizon) + P * horizon;
  return 36.0 * deficit * c2_horizon * std::exp(gronwall);
}

namespace {

struct GapAccumulator {
  int rows = 0;
  int particles = 0;
  std::vector<double> sum;     // rows x particles
  std::vector<double> sum_sq;  // rows x particles

  GapAccumulator(int rows_, int particles_)
      : rows(rows_),
        particles(particles_),
        sum(static_cast<size_t>(rows_) * particles_, 0.0),
        sum_sq(static_cast<size_t>(rows_) * particles_, 0.0) {}

  void add(const CoupledGap& g) {
    for (size_t i = 0; i < sum.size(); ++i) {
      sum[i] += g.sq_gap[i];
      sum_sq[i] += g.sq_gap[i] * g.sq_gap[i];
    }
  }

  // sup over (t, r) of the replica mean, with the replica SE at the argmax.
  void sup_of_mean(int replicas, double* sup, double* se_at_sup) const {
    double best = 0.0;
    size_t best_i = 0;
    for (size_t i = 0; i < sum.size(); ++i)
      if (sum[i] > best) {
        best = sum[i];
        best_i = i;
      }
    const double n = replicas;
    const double mean = best / n;
    *sup = mean;
    if (replicas > 1) {
      const double var = std::max(0.0, (sum_sq[best_i] - n * mean * mean) / (n - 1.0));
      *se_at_sup = std::sqrt(var / n);
    } else {
      *se_at_sup = 0.0;
    }
  }
};

}  // namespace

ChaosReport convergence_study(const ModelPtr& model, const LayoutFactory& layout_of,
                              const TimeGrid& grid, const DisorderSpec& disorder,
                              const StudyOptions& options) {
  if (options.n_list.empty()) throw ConfigError("run.n_list: study needs at least one N");
  if (!std::is_sorted(options.n_list.begin(), options.n_list.end()))
    throw ConfigError("run.n_list: must be increasing");
  const int D = options.disorder_draws;
  const int Rp = options.replicas;
  if (D < 1 || Rp < 1) throw ConfigError("run.disorder_draws/replicas: must be >= 1");

  const int max_n = options.n_list.back();
  const int num_n = static_cast<int>(options.n_list.size());
  const bool share_meanfield = model->cellwise_constant();

  ChaosReport report;
  report.copies = options.copies;
  report.disorder_draws = D;
  report.replicas = Rp;

  std::vector<SpatialLayout> layouts;
  layouts.reserve(static_cast<size_t>(num_n));
  for (int n : options.n_list) layouts.push_back(layout_of(n));
  for (const auto& lay : layouts) report.weight_sup = std::max(report.weight_sup, lay.weight_bound());

  std::vector<Representative> reps(static_cast<size_t>(max_n));
  {
    const auto& sites = layouts.back().sites();
    for (int r = 0; r < max_n; ++r)
      reps[static_cast<size_t>(r)] = {sites[static_cast<size_t>(r)],
                                      static_cast<uint32_t>(sites[static_cast<size_t>(r)].index)};
  }

  report.entries.resize(static_cast<size_t>(num_n));
  for (int i = 0; i < num_n; ++i) {
    auto& e = report.entries[static_cast<size_t>(i)];
    e.particles = options.n_list[static_cast<size_t>(i)];
    for (int a = 0; a < layouts[static_cast<size_t>(i)].populations(); ++a)
      e.weights.push_back(layouts[static_cast<size_t>(i)].population(a).weight);
    e.per_draw_gap.resize(static_cast<size_t>(D), 0.0);
  }

  std::vector<double> bound_sum(static_cast<size_t>(num_n), 0.0);
  std::vector<double> inner_se_sum(static_cast<size_t>(num_n), 0.0);

  for (int d = 0; d < D; ++d) {
    const NoiseStreamKey dkey{options.seed, StreamKind::disorder, static_cast<uint32_t>(d), 0, 0};
    CounterRng drng = dkey.stream(0);
    const Disorder omega = disorder.sample(drng);
    const RateSet rates = model->declared_rates(omega);

    const double c1_T = moment_bound_c1(grid.horizon, rates, layouts.back().populations(),
                                        model->initial_sup_second_moment());
    const double c2_T =
        continuity_bound_c2(grid.horizon, rates, layouts.back().populations(), c1_T);
    report.c1_horizon.push_back(c1_T);
    report.c2_horizon.push_back(c2_T);
    for (int i = 0; i < num_n; ++i)
      bound_sum[static_cast<size_t>(i)] += chaos_gap_bound(
          layouts[static_cast<size_t>(i)], rates, model->cell_epsilon(), grid.horizon, c2_T);

    std::vector<GapAccumulator> acc;
    for (int n : options.n_list) acc.emplace_back(grid.rows(), n);

    for (int rp = 0; rp < Rp; ++rp) {
      const uint64_t seed_eff = mix_seed(options.seed, static_cast<uint64_t>(d) + 1,
                                         static_cast<uint64_t>(rp) + 1);
      MeanFieldOptions mf_opts;
      mf_opts.run_seed = seed_eff;
      mf_opts.copies_per_population = options.copies;
      mf_opts.r_guard = options.r_guard;

      MeanFieldResult mf_shared;
      if (share_meanfield)
        mf_shared = simulate_mean_field(model, layouts.back(), grid, omega, reps, mf_opts);

      for (int i = 0; i < num_n; ++i) {
        const int N = options.n_list[static_cast<size_t>(i)];
        NetworkOptions net_opts;
        net_opts.run_seed = seed_eff;
        net_opts.r_guard = options.r_guard;
        NetworkResult net = simulate_network(model, layouts[static_cast<size_t>(i)], grid, omega,
                                             net_opts);
        if (share_meanfield) {
          acc[static_cast<size_t>(i)].add(
              coupled_gap(net.store, seed_eff, mf_shared, seed_eff, N));
        } else {
          // positions matter: representatives live at this N's own sites
          std::vector<Representative> reps_n;
          reps_n.reserve(static_cast<size_t>(N));
          for (const auto& s : layouts[static_cast<size_t>(i)].sites())
            reps_n.push_back({s, static_cast<uint32_t>(s.index)});
          MeanFieldResult mf_n =
              simulate_mean_field(model, layouts[static_cast<size_t>(i)], grid, omega, reps_n,
                                  mf_opts);
          acc[static_cast<size_t>(i)].add(coupled_gap(net.store, seed_eff, mf_n, seed_eff, N));
        }
      }
    }

    for (int i = 0; i < num_n; ++i) {
      double sup = 0.0, se = 0.0;
      acc[static_cast<size_t>(i)].sup_of_mean(Rp, &sup, &se);
      report.entries[static_cast<size_t>(i)].per_draw_gap[static_cast<size_t>(d)] = sup;
      inner_se_sum[static_cast<size_t>(i)] += se;
    }
  }

  std::vector<double> log_n, log_gap;
  for (int i = 0; i < num_n; ++i) {
    auto& e = report.entries[static_cast<size_t>(i)];
    e.gap = sample_mean(e.per_draw_gap);
    e.se = D >= 2 ? sample_sd(e.per_draw_gap) / std::sqrt(static_cast<double>(D))
                  : std::numeric_limits<double>::quiet_NaN();
    e.inner_se = inner_se_sum[static_cast<size_t>(i)] / D;
    e.bound = bound_sum[static_cast<size_t>(i)] / D;
    if (e.gap > 0.0) {
      log_n.push_back(std::log(static_cast<double>(e.particles)));
      log_gap.push_back(std::log(e.gap));
    }
  }
  const LineFit fit = fit_line(log_n, log_gap);
  report.slope = fit.slope;
  report.intercept = fit.intercept;
  report.slope_se = D >= 2 ? fit.slope_se : std::numeric_limits<double>::quiet_NaN();
  report.ratio_audit.clear();
  for (const auto& r : layouts.back().ratio_audit())
    report.ratio_audit.push_back({r.population, r.cell, r.ratio, r.mass});
  return report;
}

H9Audit disorder_integrability_audit(const std::function<RateSet(const Disorder&)>& rates_of,
                                     const DisorderSpec& disorder, int populations,
                                     double weight_sup, double horizon, int draws, uint64_t seed) {
  H9Audit audit;
  audit.draws = draws;
  PowerSums acc;
  std::vector<double> samples;
  samples.reserve(static_cast<size_t>(draws));
  for (int d = 0; d < draws; ++d) {
    const NoiseStreamKey key{seed, StreamKind::disorder, static_cast<uint32_t>(d), 0, 0};
    CounterRng rng = key.stream(0);
    const Disorder omega = disorder.sample(rng);
    const RateSet r = rates_of(omega);
    const double expo = 2.0 * r.L.integral(0.0, horizon) +
                        (populations + 6.0 * weight_sup) * r.Lbar.integral(0.0, horizon) +
                        r.K.integral(0.0, horizon) +
                        3.0 * populations * r.Kbar.integral(0.0, horizon);
    const double v = std::exp(expo);
    acc.add(v);
    samples.push_back(v);
  }
  audit.estimate = acc.mean();
  audit.se = acc.se_mean();

  // Divergence heuristic: prefix means that keep growing, or a single draw
  // carrying most of the mass, indicate a non-integrable integrand.
  auto prefix_mean = [&samples](int k) {
    double s = 0.0;
    for (int i = 0; i < k; ++i) s += samples[static_cast<size_t>(i)];
    return s / k;
  };
  if (draws >= 8) {
    const double q1 = prefix_mean(draws / 4);
    const double q2 = prefix_mean(draws / 2);
    const double q3 = prefix_mean(draws);
    audit.prefix_estimates = {q1, q2, q3};
    const double max_sample = *std::max_element(samples.begin(), samples.end());
    const bool growing = q3 > 1.5 * q2 && q2 > 1.5 * q1;
    const bool dominated = max_sample > 0.5 * acc.n * acc.mean();
    audit.divergence_flag = growing || dominated;
  } else {
    audit.prefix_estimates = {audit.estimate};
  }
  return audit;
}

H9Audit disorder_integrability_audit(const ModelPtr& model, const DisorderSpec& disorder,
                                     int populations, double weight_sup, double horizon, int draws,
                                     uint64_t seed) {
  return disorder_integrability_audit(
      [&model](const Disorder& w) { return model->declared_rates(w); }, disorder, populations,
      weight_sup, horizon, draws, seed);
}

}  // namespace mfn
