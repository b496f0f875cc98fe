#include "doctest.h"

#include <cmath>

#include "mfn/meanfield.hpp"
#include "mfn/presets.hpp"
#include "mfn/sdde.hpp"
#include "toy_models.hpp"

using namespace mfn;

namespace {

SpatialLayout two_cell_layout(double mass0, double mass1, int sites_per_cell = 1) {
  SpatialLayout lay;
  Population p;
  p.total_mass = mass0 + mass1;
  Cell c0, c1;
  c0.box.lo = Pos::scalar(0.0);
  c0.box.hi = Pos::scalar(0.5);
  c0.mass = mass0;
  c1.box.lo = Pos::scalar(0.5);
  c1.box.hi = Pos::scalar(1.0);
  c1.mass = mass1;
  p.cells = {c0, c1};
  p.count = 2 * sites_per_cell;
  p.weight = p.count;
  lay.add_population(p);
  for (int m = 0; m < 2; ++m)
    for (int i = 0; i < sites_per_cell; ++i) {
      Site s;
      s.population = 0;
      s.cell = m;
      s.cell_frac = (i + 0.5) / sites_per_cell;
      s.pos = Pos::scalar(0.5 * m + 0.5 * s.cell_frac);
      lay.add_site(s);
    }
  lay.validate();
  return lay;
}

EnsembleStore frozen_copies(const TimeGrid& grid, const std::vector<double>& values) {
  EnsembleStore store(static_cast<int>(values.size()), grid, 1);
  for (int i = 0; i < store.rows(); ++i)
    for (int u = 0; u < store.units(); ++u) store.at(i, u)[0] = values[static_cast<size_t>(u)];
  return store;
}

std::vector<Site> copy_sites_single_cell(const SpatialLayout& lay, int count) {
  std::vector<Site> sites;
  for (int i = 0; i < count; ++i) {
    Site s;
    s.population = 0;
    s.cell = 0;
    s.pos = lay.cell(0, 0).box.midpoint();
    s.index = i;
    sites.push_back(s);
  }
  return sites;
}

}  // namespace

TEST_CASE("empirical expectation: constant functionals are exact for any M") {
  class ConstModel : public mfn::testing::DelayedValueModel {
   public:
    void coupling_drift(double, const Site&, const Site&, const double*, const SegmentView&,
                        const Disorder&, Vec& out) const override {
      out[0] = 2.75;
    }
  };
  auto model = std::make_shared<ConstModel>();
  TimeGrid grid(1.0, 4, 1.0);
  SpatialLayout lay = SpatialLayout::lattice(1, 1, 1);
  const double x = 0.3;
  for (int m : {2, 5, 17}) {
    std::vector<double> vals(static_cast<size_t>(m));
    for (int i = 0; i < m; ++i) vals[static_cast<size_t>(i)] = i;
    EnsembleStore copies = frozen_copies(grid, vals);
    const Vec v = empirical_expectation_drift(model, lay, grid, copies,
                                              copy_sites_single_cell(lay, m),
                                              grid.time_zero_index(), lay.sites()[0], &x,
                                              Disorder{});
    CHECK(v[0] == 2.75);  // exact, not approximate
  }
}

TEST_CASE("empirical expectation: frozen copies {1,3} on a unit-mass cell give 2") {
  auto model = std::make_shared<mfn::testing::DelayedValueModel>();
  TimeGrid grid(1.0, 4, 1.0);
  SpatialLayout lay = SpatialLayout::lattice(1, 1, 1);
  EnsembleStore copies = frozen_copies(grid, {1.0, 3.0});
  const double x = 0.0;
  const Vec v = empirical_expectation_drift(model, lay, grid, copies,
                                            copy_sites_single_cell(lay, 2),
                                            grid.time_zero_index(), lay.sites()[0], &x, Disorder{});
  CHECK(v[0] == doctest::Approx(2.0));
}

TEST_CASE("empirical expectation standard error shrinks like 1/sqrt(M)") {
  auto model = std::make_shared<mfn::testing::DelayedValueModel>();
  TimeGrid grid(1.0, 4, 1.0);
  SpatialLayout lay = SpatialLayout::lattice(1, 1, 1);
  const double x = 0.0;
  auto estimator_sd = [&](int m, uint64_t seed_base) {
    PowerSums across;
    for (int s = 0; s < 400; ++s) {
      std::vector<double> vals(static_cast<size_t>(m));
      CounterRng rng(mix_seed(seed_base, static_cast<uint64_t>(s)), 0, 0, 0);
      for (auto& v : vals) v = rng.next_normal();
      EnsembleStore copies = frozen_copies(grid, vals);
      across.add(empirical_expectation_drift(model, lay, grid, copies,
                                             copy_sites_single_cell(lay, m),
                                             grid.time_zero_index(), lay.sites()[0], &x,
                                             Disorder{})[0]);
    }
    return std::sqrt(across.central2());
  };
  const double sd_m = estimator_sd(32, 101);
  const double sd_2m = estimator_sd(64, 202);
  const double ratio = sd_m / sd_2m;
  CHECK(ratio > 1.15);
  CHECK(ratio < 1.75);
}

TEST_CASE("degenerate mass on one cell reduces to single-cell averaging") {
  auto model = std::make_shared<mfn::testing::DelayedValueModel>();
  TimeGrid grid(1.0, 4, 1.0);
  SpatialLayout degenerate = two_cell_layout(1.0, 0.0);
  SpatialLayout single = SpatialLayout::lattice(1, 2, 1);
  // copies at the first cell's midpoint either way
  std::vector<Site> sites = copy_sites_single_cell(degenerate, 4);
  EnsembleStore copies = frozen_copies(grid, {1.0, 2.0, 3.0, 6.0});
  const double x = 0.0;
  const Vec a = empirical_expectation_drift(model, degenerate, grid, copies, sites,
                                            grid.time_zero_index(), degenerate.sites()[0], &x,
                                            Disorder{});
  const Vec b = empirical_expectation_drift(model, single, grid, copies,
                                            copy_sites_single_cell(single, 4),
                                            grid.time_zero_index(), single.sites()[0], &x,
                                            Disorder{});
  CHECK(a[0] == doctest::Approx(3.0));
  CHECK(a[0] == doctest::Approx(b[0]));
}

TEST_CASE("fhn coupling at the empirical fixed point contributes no drift") {
  FhnParams p;
  ModelPtr model = make_fhn_model(p);
  TimeGrid grid(1.0, 4, 1.0);
  SpatialLayout lay = SpatialLayout::lattice(1, 1, 1);
  EnsembleStore copies(3, grid, 2);
  for (int i = 0; i < copies.rows(); ++i)
    for (int u = 0; u < 3; ++u) {
      copies.at(i, u)[0] = 0.8;  // E[V_delayed] = 0.8
      copies.at(i, u)[1] = 0.1;
    }
  const double x[2] = {0.8, -0.4};  // receiver V equals the delayed mean
  const Vec v = empirical_expectation_drift(model, lay, grid, copies,
                                            copy_sites_single_cell(lay, 3),
                                            grid.time_zero_index(), lay.sites()[0], x, Disorder{});
  CHECK(v[0] == doctest::Approx(0.0));
  CHECK(v[1] == doctest::Approx(0.0));
}

TEST_CASE("copy planning follows masses and rejects starved cells") {
  SpatialLayout lay = two_cell_layout(0.75, 0.25);
  const std::vector<Site> sites = plan_copy_sites(lay, 8);
  int in0 = 0, in1 = 0;
  for (const auto& s : sites) (s.cell == 0 ? in0 : in1)++;
  CHECK(in0 == 6);
  CHECK(in1 == 2);
  CHECK(sites.size() == 8);
  // a positive-mass cell must get at least 2 copies
  CHECK_THROWS_AS(plan_copy_sites(two_cell_layout(0.9, 0.1), 4), ConfigError);
  CHECK_THROWS_AS(plan_copy_sites(lay, 1), ConfigError);
}

TEST_CASE("decoupled mean-field runs are bit-identical to single paths and M-invariant") {
  LinearParams lp;
  lp.sigma = 1.0;
  lp.c_jump = 0.4;
  lp.nu_total = 1.5;
  ModelPtr model = make_linear_model(lp);  // b_delay = 0: no coupling
  TimeGrid grid(1.0, 16, 1.0);
  SpatialLayout lay = SpatialLayout::lattice(1, 3, 1);
  std::vector<Representative> reps;
  for (const auto& s : lay.sites()) reps.push_back({s, static_cast<uint32_t>(s.index)});

  MeanFieldOptions o16;
  o16.run_seed = 31337;
  o16.copies_per_population = 16;
  MeanFieldOptions o64 = o16;
  o64.copies_per_population = 64;
  const MeanFieldResult a = simulate_mean_field(model, lay, grid, Disorder{}, reps, o16);
  const MeanFieldResult b = simulate_mean_field(model, lay, grid, Disorder{}, reps, o64);
  CHECK(a.copy_count == 0);  // no coupling: no copies simulated

  for (size_t r = 0; r < reps.size(); ++r) {
    SddePathSpec spec;
    spec.run_seed = 31337;
    spec.particle = reps[r].particle_key;
    const Trajectory single = simulate_sdde(model, grid, reps[r].site, Disorder{}, spec);
    for (int i = 0; i <= grid.num_steps; ++i) {
      CHECK(a.rep_at(i, static_cast<int>(r))[0] == single.row(i)[0]);
      CHECK(b.rep_at(i, static_cast<int>(r))[0] == single.row(i)[0]);
    }
  }
}

TEST_CASE("mean-shift fixed point: all mass at the equilibrium stays put") {
  auto model = std::make_shared<mfn::testing::SeparableMeanShiftModel>();
  model->init_value = 1.0;
  TimeGrid grid(1.0, 8, 2.0);
  SpatialLayout lay = SpatialLayout::lattice(1, 2, 1);
  std::vector<Representative> reps;
  for (const auto& s : lay.sites()) reps.push_back({s, static_cast<uint32_t>(s.index)});
  MeanFieldOptions opts;
  opts.copies_per_population = 8;
  const MeanFieldResult r = simulate_mean_field(model, lay, grid, Disorder{}, reps, opts);
  for (int i = 0; i <= grid.num_steps; ++i) {
    for (int u = 0; u < r.store.units(); ++u) CHECK(r.store.at(i, u)[0] == 1.0);
  }
}

TEST_CASE("linear mean-field copy mean follows the delay ODE oracle") {
  LinearParams lp;
  lp.a = 1.0;
  lp.b_delay = 0.5;
  lp.sigma = 0.4;
  lp.x0 = 1.0;
  ModelPtr model = make_linear_model(lp);
  TimeGrid grid(1.0, 25, 2.0);
  SpatialLayout lay = SpatialLayout::lattice(1, 1, 1);
  const int M = 512;

  // average the copy mean over a few independent runs for an SE estimate
  const int runs = 8;
  std::vector<PowerSums> mean_acc(static_cast<size_t>(grid.rows()));
  for (int run = 0; run < runs; ++run) {
    MeanFieldOptions opts;
    opts.run_seed = mix_seed(606, static_cast<uint64_t>(run));
    opts.copies_per_population = M;
    const MeanFieldResult r = simulate_mean_field(model, lay, grid, Disorder{}, {}, opts);
    REQUIRE(r.copy_count == M);
    for (int i = 0; i < grid.rows(); ++i) {
      double m = 0.0;
      for (int u = 0; u < M; ++u) m += r.store.at(i, u)[0];
      mean_acc[static_cast<size_t>(i)].add(m / M);
    }
  }
  const int mrows = grid.num_steps - grid.time_zero_index() + 1;
  const std::vector<double> oracle =
      linear_delay_ode_mean(lp.a, lp.b_delay, 1.0, lp.x0, grid.dt, mrows, 64);
  for (int i = grid.time_zero_index(); i <= grid.num_steps; ++i) {
    const auto& acc = mean_acc[static_cast<size_t>(i)];
    const double m = oracle[static_cast<size_t>(i - grid.time_zero_index())];
    CHECK(std::abs(acc.mean() - m) < 3.0 * acc.se_mean() + 8e-3);
  }
}

TEST_CASE("moment bound C1 formula values and domain errors") {
  RateSet zero;
  CHECK(moment_bound_c1(1.0, zero, 1, 0.0) == doctest::Approx(std::exp(1.0)));
  CHECK(moment_bound_c1(0.0, zero, 1, 2.0) == doctest::Approx(3.0));
  RateSet r;
  r.K = PiecewiseRate::constant(1.0);
  r.Kbar = PiecewiseRate::constant(1.0);
  CHECK(moment_bound_c1(0.5, r, 2, 2.0) == doctest::Approx(3.0 * std::exp(4.5)));
  CHECK_THROWS_AS(moment_bound_c1(-1.0, zero, 1, 0.0), std::domain_error);
  CHECK_THROWS_AS(moment_bound_c1(1.0, zero, 0, 0.0), std::domain_error);
  CHECK_THROWS_AS(moment_bound_c1(1.0, zero, 1, -0.5), std::domain_error);
}

TEST_CASE("continuity bound C2 formula values and monotonicity") {
  RateSet zero;
  CHECK(continuity_bound_c2(0.0, zero, 1, 1.0) == doctest::Approx(4.0));
  CHECK(continuity_bound_c2(1.0, zero, 1, std::exp(1.0)) ==
        doctest::Approx(std::exp(1.0) * (1.0 + 3.0 * std::exp(1.0))));
  RateSet r;
  r.L = PiecewiseRate::constant(0.7);
  r.Lbar = PiecewiseRate::constant(0.2);
  double prev = 0.0;
  for (int i = 0; i <= 10; ++i) {
    const double t = 0.2 * i;
    const double c1 = moment_bound_c1(t, r, 1, 1.0);
    const double c2 = continuity_bound_c2(t, r, 1, c1);
    CHECK(c2 >= prev);
    prev = c2;
  }
  CHECK_THROWS_AS(continuity_bound_c2(-0.1, zero, 1, 1.0), std::domain_error);
}

TEST_CASE("fhn mean-field second moment respects the C1 bound") {
  FhnParams p;
  p.disorder_scale = 0.2;
  ModelPtr model = make_fhn_model(p);
  TimeGrid grid(1.0, 10, 1.0);
  SpatialLayout lay = SpatialLayout::lattice(1, 1, 1);
  for (uint32_t draw = 0; draw < 2; ++draw) {
    const NoiseStreamKey dkey{2025, StreamKind::disorder, draw, 0, 0};
    CounterRng rng = dkey.stream(0);
    DisorderSpec spec;
    spec.dist = DisorderSpec::Dist::normal;
    const Disorder omega = spec.sample(rng);
    MeanFieldOptions opts;
    opts.run_seed = mix_seed(2025, draw);
    opts.copies_per_population = 256;
    const MeanFieldResult r = simulate_mean_field(model, lay, grid, omega, {}, opts);
    const auto moments = ensemble_norm_moments(r.store, 0, r.copy_count);
    const RateSet rates = model->declared_rates(omega);
    double running = 0.0;
    for (int i = 0; i < grid.rows(); ++i) {
      const double t = std::max(0.0, grid.time_of(i));
      running = std::max(running, moments[static_cast<size_t>(i)].mean());
      const double bound = moment_bound_c1(t, rates, 1, model->initial_sup_second_moment());
      CHECK(running <= bound + 3.0 * moments[static_cast<size_t>(i)].se_mean());
    }
  }
}

TEST_CASE("same-cell representatives with shared streams stay C2-epsilon close") {
  FhnParams p;
  p.lambda1_spread = 0.05;  // the cell epsilon
  ModelPtr model = make_fhn_model(p);
  const double eps = model->cell_epsilon();
  TimeGrid grid(1.0, 10, 1.0);
  SpatialLayout lay = SpatialLayout::lattice(1, 8, 2);

  // one pair per cell: same streams (shared particle_key), extreme positions
  std::vector<Representative> reps;
  const auto& sites = lay.sites();
  for (int cell = 0; cell < 2; ++cell) {
    const Site* lo = nullptr;
    const Site* hi = nullptr;
    for (const auto& s : sites)
      if (s.cell == cell) {
        if (!lo || s.cell_frac < lo->cell_frac) lo = &s;
        if (!hi || s.cell_frac > hi->cell_frac) hi = &s;
      }
    reps.push_back({*lo, static_cast<uint32_t>(1000 + cell)});
    reps.push_back({*hi, static_cast<uint32_t>(1000 + cell)});
  }

  const int replicas = 32;
  std::vector<PowerSums> gap0(static_cast<size_t>(grid.rows()));
  std::vector<PowerSums> gap1(static_cast<size_t>(grid.rows()));
  Disorder omega;  // no disorder
  for (int rep = 0; rep < replicas; ++rep) {
    MeanFieldOptions opts;
    opts.run_seed = mix_seed(717, static_cast<uint64_t>(rep));
    opts.copies_per_population = 64;
    const MeanFieldResult r = simulate_mean_field(model, lay, grid, omega, reps, opts);
    for (int i = 0; i < grid.rows(); ++i) {
      for (int pair = 0; pair < 2; ++pair) {
        const double* a = r.rep_at(i, 2 * pair);
        const double* b = r.rep_at(i, 2 * pair + 1);
        double s = 0.0;
        for (int k = 0; k < 2; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
        (pair == 0 ? gap0 : gap1)[static_cast<size_t>(i)].add(s);
      }
    }
  }
  const RateSet rates = model->declared_rates(omega);
  for (int i = grid.time_zero_index(); i <= grid.num_steps; ++i) {
    const double t = grid.time_of(i);
    const double c1 = moment_bound_c1(t, rates, 1, model->initial_sup_second_moment());
    const double c2 = continuity_bound_c2(t, rates, 1, c1);
    for (const auto* g : {&gap0, &gap1}) {
      const auto& acc = (*g)[static_cast<size_t>(i)];
      CHECK(acc.mean() <= c2 * eps + 3.0 * acc.se_mean());
    }
  }
}

TEST_CASE("two-population mean-field run stays finite and honors the C1 bound") {
  FhnParams p;
  ModelPtr model = make_fhn_model(p);
  TimeGrid grid(1.0, 8, 1.0);
  SpatialLayout lay = SpatialLayout::lattice(2, 4, 1);
  std::vector<Representative> reps;
  for (const auto& s : lay.sites()) reps.push_back({s, static_cast<uint32_t>(s.index)});
  MeanFieldOptions opts;
  opts.run_seed = 99;
  opts.copies_per_population = 64;
  const MeanFieldResult r = simulate_mean_field(model, lay, grid, Disorder{}, reps, opts);
  CHECK(r.copy_count == 128);  // 64 per population
  const auto moments = ensemble_norm_moments(r.store, 0, r.copy_count);
  const RateSet rates = model->declared_rates(Disorder{});
  double running = 0.0;
  for (int i = 0; i < grid.rows(); ++i) {
    const double t = std::max(0.0, grid.time_of(i));
    running = std::max(running, moments[static_cast<size_t>(i)].mean());
    CHECK(running <= moment_bound_c1(t, rates, 2, model->initial_sup_second_moment()) +
                         3.0 * moments[static_cast<size_t>(i)].se_mean());
  }
}
