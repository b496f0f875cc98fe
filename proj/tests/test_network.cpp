#include "doctest.h"

#include <cmath>

#include "mfn/network.hpp"
#include "mfn/presets.hpp"
#include "mfn/sdde.hpp"
#include "toy_models.hpp"

using namespace mfn;

namespace {

// Store with the initial window and current row frozen at per-unit values.
EnsembleStore frozen_store(const TimeGrid& grid, const std::vector<double>& values) {
  EnsembleStore store(static_cast<int>(values.size()), grid, 1);
  for (int i = 0; i < store.rows(); ++i)
    for (int u = 0; u < store.units(); ++u) store.at(i, u)[0] = values[static_cast<size_t>(u)];
  return store;
}

}  // namespace

TEST_CASE("interaction terms vanish for zero coupling functionals") {
  TimeGrid grid(1.0, 4, 1.0);
  SpatialLayout lay = SpatialLayout::lattice(1, 3, 1);
  auto model = std::make_shared<mfn::testing::MeanShiftModel>();
  // identical states: electrical coupling of equal potentials cancels
  EnsembleStore store = frozen_store(grid, {2.5, 2.5, 2.5});
  const InteractionTerms terms =
      interaction_terms(model, lay, grid, store, grid.time_zero_index(), lay.sites()[0], Disorder{});
  CHECK(terms.drift[0] == doctest::Approx(0.0));
  CHECK(terms.diffusion[0].squared_frobenius() == 0.0);
  CHECK(terms.jump_compensator[0][0] == 0.0);
}

TEST_CASE("two frozen particles average their delayed values") {
  TimeGrid grid(1.0, 4, 1.0);
  SpatialLayout lay = SpatialLayout::lattice(1, 2, 1);
  auto model = std::make_shared<mfn::testing::DelayedValueModel>();
  EnsembleStore store = frozen_store(grid, {1.0, 3.0});
  const InteractionTerms terms =
      interaction_terms(model, lay, grid, store, grid.time_zero_index(), lay.sites()[0], Disorder{});
  CHECK(terms.drift[0] == doctest::Approx(2.0));  // (1 + 3) / 2 with S = 2
}

TEST_CASE("fhn single-cell aggregate reproduces the direct sum by hand") {
  TimeGrid grid(1.0, 4, 1.0);
  SpatialLayout lay = SpatialLayout::lattice(1, 3, 1);
  FhnParams p;
  p.a1 = 0.7;
  p.a2 = 0.0;
  p.eta0 = 0.0;
  ModelPtr model = make_fhn_model(p);
  EnsembleStore store(3, grid, 2);
  const double vals[3] = {1.0, 2.0, 3.0};
  for (int i = 0; i < store.rows(); ++i)
    for (int u = 0; u < 3; ++u) {
      store.at(i, u)[0] = vals[u];
      store.at(i, u)[1] = 0.0;
    }
  const Site receiver = lay.sites()[0];
  const InteractionTerms fast =
      interaction_terms(model, lay, grid, store, grid.time_zero_index(), receiver, Disorder{});
  const InteractionTerms direct = interaction_terms(model, lay, grid, store,
                                                    grid.time_zero_index(), receiver, Disorder{},
                                                    /*force_direct=*/true);
  const double expected = 0.7 * ((1.0 + 2.0 + 3.0) / 3.0 - 1.0);
  CHECK(fast.drift[0] == doctest::Approx(expected));
  CHECK(direct.drift[0] == doctest::Approx(expected));
  CHECK(fast.drift[0] == doctest::Approx(direct.drift[0]).epsilon(1e-14));
}

TEST_CASE("N=1 network without coupling reduces to the single-path engine") {
  LinearParams lp;
  lp.sigma = 1.0;
  lp.c_jump = 0.5;
  lp.nu_total = 2.0;
  ModelPtr model = make_linear_model(lp);
  TimeGrid grid(1.0, 20, 1.0);
  SpatialLayout lay = SpatialLayout::lattice(1, 1, 1);
  NetworkOptions opts;
  opts.run_seed = 4242;
  const NetworkResult net = simulate_network(model, lay, grid, Disorder{}, opts);

  SddePathSpec spec;
  spec.run_seed = 4242;
  spec.particle = 0;
  const Trajectory single = simulate_sdde(model, grid, lay.sites()[0], Disorder{}, spec);
  for (int i = 0; i <= grid.num_steps; ++i)
    CHECK(net.store.at(i, 0)[0] == single.row(i)[0]);  // bit-identical
}

TEST_CASE("deterministic fhn network with identical initial data tracks the reference recursion") {
  FhnParams p;
  p.lambda2 = 0.0;  // no diffusion
  p.a2 = 0.0;       // no interaction diffusion
  p.eta0 = 0.0;     // no interaction jumps
  p.init_v_sd = 0.0;
  p.init_w_sd = 0.0;
  p.init_v_mean = 1.0;
  p.init_w_mean = 0.0;
  ModelPtr model = make_fhn_model(p);
  TimeGrid grid(1.0, 10, 2.0);
  SpatialLayout lay = SpatialLayout::lattice(1, 4, 1);
  NetworkOptions opts;
  opts.run_seed = 5;
  const NetworkResult net = simulate_network(model, lay, grid, Disorder{}, opts);

  // all particles identical
  for (int i = 0; i <= grid.num_steps; ++i)
    for (int u = 1; u < 4; ++u) {
      CHECK(net.store.at(i, u)[0] == net.store.at(i, 0)[0]);
      CHECK(net.store.at(i, u)[1] == net.store.at(i, 0)[1]);
    }

  // reference explicit recursion: with all particles equal the sum collapses
  // to the self term, i.e. coupling to the particle's own delayed voltage
  std::vector<double> window(static_cast<size_t>(grid.steps_per_delay + 1), 1.0);
  double w = 0.0;
  for (int i = grid.time_zero_index(); i <= grid.num_steps; ++i) {
    const double v = window.back();
    CHECK(net.store.at(i, 0)[0] == doctest::Approx(v).epsilon(1e-12));
    CHECK(net.store.at(i, 0)[1] == doctest::Approx(w).epsilon(1e-12));
    if (i == grid.num_steps) break;
    const double coupling = p.a1 * (window.front() - v);
    const double nv = v + grid.dt * (-v * v * v / 3.0 + v - w + p.lambda1 + coupling);
    const double nw = w + grid.dt * (p.lambda3 * (v + p.lambda4 - p.lambda5 * w));
    window.erase(window.begin());
    window.push_back(nv);
    w = nw;
  }
}

TEST_CASE("exchangeability: permuting particle keys permutes trajectories") {
  FhnParams p;
  ModelPtr model = make_fhn_model(p);
  TimeGrid grid(1.0, 8, 1.0);
  SpatialLayout lay = SpatialLayout::lattice(1, 6, 1);
  NetworkOptions base;
  base.run_seed = 77;
  const NetworkResult a = simulate_network(model, lay, grid, Disorder{}, base);

  const std::vector<uint32_t> perm = {3, 0, 5, 1, 4, 2};
  NetworkOptions permuted = base;
  permuted.particle_keys = perm;
  const NetworkResult b = simulate_network(model, lay, grid, Disorder{}, permuted);

  for (int i = 0; i <= grid.num_steps; ++i)
    for (int u = 0; u < 6; ++u)
      for (int k = 0; k < 2; ++k) {
        const double want = a.store.at(i, static_cast<int>(perm[static_cast<size_t>(u)]))[k];
        const double got = b.store.at(i, u)[k];
        CHECK(got == doctest::Approx(want).epsilon(1e-12));
      }
}

TEST_CASE("antisymmetric coupling conserves the state sum") {
  auto model = std::make_shared<mfn::testing::MeanShiftModel>();
  model->init_value = 0.75;
  TimeGrid grid(1.0, 10, 2.0);
  SpatialLayout lay = SpatialLayout::lattice(1, 8, 1);
  NetworkOptions opts;
  opts.run_seed = 9;
  const NetworkResult net = simulate_network(model, lay, grid, Disorder{}, opts);
  double sum0 = 0.0;
  for (int u = 0; u < 8; ++u) sum0 += net.store.at(0, u)[0];
  for (int i = 1; i <= grid.num_steps; ++i) {
    double sum = 0.0;
    for (int u = 0; u < 8; ++u) sum += net.store.at(i, u)[0];
    CHECK(std::abs(sum - sum0) <= 1e-10 * std::abs(sum0) * i);
  }
}

TEST_CASE("fast pairwise reduction matches the direct quadratic sum") {
  FhnParams p;  // all channels active
  ModelPtr model = make_fhn_model(p);
  TimeGrid grid(1.0, 10, 1.0);
  SpatialLayout lay = SpatialLayout::lattice(1, 32, 1);
  NetworkOptions fast;
  fast.run_seed = 1234;
  NetworkOptions direct = fast;
  direct.force_direct = true;
  const NetworkResult a = simulate_network(model, lay, grid, Disorder{}, fast);
  const NetworkResult b = simulate_network(model, lay, grid, Disorder{}, direct);
  double max_rel = 0.0;
  for (int i = 0; i <= grid.num_steps; ++i)
    for (int u = 0; u < 32; ++u)
      for (int k = 0; k < 2; ++k) {
        const double x = a.store.at(i, u)[k];
        const double y = b.store.at(i, u)[k];
        max_rel = std::max(max_rel, std::abs(x - y) / (1.0 + std::abs(y)));
      }
  CHECK(max_rel < 1e-12);
}

TEST_CASE("a model without declared separability falls back to the direct path") {
  auto model = std::make_shared<mfn::testing::MeanShiftModel>();
  TimeGrid grid(1.0, 5, 1.0);
  SpatialLayout lay = SpatialLayout::lattice(1, 5, 1);
  NetworkOptions fast;
  fast.run_seed = 11;
  NetworkOptions direct = fast;
  direct.force_direct = true;
  const NetworkResult a = simulate_network(model, lay, grid, Disorder{}, fast);
  const NetworkResult b = simulate_network(model, lay, grid, Disorder{}, direct);
  CHECK(a.store.data() == b.store.data());  // same route, bit-identical
}

TEST_CASE("self-exclusion switch removes the diagonal term") {
  auto model = std::make_shared<mfn::testing::DelayedValueModel>();
  TimeGrid grid(1.0, 4, 1.0);
  SpatialLayout lay = SpatialLayout::lattice(1, 2, 1);
  EnsembleStore store = frozen_store(grid, {1.0, 3.0});
  const InteractionTerms with_self = interaction_terms(
      model, lay, grid, store, grid.time_zero_index(), lay.sites()[0], Disorder{});
  const InteractionTerms without_self = interaction_terms(
      model, lay, grid, store, grid.time_zero_index(), lay.sites()[0], Disorder{}, false, true);
  CHECK(with_self.drift[0] == doctest::Approx(2.0));
  CHECK(without_self.drift[0] == doctest::Approx(1.5));  // only the other particle, weight 1/S
}

TEST_CASE("layout ratio audit and weight bound for lattice layouts") {
  SpatialLayout lay = SpatialLayout::lattice(2, 12, 3);
  for (const auto& r : lay.ratio_audit()) {
    CHECK(r.ratio == doctest::Approx(r.mass));  // defaults: count/S == mass exactly
  }
  CHECK(lay.weight_bound() == doctest::Approx(2.0));  // two populations, each count^2/S^2 = 1
}

TEST_CASE("network blow-up carries particle and step context") {
  ModelPtr model = make_counterexample_model(CounterexampleParams{2.0});
  TimeGrid grid(1.0, 10, 20.0);
  SpatialLayout lay = SpatialLayout::lattice(1, 2, 1);
  NetworkOptions opts;
  opts.r_guard = 50.0;
  CHECK_THROWS_AS(simulate_network(model, lay, grid, Disorder{}, opts), BlowUpError);
}

TEST_CASE("two-population network: fast path equals direct and streams stay separate") {
  FhnParams p;
  ModelPtr model = make_fhn_model(p);
  TimeGrid grid(1.0, 8, 1.0);
  SpatialLayout lay = SpatialLayout::lattice(2, 6, 1);
  REQUIRE(lay.populations() == 2);
  NetworkOptions fast;
  fast.run_seed = 2024;
  NetworkOptions direct = fast;
  direct.force_direct = true;
  const NetworkResult a = simulate_network(model, lay, grid, Disorder{}, fast);
  const NetworkResult b = simulate_network(model, lay, grid, Disorder{}, direct);
  double max_rel = 0.0;
  for (int i = 0; i <= grid.num_steps; ++i)
    for (int u = 0; u < lay.num_sites(); ++u)
      for (int k = 0; k < 2; ++k)
        max_rel = std::max(max_rel, std::abs(a.store.at(i, u)[k] - b.store.at(i, u)[k]) /
                                        std::max(1.0, std::abs(b.store.at(i, u)[k])));
  CHECK(max_rel < 1e-12);

  // the two populations see different interaction fields: trajectories of
  // corresponding particles differ even though local streams are keyed the
  // same way
  bool differ = false;
  for (int i = grid.time_zero_index() + 1; i <= grid.num_steps; ++i)
    differ = differ || a.store.at(i, 0)[0] != a.store.at(i, 6)[0];
  CHECK(differ);
}

TEST_CASE("lattice with more cells than sites leaves empty cells consistent") {
  SpatialLayout lay = SpatialLayout::lattice(1, 2, 4);
  CHECK(lay.num_sites() == 2);
  int populated = 0;
  for (const auto& r : lay.ratio_audit())
    if (r.ratio > 0) ++populated;
  CHECK(populated == 2);
  lay.validate();
}
