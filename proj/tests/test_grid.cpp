#include "doctest.h"

#include "mfn/grid.hpp"
#include "mfn/segment.hpp"

using namespace mfn;

TEST_CASE("grid derives dt and step counts") {
  TimeGrid g(1.0, 2, 1.0);
  CHECK(g.dt == doctest::Approx(0.5));
  CHECK(g.num_steps == 4);
  CHECK(g.time_of(0) == doctest::Approx(-1.0));
  CHECK(g.time_of(g.time_zero_index()) == doctest::Approx(0.0));
  CHECK(g.time_of(g.num_steps) == doctest::Approx(1.0));

  CHECK_THROWS_AS(TimeGrid(0.0, 2, 1.0), ConfigError);
  CHECK_THROWS_AS(TimeGrid(1.0, 0, 1.0), ConfigError);
  CHECK_THROWS_AS(TimeGrid(1.0, 2, -1.0), ConfigError);
}

TEST_CASE("kappa maps into the left grid point of the enclosing block") {
  CHECK(TimeGrid(1.0, 2, 2.0).kappa(0.6) == doctest::Approx(0.5));
  CHECK(TimeGrid(1.0, 2, 2.0).kappa(0.5) == doctest::Approx(0.0));
  CHECK(TimeGrid(2.0, 4, 4.0).kappa(2.0) == doctest::Approx(1.5));
  CHECK_THROWS_AS(TimeGrid(1.0, 2, 2.0).kappa(0.0), std::domain_error);
  CHECK_THROWS_AS(TimeGrid(1.0, 2, 2.0).kappa(-0.1), std::domain_error);
}

TEST_CASE("kappa is monotone and grid valued") {
  TimeGrid g(0.7, 3, 2.0);
  double prev = 0.0;
  for (int i = 1; i <= 300; ++i) {
    const double t = 2.0 * i / 300.0;
    const double k = g.kappa(t);
    CHECK(k >= prev);
    CHECK(k < t);
    CHECK(t <= k + g.dt + 1e-12);
    const double steps = k / g.dt;
    CHECK(std::abs(steps - std::round(steps)) < 1e-9);
    prev = k;
  }
}

TEST_CASE("delay integral point masses") {
  TimeGrid g(1.0, 2, 1.0);

  PathBuffer seg(2, 3);
  seg.row(2)[0] = 3.0;
  seg.row(2)[1] = 4.0;
  SegmentView v = seg.view();
  CHECK(delay_integral(v, nullptr, g, DelayMeasure::point(0.0)) == doctest::Approx(25.0));

  PathBuffer cseg(2, 3);
  cseg.set_constant(Vec{1.0, 0.0});
  SegmentView cv = cseg.view();
  CHECK(delay_integral(cv, nullptr, g, DelayMeasure::point(-1.0)) == doctest::Approx(2.0));

  SegmentView cv2 = cseg.view();
  CHECK(delay_integral(cv, &cv2, g, DelayMeasure{{{-1.0, 0.25}, {-0.5, 0.25}, {0.0, 0.5}}}) ==
        doctest::Approx(0.0));
}

TEST_CASE("delay integral constant segment per atom placement") {
  TimeGrid g(1.0, 4, 1.0);
  PathBuffer seg(1, 5);
  seg.set_constant(Vec{2.0});
  SegmentView v = seg.view();
  // Atom at 0 contributes |c|^2; interior/left atoms double it via the
  // right-limit term.
  CHECK(delay_integral(v, nullptr, g, DelayMeasure::point(0.0)) == doctest::Approx(4.0));
  CHECK(delay_integral(v, nullptr, g, DelayMeasure::point(-0.5)) == doctest::Approx(8.0));
  CHECK(delay_integral(v, nullptr, g, DelayMeasure{{{-1.0, 0.5}, {0.0, 0.5}}}) ==
        doctest::Approx(0.5 * 8.0 + 0.5 * 4.0));
}

TEST_CASE("delay integral rejects off-grid atoms and mismatched shapes") {
  TimeGrid g(1.0, 2, 1.0);
  PathBuffer seg(1, 3);
  SegmentView v = seg.view();
  CHECK_THROWS_AS(delay_integral(v, nullptr, g, DelayMeasure::point(-0.3)), ConfigError);

  PathBuffer other(2, 3);
  SegmentView ov = other.view();
  CHECK_THROWS_AS(delay_integral(v, &ov, g, DelayMeasure::point(0.0)), ShapeError);

  PathBuffer shorter(1, 2);
  SegmentView sv = shorter.view();
  CHECK_THROWS_AS(delay_integral(sv, nullptr, g, DelayMeasure::point(0.0)), ShapeError);
}

TEST_CASE("delay measure weights must sum to one") {
  DelayMeasure m{{{-0.5, 0.45}, {0.0, 0.45}}};
  CHECK_THROWS_WITH_AS(m.validate(1.0), doctest::Contains("delay_measure.weights"), ConfigError);
  DelayMeasure bad_offset{{{0.5, 1.0}}};
  CHECK_THROWS_WITH_AS(bad_offset.validate(1.0), doctest::Contains("delay_measure.offsets"),
                       ConfigError);
}

TEST_CASE("delay integral is nonnegative and vanishes only on zero atoms") {
  TimeGrid g(1.0, 4, 1.0);
  PathBuffer a(1, 5), b(1, 5);
  for (int j = 0; j < 5; ++j) {
    a.row(j)[0] = std::sin(1.0 + j);
    b.row(j)[0] = std::cos(2.0 + j);
  }
  SegmentView av = a.view(), bv = b.view();
  const DelayMeasure m{{{-1.0, 0.3}, {-0.25, 0.3}, {0.0, 0.4}}};
  const double val = delay_integral(av, &bv, g, m);
  CHECK(val >= 0.0);
  CHECK(val > 0.0);
  CHECK(delay_integral(av, &av, g, m) == 0.0);
}

TEST_CASE("segment ring buffer equals contiguous view") {
  // A ring with head in the middle must replay the same logical window.
  const int window = 4;
  std::vector<double> ring = {30.0, 40.0, 10.0, 20.0};  // head = 2 -> 10,20,30,40
  SegmentView rv(ring.data(), 1, window, 2, window);
  CHECK(rv.value(0)[0] == 10.0);
  CHECK(rv.value(1)[0] == 20.0);
  CHECK(rv.value(2)[0] == 30.0);
  CHECK(rv.value(3)[0] == 40.0);
  CHECK(rv.right_limit(0)[0] == 20.0);
  CHECK(rv.right_limit(3)[0] == 40.0);  // clamped at the last entry
  CHECK(rv.newest()[0] == 40.0);
  CHECK(rv.oldest()[0] == 10.0);
}

TEST_CASE("grid covers horizons that are not multiples of dt") {
  TimeGrid g(1.0, 4, 0.9);  // dt = 0.25, T = 0.9 -> last row beyond T
  CHECK(g.num_steps == 8);
  CHECK(g.time_of(g.num_steps) >= 0.9);
  CHECK(g.time_of(g.num_steps) == doctest::Approx(1.0));
  TimeGrid exact(1.0, 4, 1.0);
  CHECK(exact.num_steps == 8);
  CHECK(exact.time_of(exact.num_steps) == doctest::Approx(1.0));
}
