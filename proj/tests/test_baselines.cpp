#include "doctest.h"

#include <cmath>
#include <numbers>

#include "glosa/baselines.hpp"
#include "glosa/rng.hpp"

using namespace glosa;

namespace {

// Independent route: per-frequency least squares on [cos, sin] columns via the
// 2x2 normal equations. The tau-offset form must agree with half the explained
// sum of squares.
double ls_power_oracle(const Record& r, double w) {
  double cc = 0.0, cs = 0.0, ss = 0.0, yc = 0.0, ys = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double c = std::cos(w * r.times[i]), s = std::sin(w * r.times[i]);
    cc += c * c;
    cs += c * s;
    ss += s * s;
    yc += r.values[i] * c;
    ys += r.values[i] * s;
  }
  const double det = cc * ss - cs * cs;
  if (std::abs(det) < 1e-14) return 0.0;
  const double a = (ss * yc - cs * ys) / det;
  const double b = (cc * ys - cs * yc) / det;
  return 0.5 * (a * yc + b * ys);
}

Record uniform_sinusoid(double omega, double rho, double phi, int n) {
  std::vector<double> t(n), v(n);
  for (int i = 0; i < n; ++i) {
    t[i] = i;
    v[i] = rho * std::cos(omega * i + phi);
  }
  return Record("u", std::move(t), std::move(v));
}

} // namespace

TEST_CASE("lomb-scargle peaks at the true frequency") {
  const double w0 = 0.5236; // 2*pi/12
  auto r = uniform_sinusoid(w0, 1.0, 0.4, 64);
  std::vector<double> grid;
  for (double w = 0.05; w <= 1.5; w += 0.0025) grid.push_back(w);
  grid.push_back(w0); // ensure exact hit
  std::sort(grid.begin(), grid.end());
  auto est = lomb_scargle(r, grid);
  std::size_t arg = 0;
  for (std::size_t j = 1; j < est.power.size(); ++j)
    if (est.power[j] > est.power[arg]) arg = j;
  CHECK(est.grid[arg] == doctest::Approx(w0).epsilon(1e-9));
}

TEST_CASE("lomb-scargle of the zero record is zero") {
  Record r("z", {0.0, 1.3, 2.9, 4.1}, {0.0, 0.0, 0.0, 0.0});
  auto est = lomb_scargle(r, {0.1, 0.5, 1.0});
  for (double p : est.power) CHECK(p == 0.0);
}

TEST_CASE("lomb-scargle rejects omega = 0") {
  Record r("r", {0.0, 1.0, 2.0}, {1.0, -1.0, 0.5});
  CHECK_THROWS_AS(lomb_scargle(r, {0.0, 0.5}), ArgumentError);
}

TEST_CASE("lomb-scargle matches the least-squares oracle") {
  Rng rng(77);
  std::vector<double> times, values;
  double t = 0.0;
  for (int i = 0; i < 40; ++i) {
    t += rng.uniform(0.3, 2.5);
    times.push_back(t);
    values.push_back(rng.normal(0.0, 1.0) + std::cos(0.7 * t));
  }
  Record r("r", times, values);
  std::vector<double> grid;
  for (double w = 0.07; w < 2.0; w += 0.13) grid.push_back(w);
  auto est = lomb_scargle(r, grid);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double want = ls_power_oracle(r, grid[j]);
    CHECK(est.power[j] == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("lomb-scargle is invariant to a global time shift") {
  Rng rng(78);
  std::vector<double> times, values;
  double t = 0.0;
  for (int i = 0; i < 30; ++i) {
    t += rng.uniform(0.3, 2.0);
    times.push_back(t);
    values.push_back(std::cos(0.9 * t + 0.3) + 0.2 * rng.normal(0.0, 1.0));
  }
  Record r("r", times, values);
  std::vector<double> shifted_times = times;
  for (auto& x : shifted_times) x += 37.25;
  Record rs("s", shifted_times, values);

  std::vector<double> grid;
  for (double w = 0.1; w < 1.8; w += 0.095) grid.push_back(w);
  auto p1 = lomb_scargle(r, grid);
  auto p2 = lomb_scargle(rs, grid);
  for (std::size_t j = 0; j < grid.size(); ++j)
    CHECK(p1.power[j] == doctest::Approx(p2.power[j]).epsilon(1e-9));
}

TEST_CASE("mean periodogram") {
  auto r = uniform_sinusoid(0.6, 1.0, 0.1, 32);
  std::vector<double> grid;
  for (double w = 0.1; w < 1.5; w += 0.05) grid.push_back(w);

  // identical records: mean equals the single-record case
  Record r2 = r;
  r2.id = "u2";
  auto single = mean_periodogram(RecordSet({r}), grid);
  auto both = mean_periodogram(RecordSet({r, r2}), grid);
  for (std::size_t j = 0; j < grid.size(); ++j)
    CHECK(both.power[j] == doctest::Approx(single.power[j]).epsilon(1e-12));

  // a zero record halves the mean
  Record z("z", r.times, std::vector<double>(r.size(), 0.0));
  auto half = mean_periodogram(RecordSet({r, z}), grid);
  for (std::size_t j = 0; j < grid.size(); ++j)
    CHECK(half.power[j] == doctest::Approx(0.5 * single.power[j]).epsilon(1e-12));

  // random set: plain arithmetic mean of standardized periodograms
  Rng rng(79);
  std::vector<Record> recs;
  for (int m = 0; m < 3; ++m) {
    std::vector<double> times, values;
    double t = 0.0;
    for (int i = 0; i < 25; ++i) {
      t += rng.uniform(0.4, 2.0);
      times.push_back(t);
      values.push_back(rng.normal(0.5, 2.0));
    }
    recs.emplace_back("m" + std::to_string(m), times, values);
  }
  RecordSet rs(recs);
  auto got = mean_periodogram(rs, grid);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    double want = 0.0;
    for (const auto& rec : recs) want += lomb_scargle(rec.standardized(), grid).power[j];
    want /= 3.0;
    CHECK(got.power[j] == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("stacked periodogram") {
  std::vector<double> grid;
  for (double w = 0.1; w < 1.5; w += 0.02) grid.push_back(w);

  auto r = uniform_sinusoid(0.6, 1.0, 0.0, 32);
  auto single = stacked_periodogram(RecordSet({r}), grid);
  auto direct = lomb_scargle(r.standardized(), grid);
  for (std::size_t j = 0; j < grid.size(); ++j) CHECK(single.power[j] == direct.power[j]);

  // coherent stacking: identical in-phase records at interleaved times
  const double w0 = 0.6;
  std::vector<double> t1, v1, t2, v2in, v2anti;
  for (int i = 0; i < 48; ++i) {
    t1.push_back(i);
    v1.push_back(std::cos(w0 * i));
    const double u = i + 0.5;
    t2.push_back(u);
    v2in.push_back(std::cos(w0 * u));
    v2anti.push_back(std::cos(w0 * u + std::numbers::pi));
  }
  RecordSet in_phase({Record("a", t1, v1), Record("b", t2, v2in)});
  RecordSet anti_phase({Record("a", t1, v1), Record("b", t2, v2anti)});

  auto grid_hit = grid;
  grid_hit.push_back(w0);
  std::sort(grid_hit.begin(), grid_hit.end());
  auto at = [&](const PeriodogramEstimate& e, double w) {
    for (std::size_t j = 0; j < e.grid.size(); ++j)
      if (e.grid[j] == w) return e.power[j];
    return -1.0;
  };
  auto p_in = stacked_periodogram(in_phase, grid_hit);
  auto p_anti = stacked_periodogram(anti_phase, grid_hit);
  auto p_one = stacked_periodogram(RecordSet({Record("a", t1, v1)}), grid_hit);

  CHECK(at(p_in, w0) >= at(p_one, w0) * (1.0 - 1e-12));
  // destructive stacking: the out-of-phase pair loses the peak
  CHECK(at(p_anti, w0) < at(p_in, w0) * 0.05);
}

TEST_CASE("pick_peaks") {
  PeriodogramEstimate est;
  for (double w = 0.1; w <= 2.05; w += 0.1) est.grid.push_back(w);
  est.power.assign(est.grid.size(), 0.1);
  est.power[3] = 1.0;  // w = 0.4
  est.power[10] = 2.0; // w = 1.1
  est.power[15] = 0.5; // w = 1.6

  auto two = pick_peaks(est, 2);
  REQUIRE(two.size() == 2);
  CHECK(two[0] == doctest::Approx(0.4));
  CHECK(two[1] == doctest::Approx(1.1));

  auto three = pick_peaks(est, 3);
  CHECK(three[2] == doctest::Approx(1.6));

  try {
    pick_peaks(est, 4);
    FAIL("expected PeakCountError");
  } catch (const PeakCountError& e) {
    CHECK(e.requested() == 4);
    CHECK(e.found_peaks().size() == 3);
  }

  // single-sinusoid periodogram: the peak is the grid point nearest the truth
  auto r = uniform_sinusoid(0.71, 1.0, 0.2, 64);
  std::vector<double> grid;
  for (double w = 0.05; w < 1.6; w += 0.004) grid.push_back(w);
  auto ls = lomb_scargle(r, grid);
  auto peak = pick_peaks(ls, 1);
  CHECK(std::abs(peak[0] - 0.71) <= 0.004);
}

TEST_CASE("default grid") {
  Record r("r", {0.0, 50.0, 400.0}, {0.1, 0.2, 0.3});
  auto grid = default_grid(RecordSet({r}), 0.785);
  CHECK(grid.front() > 0.0);
  CHECK(grid.back() <= 0.785 + 1e-12);
  const double rayleigh = 2.0 * std::numbers::pi / 400.0;
  CHECK(grid[1] - grid[0] == doctest::Approx(rayleigh / 4.0));
  CHECK(grid.size() <= 100000);
}
