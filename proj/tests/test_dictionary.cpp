#include "doctest.h"

#include <cmath>
#include <complex>
#include <numbers>

#include "glosa/dictionary.hpp"
#include "glosa/rng.hpp"
#include "oracles.hpp"

using namespace glosa;

TEST_CASE("wideband entry closed form") {
  CHECK(wideband_entry(0.0, 0.1, 0.3).real() == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(wideband_entry(0.0, 0.1, 0.3).imag() == 0.0);

  CHECK_THROWS_AS(BandGrid({0.1}, {0.1}), ArgumentError);
  CHECK_THROWS_AS(BandGrid({0.3}, {0.1}), ArgumentError);

  Rng rng(11);
  for (int i = 0; i < 60; ++i) {
    const double t = rng.uniform(0.0, 500.0);
    const double ws = rng.uniform(0.0, 0.6);
    const double we = ws + rng.uniform(1e-4, 0.4);
    const auto got = wideband_entry(t, ws, we);
    const auto want = oracles::band_integral_quadrature(t, ws, we);
    CHECK(std::abs(got - want) <= 1e-10 * std::max(1.0, std::abs(want)));
  }
}

TEST_CASE("wideband entries stable for tiny t and tiny width") {
  const auto e1 = wideband_entry(1e-12, 0.2, 0.4);
  CHECK(e1.real() == doctest::Approx(0.2).epsilon(1e-9));
  const auto e2 = wideband_entry(300.0, 0.3, 0.3 + 1e-12);
  const auto want = oracles::band_integral_quadrature(300.0, 0.3, 0.3 + 1e-12);
  CHECK(std::abs(e2 - want) <= 1e-12 * std::abs(want) + 1e-25);
}

TEST_CASE("build_wideband shapes and values") {
  Record r("r", {0.0, 1.5, 4.0}, {0.1, 0.2, 0.3});
  RecordSet rs({r});
  BandGrid grid({0.0, 0.25}, {0.25, 0.5});
  auto dicts = build_wideband(rs, grid);
  REQUIRE(dicts.size() == 1);
  CHECK(dicts[0].atoms.rows() == 3);
  CHECK(dicts[0].atoms.cols() == 2);
  CHECK(dicts[0].atoms(0, 0).real() == doctest::Approx(0.25));
  for (int n = 0; n < 3; ++n)
    for (int c = 0; c < 2; ++c) {
      const auto want = oracles::band_integral_quadrature(r.times[n], grid.starts[c], grid.ends[c]);
      CHECK(std::abs(dicts[0].atoms(n, c) - want) <= 1e-10 * std::max(1.0, std::abs(want)));
    }
}

TEST_CASE("narrowband matrix") {
  Record one("one", {0.0, 1.0}, {0.0, 0.0});
  auto nb = build_narrowband(one, {0.5});
  CHECK(nb.columns(0, 0) == doctest::Approx(1.0));
  CHECK(nb.columns(0, 1) == doctest::Approx(0.0));

  Record r("r", {0.0, 1.0, 2.0}, {0.0, 0.0, 0.0});
  auto nb2 = build_narrowband(r, {std::numbers::pi});
  CHECK(nb2.columns(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(nb2.columns(1, 0) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(nb2.columns(2, 0) == doctest::Approx(1.0).epsilon(1e-12));
  for (int n = 0; n < 3; ++n) CHECK(std::abs(nb2.columns(n, 1)) < 1e-12);

  CHECK_THROWS_AS(build_narrowband(r, {0.4, 0.4}), ArgumentError);
  CHECK_THROWS_AS(build_narrowband(r, {0.0}), ArgumentError);

  Rng rng(5);
  std::vector<double> omegas{0.13, 0.47, 0.92};
  std::vector<double> times(6), values(6, 0.0);
  double t = 0.0;
  for (auto& x : times) {
    t += rng.uniform(0.1, 3.0);
    x = t;
  }
  auto nb3 = build_narrowband(Record("q", times, values), omegas);
  for (int n = 0; n < 6; ++n)
    for (int k = 0; k < 3; ++k) {
      CHECK(nb3.columns(n, 2 * k) == doctest::Approx(std::cos(omegas[k] * times[n])).epsilon(1e-14));
      CHECK(nb3.columns(n, 2 * k + 1) ==
            doctest::Approx(std::sin(omegas[k] * times[n])).epsilon(1e-14));
    }
}

TEST_CASE("refine_grid") {
  BandGrid one({0.0}, {1.0});
  auto fine = refine_grid(one, {0}, 4);
  REQUIRE(fine.size() == 4);
  CHECK(fine.starts[0] == doctest::Approx(0.0));
  CHECK(fine.ends[0] == doctest::Approx(0.25));
  CHECK(fine.starts[3] == doctest::Approx(0.75));
  CHECK(fine.ends[3] == doctest::Approx(1.0));

  BandGrid grid = BandGrid::uniform(8, 2.0);
  auto sub = refine_grid(grid, {1, 5}, 3);
  REQUIRE(sub.size() == 6);
  for (int c = 1; c < sub.size(); ++c) CHECK(sub.starts[c] >= sub.ends[c - 1]);
  CHECK(sub.total_width() ==
        doctest::Approx(grid.width(1) + grid.width(5)).epsilon(1e-12));

  CHECK_THROWS_AS(refine_grid(grid, {}, 4), NoActiveBandsError);
  CHECK_THROWS_AS(refine_grid(grid, {0}, 1), ArgumentError);

  Rng rng(9);
  for (int rep = 0; rep < 20; ++rep) {
    auto g = BandGrid::uniform(16, rng.uniform(0.5, 3.0));
    std::vector<int> active;
    double expected = 0.0;
    for (int c = 0; c < 16; ++c)
      if (rng.uniform(0.0, 1.0) < 0.4) {
        active.push_back(c);
        expected += g.width(c);
      }
    if (active.empty()) continue;
    auto f = refine_grid(g, active, 2 + rep % 5);
    CHECK(f.total_width() == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("conjugate-symmetric reconstruction is real") {
  Rng rng(21);
  std::vector<double> times(12), values(12, 0.0);
  double t = 0.0;
  for (auto& x : times) {
    t += rng.uniform(0.2, 4.0);
    x = t;
  }
  RecordSet rs({Record("r", times, values)});
  BandGrid grid = BandGrid::uniform(6, 1.2);
  auto dict = build_wideband(rs, grid).front();

  Eigen::VectorXcd beta(6);
  for (int c = 0; c < 6; ++c) beta(c) = {rng.normal(0.0, 1.0), rng.normal(0.0, 1.0)};

  // explicit +/- band expansion: negative bands carry conjugate coefficients
  for (int n = 0; n < 12; ++n) {
    std::complex<double> full = 0.0;
    for (int c = 0; c < 6; ++c) {
      full += wideband_entry(times[n], grid.starts[c], grid.ends[c]) * beta(c);
      full += wideband_entry(times[n], -grid.ends[c], -grid.starts[c]) * std::conj(beta(c));
    }
    CHECK(std::abs(full.imag()) < 1e-10);
    const std::complex<double> prod = dict.atoms.row(n).transpose().cwiseProduct(beta).sum();
    CHECK(full.real() == doctest::Approx(2.0 * prod.real()).epsilon(1e-10));
  }
}

TEST_CASE("narrow bands converge to phasors") {
  Rng rng(31);
  for (int i = 0; i < 20; ++i) {
    const double t = rng.uniform(0.0, 300.0);
    const double center = rng.uniform(0.05, 1.0);
    const double w = 1e-6;
    const auto entry = wideband_entry(t, center - 0.5 * w, center + 0.5 * w);
    const auto phasor = w * std::polar(1.0, center * t);
    CHECK(std::abs(entry - phasor) <= 1e-4 * std::abs(phasor));
  }
}
