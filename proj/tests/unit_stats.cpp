#include <cmath>

#include "doctest.h"
#include "fragsim/rng.hpp"
#include "fragsim/stats.hpp"

using namespace fragsim;

TEST_CASE("ks two-sample basics") {
  CHECK(ks_two_sample({1, 2, 3}, {1, 2, 3}).ks == 0.0);
  CHECK(ks_two_sample(std::vector<double>(50, 0.0),
                      std::vector<double>(50, 1.0))
            .ks == 1.0);
}

TEST_CASE("ks calibration: uniform vs uniform stays under the DKW band") {
  int below = 0;
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    Stream rng = Stream::from(100 + t, 0);
    std::vector<double> a(100000), b(100000);
    for (auto& x : a) x = rng.next_unit();
    for (auto& x : b) x = rng.next_unit();
    auto rep = ks_two_sample(a, b);
    if (rep.ks < rep.band) ++below;
  }
  CHECK(below >= 99);
}

TEST_CASE("ks handles lattice-valued samples exactly") {
  // point masses on a lattice: ECDF steps must align on the union support
  std::vector<double> a{1, 1, 2, 2}, b{1, 2, 2, 2};
  CHECK(ks_two_sample(a, b).ks == doctest::Approx(0.25));
}

TEST_CASE("tv histogram basics and gaussian calibration") {
  std::vector<double> s{0.1, 0.2, 0.3};
  CHECK(tv_histogram(s, s, 16, 0.0, 1.0) == 0.0);
  CHECK(tv_histogram({0.1, 0.2}, {0.8, 0.9}, 2, 0.0, 1.0) == 1.0);
  Stream rng = Stream::from(5, 5);
  std::vector<double> a(100000), b(100000);
  for (auto& x : a) x = rng.next_normal();
  for (auto& x : b) x = rng.next_normal() + 0.1;
  const double tv = tv_histogram(a, b, 64, -5.0, 5.0);
  CHECK(tv > 0.02);
  CHECK(tv < 0.08);
}

TEST_CASE("bootstrap basics and coverage calibration") {
  std::vector<double> constant(500, 3.25);
  auto deg = bootstrap_ci(
      constant, [](const std::vector<double>& v) { return mean(v); }, 300,
      0.99, 1);
  CHECK(deg.lo == 3.25);
  CHECK(deg.hi == 3.25);
  // median statistic is supported
  std::vector<double> xs{1, 2, 3, 4, 100};
  auto med = bootstrap_ci(
      xs, [](const std::vector<double>& v) { return quantile(v, 0.5); }, 300,
      0.9, 2);
  CHECK(med.lo <= 3.0);
  CHECK(3.0 <= med.hi);

  int covered = 0;
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    Stream rng = Stream::from(300 + t, 0);
    std::vector<double> u(10000);
    for (auto& x : u) x = rng.next_unit();
    auto ci = bootstrap_ci(
        u, [](const std::vector<double>& v) { return mean(v); }, 300, 0.99,
        900 + t);
    if (ci.lo <= 0.5 && 0.5 <= ci.hi) ++covered;
  }
  CHECK(covered >= 99);
}

TEST_CASE("line fit recovers a slope") {
  std::vector<double> xs, ys;
  for (int i = 0; i < 30; ++i) {
    xs.push_back(i);
    ys.push_back(2.0 - 0.5 * i);
  }
  auto f = fit_line(xs, ys);
  CHECK(f.slope == doctest::Approx(-0.5));
  CHECK(f.intercept == doctest::Approx(2.0));
}

TEST_CASE("chi2 survival and normal quantile sanity") {
  CHECK(chi2_sf(0.0, 3) == doctest::Approx(1.0));
  CHECK(chi2_sf(3.84, 1) == doctest::Approx(0.05).epsilon(0.01));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959964).epsilon(1e-4));
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("chi2 homogeneity accepts equal laws, rejects shifted ones") {
  Stream rng = Stream::from(6, 6);
  std::vector<double> a(20, 0), b(20, 0), c(20, 0);
  for (int i = 0; i < 20000; ++i) {
    a[rng.next_u64() % 20] += 1;
    b[rng.next_u64() % 20] += 1;
    c[std::min<std::uint64_t>(19, rng.next_u64() % 24)] += 1;
  }
  CHECK(chi2_homogeneity_p(a, b) > 0.01);
  CHECK(chi2_homogeneity_p(a, c) < 1e-6);
}

TEST_CASE("dkw band formula") {
  CHECK(dkw_band(10000, 0.01) ==
        doctest::Approx(std::sqrt(std::log(200.0) / 20000.0)));
}
