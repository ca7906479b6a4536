#include <cmath>

#include "doctest.h"
#include "fragsim/grid.hpp"
#include "fragsim/stats.hpp"

using namespace fragsim;

TEST_CASE("grid interpolation and trapezoid integral") {
  GridFunction f({2.0, 4});
  for (int j = 0; j <= 4; ++j) f.values[j] = f.x(j);  // identity
  CHECK(f.at(0.25) == doctest::Approx(0.25));
  CHECK(f.at(3.0) == 0.0);           // density convention outside
  CHECK(f.at_clamped(3.0) == 2.0);   // cdf convention outside
  CHECK(trapz(f) == doctest::Approx(2.0));
  auto F = cumtrapz(f);
  CHECK(F.values.back() == doctest::Approx(2.0));
}

TEST_CASE("grid sampler reproduces its density") {
  GridFunction f({1.0, 256});
  for (int j = 0; j <= 256; ++j) f.values[j] = 2.0 * f.x(j);  // density 2x
  normalize_density(f);
  GridSampler sampler(f);
  Stream rng = Stream::from(1, 1);
  std::vector<double> xs(100000);
  for (auto& x : xs) x = sampler.sample(rng);
  // CDF is x^2 on [0,1]
  const double ks =
      ks_vs_cdf(xs, [](double x) { return x <= 0 ? 0.0 : std::min(1.0, x * x); });
  CHECK(ks < 0.01);
  CHECK(sampler.cdf_at(0.5) == doctest::Approx(0.25).epsilon(1e-3));
}
