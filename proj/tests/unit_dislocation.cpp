#include <cmath>

#include "doctest.h"
#include "fragsim/dislocation.hpp"
#include "fragsim/errors.hpp"
#include "fragsim/stats.hpp"

using namespace fragsim;

TEST_CASE("deterministic laws sample their atom") {
  Stream rng = Stream::from(11, 1);
  auto kary = DislocationLaw::kary_equal(2);
  CHECK(kary.sample(rng) == MassPartition{0.5, 0.5});
  auto fixed = DislocationLaw::binary_fixed(0.7);
  auto s = fixed.sample(rng);
  CHECK(s[0] == doctest::Approx(0.7));
  CHECK(s[1] == doctest::Approx(0.3));
}

TEST_CASE("samples conserve mass, are sorted, never the unit state") {
  Stream rng = Stream::from(11, 2);
  for (const auto& law :
       {DislocationLaw::binary_uniform(), DislocationLaw::kary_equal(3),
        DislocationLaw::dirichlet_sorted(4, 1.0),
        DislocationLaw::finite_support(
            {{0.5, {0.6, 0.4}}, {0.5, {0.5, 0.25, 0.25}}})}) {
    for (int it = 0; it < 20000; ++it) {
      auto s = law.sample(rng);
      CHECK(std::abs(total_mass(s) - 1.0) <= 1e-12);
      CHECK(is_non_increasing(s));
      CHECK(s.size() >= 2);
    }
  }
}

TEST_CASE("binary uniform mean of the top fragment is 3/4") {
  // oracle: E max(V, 1-V) = 2 int_{1/2}^1 s ds = 3/4
  Stream rng = Stream::from(11, 3);
  auto law = DislocationLaw::binary_uniform();
  std::vector<double> tops;
  for (int it = 0; it < 200000; ++it) tops.push_back(law.sample(rng)[0]);
  const double se = std::sqrt(variance(tops) / tops.size());
  CHECK(std::abs(mean(tops) - 0.75) < 4.0 * se);
}

TEST_CASE("integral_s1_power exact and Monte Carlo routes") {
  CHECK(DislocationLaw::kary_equal(2).integral_s1_power(1.0, 1, 0).value ==
        doctest::Approx(2.0));
  CHECK(DislocationLaw::binary_fixed(0.7).integral_s1_power(2.0, 1, 0).value ==
        doctest::Approx(1.0 / 0.49));
  // oracle for binary-uniform, q = 1: 2 ln 2 by quadrature of 2/s over [1/2,1]
  double quad = 0.0;
  const int nq = 200000;
  for (int i = 0; i < nq; ++i) {
    const double s = 0.5 + (i + 0.5) / (2.0 * nq);
    quad += 2.0 / s / (2.0 * nq);
  }
  CHECK(quad == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-6));
  auto est =
      DislocationLaw::binary_uniform().integral_s1_power(1.0, 200000, 42);
  CHECK(est.lo <= quad);
  CHECK(quad <= est.hi);
  CHECK(!est.divergence_suspected);
}

TEST_CASE("geometric detection") {
  auto g3 = DislocationLaw::kary_equal(3).is_geometric();
  CHECK(g3.status == GeometricStatus::Geometric);
  CHECK(g3.ratio == doctest::Approx(1.0 / 3.0));

  CHECK(DislocationLaw::binary_uniform().is_geometric().status ==
        GeometricStatus::NonGeometric);

  auto quarters = DislocationLaw::finite_support(
                      {{1.0, {0.25, 0.25, 0.25, 0.25}}})
                      .is_geometric();
  CHECK(quarters.status == GeometricStatus::Geometric);
  CHECK(quarters.ratio == doctest::Approx(0.5));

  CHECK(DislocationLaw::binary_fixed(0.7).is_geometric().status ==
        GeometricStatus::NonGeometric);
  auto half = DislocationLaw::binary_fixed(0.5).is_geometric();
  CHECK(half.status == GeometricStatus::Geometric);
  CHECK(half.ratio == doctest::Approx(0.5));
}

TEST_CASE("geometric flag consistency of sampled masses") {
  auto law = DislocationLaw::finite_support(
      {{0.25, {0.5, 0.25, 0.125, 0.125}}, {0.75, {0.5, 0.5}}});
  auto rep = law.is_geometric();
  REQUIRE(rep.status == GeometricStatus::Geometric);
  Stream rng = Stream::from(11, 4);
  const double logr = std::log(rep.ratio);
  for (int it = 0; it < 5000; ++it)
    for (double m : law.sample(rng)) {
      const double t = std::log(m) / logr;
      CHECK(std::abs(t - std::round(t)) <= 1e-9);
    }
}

TEST_CASE("law parsing round trips") {
  for (const char* spec :
       {"binary-uniform", "binary-fixed:0.7", "kary:3", "dirichlet:4:1",
        "table:0.5:(0.6,0.4);0.5:(0.5,0.25,0.25)"}) {
    auto law = DislocationLaw::parse(spec);
    auto again = DislocationLaw::parse(law.spec_string());
    CHECK(law.kind() == again.kind());
  }
  CHECK_THROWS_AS(DislocationLaw::parse("nope"), config_error);
  // probabilities must sum to one
  CHECK_THROWS_AS(DislocationLaw::finite_support({{0.4, {0.5, 0.5}}}),
                  config_error);
  // the unit state is excluded
  CHECK_THROWS_AS(DislocationLaw::finite_support({{1.0, {1.0}}}), config_error);
}

TEST_CASE("frozen atoms are exact for finite laws and weighted for MC") {
  auto det = DislocationLaw::kary_equal(4).frozen_atoms(512, 1);
  CHECK(det.size() == 1);
  CHECK(det[0].weight == 1.0);
  auto mc = DislocationLaw::binary_uniform().frozen_atoms(64, 1);
  CHECK(mc.size() == 64);
  double w = 0.0;
  for (const auto& a : mc) w += a.weight;
  CHECK(w == doctest::Approx(1.0));
  // frozen draws are reproducible
  auto mc2 = DislocationLaw::binary_uniform().frozen_atoms(64, 1);
  CHECK(mc[17].masses == mc2[17].masses);
}
