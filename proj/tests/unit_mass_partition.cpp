#include "doctest.h"
#include "fragsim/errors.hpp"
#include "fragsim/mass_partition.hpp"
#include "fragsim/rng.hpp"

using namespace fragsim;

namespace {

MassPartition random_partition(Stream& rng, int max_len = 8) {
  const int n = 1 + int(rng.next_u64() % max_len);
  std::vector<double> v(n);
  for (auto& x : v) x = rng.next_unit();
  return rearrange(v);
}

}  // namespace

TEST_CASE("rearrange sorts, drops zeros, rejects negatives") {
  CHECK(rearrange({0.2, 0.5, 0.3}) == MassPartition{0.5, 0.3, 0.2});
  CHECK(rearrange({}) == MassPartition{});
  CHECK(rearrange({0.5, 0.0, 0.5}) == MassPartition{0.5, 0.5});
  CHECK_THROWS_AS(rearrange({-0.1, 0.5}), config_error);
}

TEST_CASE("rearrange is idempotent and permutation invariant") {
  Stream rng = Stream::from(7, 1);
  for (int it = 0; it < 200; ++it) {
    auto p = random_partition(rng);
    CHECK(rearrange(p) == p);
    // permute and re-sort
    std::vector<double> q(p.rbegin(), p.rend());
    CHECK(rearrange(q) == p);
  }
}

TEST_CASE("l1 distance basics") {
  CHECK(l1_distance({1.0}, {1.0}) == 0.0);
  CHECK(l1_distance({1.0}, {}) == 1.0);
  CHECK(l1_distance({0.5, 0.25}, {0.4}) == doctest::Approx(0.35).epsilon(1e-15));
}

TEST_CASE("l1 triangle inequality on random triples") {
  Stream rng = Stream::from(7, 2);
  for (int it = 0; it < 500; ++it) {
    auto a = random_partition(rng);
    auto b = random_partition(rng);
    auto c = random_partition(rng);
    CHECK(l1_distance(a, c) <= l1_distance(a, b) + l1_distance(b, c) + 1e-12);
  }
}

TEST_CASE("rearrangement is 1-Lipschitz for the l1 distance") {
  Stream rng = Stream::from(7, 3);
  for (int it = 0; it < 500; ++it) {
    const int n = 1 + int(rng.next_u64() % 8);
    std::vector<double> v(n), w(n);
    for (int i = 0; i < n; ++i) {
      v[i] = rng.next_unit();
      w[i] = v[i] + 0.1 * (rng.next_unit() - 0.5);
      if (w[i] < 0) w[i] = 0;
    }
    double eps = 0.0;
    for (int i = 0; i < n; ++i) eps += std::abs(v[i] - w[i]);
    CHECK(l1_distance(rearrange(v), rearrange(w)) <= eps + 1e-12);
  }
}

TEST_CASE("merge basics and tie preservation") {
  CHECK(merge({{0.5}, {0.3, 0.2}}) == MassPartition{0.5, 0.3, 0.2});
  CHECK(merge({{}, {}}) == MassPartition{});
  CHECK(merge({{0.4, 0.1}, {0.4}}) == MassPartition{0.4, 0.4, 0.1});
}

TEST_CASE("scale basics and merge/scale commutation") {
  CHECK(scale(2.0, {0.5, 0.25}) == MassPartition{1.0, 0.5});
  CHECK(scale(0.1, {}) == MassPartition{});
  CHECK_THROWS_AS(scale(0.0, {0.5}), config_error);
  Stream rng = Stream::from(7, 4);
  for (int it = 0; it < 200; ++it) {
    auto a = random_partition(rng);
    auto b = random_partition(rng);
    const double x = 0.25 + rng.next_unit();
    CHECK(l1_distance(scale(x, merge({a, b})),
                      merge({scale(x, a), scale(x, b)})) < 1e-12);
  }
}

TEST_CASE("json round trip validates ordering") {
  const MassPartition p{0.5, 0.3, 0.2};
  CHECK(partition_from_json(partition_to_json(p)) == p);
  CHECK_THROWS_AS(partition_from_json("[0.2, 0.5]"), config_error);
  CHECK_THROWS_AS(partition_from_json("[0.2, -0.1]"), config_error);
}
