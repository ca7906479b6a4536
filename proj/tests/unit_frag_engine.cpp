#include <cmath>

#include "doctest.h"
#include "fragsim/errors.hpp"
#include "fragsim/frag_engine.hpp"
#include "fragsim/stats.hpp"

using namespace fragsim;

namespace {

FragmentationConfig desk(double dust = 1e-4) {
  FragmentationConfig cfg;
  cfg.law = DislocationLaw::binary_uniform();
  cfg.alpha = -1.0;
  cfg.dust_threshold = dust;
  cfg.seed = 99;
  return cfg;
}

}  // namespace

TEST_CASE("deterministic kary tree shape at coarse dust") {
  FragmentationConfig cfg;
  cfg.law = DislocationLaw::kary_equal(2);
  cfg.dust_threshold = 0.4;
  cfg.seed = 5;
  auto rec = simulate(cfg, 0);
  // root splits, both 0.5-children split, four 0.25-blocks are dust
  CHECK(rec.blocks.size() == 7);
  int dust = 0;
  for (const auto& b : rec.blocks) dust += b.dust ? 1 : 0;
  CHECK(dust == 4);
}

TEST_CASE("root waiting time is Exp(1) for unit mass") {
  auto cfg = desk(0.01);
  std::vector<double> waits;
  for (int r = 0; r < 10000; ++r) {
    auto run = simulate_summary(cfg, r);
    REQUIRE(run.spine.size() > 1);
    waits.push_back(run.spine[1].T);
  }
  CHECK(std::abs(mean(waits) - 1.0) < 0.03);
}

TEST_CASE("record and summary agree; pruning does not change the result") {
  auto cfg = desk(1e-4);
  int prune_mismatch = 0;
  for (int r = 0; r < 2000; ++r) {
    SummaryOptions pruned;  // default horizon
    SummaryOptions exact;
    exact.prune_horizon = 0.0;
    auto a = simulate_summary(cfg, r, pruned);
    auto b = simulate_summary(cfg, r, exact);
    if (a.zeta != b.zeta) ++prune_mismatch;
    if (r < 200) {
      auto rec = simulate(cfg, r);
      CHECK(rec.zeta == a.zeta);
      auto s1 = spine(rec);
      REQUIRE(s1.size() == a.spine.size());
      for (std::size_t k = 0; k < s1.size(); ++k) {
        CHECK(s1[k].Z == a.spine[k].Z);
        CHECK(s1[k].Theta == a.spine[k].Theta);
      }
    }
  }
  CHECK(prune_mismatch == 0);
}

TEST_CASE("spine structure: Z0 = zeta, Y > 1, identities, conservation") {
  auto cfg = desk(1e-5);
  for (int r = 0; r < 500; ++r) {
    auto run = simulate_summary(cfg, 7000 + r);
    CHECK(run.conservation_violations == 0);
    REQUIRE(!run.spine.empty());
    CHECK(run.spine[0].Z == run.zeta);
    double z_prev = run.spine[0].Z;
    for (std::size_t n = 1; n < run.spine.size(); ++n) {
      const auto& st = run.spine[n];
      CHECK(st.Z > 0.0);
      CHECK(st.Y > 1.0);
      CHECK(st.Theta > 0.0);
      CHECK(st.Theta < 1.0);
      CHECK(std::abs(st.Theta + total_mass(st.Delta) - 1.0) <= 1e-12);
      // Y Theta = (Z_n / Z_{n-1})^{1/alpha}
      CHECK(std::abs(st.Y * st.Theta -
                     std::pow(st.Z / z_prev, 1.0 / cfg.alpha)) <= 1e-12);
      z_prev = st.Z;
    }
  }
}

TEST_CASE("argmax uniqueness: no sibling subtree ties at double precision") {
  auto cfg = desk(1e-3);
  long ties = 0;
  for (int r = 0; r < 2000; ++r) {
    auto rec = simulate(cfg, 40000 + r);
    for (const auto& b : rec.blocks) {
      if (b.dust || b.n_children < 2) continue;
      for (int i = 0; i < b.n_children; ++i)
        for (int j = i + 1; j < b.n_children; ++j) {
          const auto& ci = rec.blocks[b.first_child + i];
          const auto& cj = rec.blocks[b.first_child + j];
          if (!ci.dust && !cj.dust && ci.subtree_ext == cj.subtree_ext) ++ties;
        }
    }
  }
  CHECK(ties == 0);
}

TEST_CASE("state_at boundary values and monotone total mass") {
  auto cfg = desk(1e-4);
  auto rec = simulate(cfg, 3);
  CHECK(state_at(rec, 0.0) == MassPartition{1.0});
  CHECK(state_at(rec, rec.zeta).empty());
  CHECK(state_at(rec, rec.zeta + 1.0).empty());
  double prev = 2.0;
  for (int i = 0; i <= 100; ++i) {
    const double t = rec.zeta * i / 100.0;
    const double m = total_mass(state_at(rec, t));
    CHECK(m <= prev + 1e-12);
    prev = m;
  }
}

TEST_CASE("self-similarity of the extinction time in the initial mass") {
  // zeta from mass 1/2 vs m^{-alpha} * zeta from mass 1, alpha = -1
  auto cfg = desk(1e-5);
  const long n = 30000;
  std::vector<double> a(n), b(n);
  SummaryOptions opt;
  opt.want_spine = false;
  FragmentationConfig half = cfg;
  half.initial_mass = 0.5;
  half.seed = 1234;
  for (long r = 0; r < n; ++r) {
    a[r] = simulate_summary(half, r, opt).zeta;
    b[r] = 0.5 * simulate_summary(cfg, 900000 + r, opt).zeta;
  }
  auto ks = ks_two_sample(a, b, 0.02);
  CHECK(ks.pass);
}

TEST_CASE("zeta has an exponential upper tail") {
  auto cfg = desk(1e-4);
  std::vector<double> zetas(20000);
  SummaryOptions opt;
  opt.want_spine = false;
  for (long r = 0; r < 20000; ++r)
    zetas[r] = simulate_summary(cfg, 500000 + r, opt).zeta;
  std::sort(zetas.begin(), zetas.end());
  std::vector<double> xs, ys;
  for (double q = 0.90; q < 0.999; q += 0.005) {
    const double x = zetas[std::size_t(q * zetas.size())];
    xs.push_back(x);
    ys.push_back(std::log(1.0 - q));
  }
  CHECK(fit_line(xs, ys).slope < -0.1);
}

TEST_CASE("conditioned simulation matches the unconditioned small-zeta law") {
  auto cfg = desk(1e-4);
  const double x = 1.2;
  long hits = 0;
  const long n = 20000;
  SummaryOptions opt;
  opt.want_spine = false;
  for (long r = 0; r < n; ++r)
    if (simulate_summary(cfg, 600000 + r, opt).zeta < x) ++hits;
  const double p_hat = double(hits) / n;
  long attempts_total = 0;
  for (long r = 0; r < 2000; ++r) {
    auto run = simulate_conditioned_summary(cfg, x, r, 100000, opt);
    attempts_total += run.attempts;
    CHECK(run.summary.zeta < x);
  }
  const double p_cond = 2000.0 / double(attempts_total);
  const double se = std::sqrt(p_hat * (1 - p_hat) * (1.0 / n + p_hat / 2000.0));
  CHECK(std::abs(p_cond - p_hat) < 4.0 * se + 0.01);
}

TEST_CASE("conditioned record rebuild matches the accepted summary") {
  auto cfg = desk(1e-3);
  long attempts = 0;
  auto rec = simulate_conditioned(cfg, 1.0, 77, 100000, &attempts);
  CHECK(rec.zeta < 1.0);
  CHECK(attempts >= 1);
}

TEST_CASE("evolve_state conserves-or-loses mass and respects u=0") {
  auto cfg = desk(1e-5);
  const MassPartition state{0.4, 0.3, 0.1};
  CHECK(evolve_state(state, 0.0, cfg, 1) == state);
  for (int s = 0; s < 50; ++s) {
    auto ev = evolve_state(state, 0.05, cfg, s);
    CHECK(total_mass(ev) <= total_mass(state) + 1e-12);
    CHECK(is_non_increasing(ev));
  }
}

TEST_CASE("resource limit names the lever") {
  auto cfg = desk(1e-6);
  cfg.max_blocks = 50;
  SummaryOptions opt;
  opt.prune_horizon = 0.0;
  CHECK_THROWS_AS(simulate_summary(cfg, 0, opt), resource_limit_error);
}

TEST_CASE("rejected runs abort early") {
  auto cfg = desk(1e-4);
  SummaryOptions opt;
  opt.reject_above = 0.05;
  opt.want_spine = false;
  long rejected = 0;
  for (int r = 0; r < 200; ++r)
    rejected += simulate_summary(cfg, r, opt).rejected ? 1 : 0;
  CHECK(rejected > 150);  // P(zeta < 0.05) is tiny
}
