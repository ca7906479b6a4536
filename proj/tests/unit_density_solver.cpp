#include <cmath>

#include "doctest.h"
#include "fragsim/density_solver.hpp"
#include "fragsim/errors.hpp"
#include "fragsim/frag_engine.hpp"
#include "fragsim/stats.hpp"

using namespace fragsim;

namespace {

const DensityResult& solved_binary_uniform() {
  static DensityResult d = [] {
    SolverOptions opt;
    opt.grid = {16.0, 1368};  // coarser test grid, same span
    opt.tol = 1e-9;
    opt.n_quad = 256;
    return solve_extinction_density(DislocationLaw::binary_uniform(), -1.0,
                                    opt);
  }();
  return d;
}

const DensityResult& solved_kary2() {
  static DensityResult d = [] {
    SolverOptions opt;
    opt.grid = {16.0, 1368};
    opt.tol = 1e-9;
    return solve_extinction_density(DislocationLaw::kary_equal(2), -1.0, opt);
  }();
  return d;
}

}  // namespace

TEST_CASE("solver converges with the density bounded by one") {
  const auto& d = solved_binary_uniform();
  CHECK(d.residual <= 1e-9);
  CHECK(d.escaped_mass < 1e-3);
  for (double v : d.f.values) {
    CHECK(v <= 1.0 + 1e-9);
    CHECK(v >= 0.0);
  }
  CHECK(d.f.values[1] < 0.05);  // vanishes at the origin
  CHECK(trapz(d.f) == doctest::Approx(1.0));
}

TEST_CASE("diagnostics: tail rate positive, small-x power steep enough") {
  const auto& d = solved_binary_uniform();
  auto diag = density_diagnostics(d, DislocationLaw::binary_uniform());
  CHECK(diag.max_ok);
  CHECK(diag.tail_ok);
  CHECK(diag.tail_rate > 0.2);
  CHECK(diag.smallx_ok);
  CHECK(diag.smallx_exponent >= diag.smallx_required - 0.3);
  CHECK(diag.positive);
}

TEST_CASE("solved density matches simulation: mean and TV") {
  const auto& d = solved_binary_uniform();
  FragmentationConfig cfg;
  cfg.law = DislocationLaw::binary_uniform();
  cfg.dust_threshold = 1e-5;
  cfg.seed = 31;
  SummaryOptions opt;
  opt.want_spine = false;
  std::vector<double> zetas(200000);
  for (long r = 0; r < (long)zetas.size(); ++r)
    zetas[r] = simulate_summary(cfg, r, opt).zeta;
  // mean of the solved density vs the Monte Carlo mean
  double model_mean = 0.0;
  for (int j = 1; j <= d.f.n_points; ++j)
    model_mean += 0.5 * d.f.h() *
                  (d.f.x(j - 1) * d.f.values[j - 1] + d.f.x(j) * d.f.values[j]);
  const double mc_se = std::sqrt(variance(zetas) / zetas.size());
  CHECK(std::abs(mean(zetas) - model_mean) < 5.0 * mc_se + 0.01);
  // coarse-bin TV
  const double tv = [&] {
    const int bins = 228;  // width ~0.07
    std::vector<double> emp(bins + 1, 0.0);
    for (double z : zetas) {
      int k = z >= 16.0 ? bins : int(z / 16.0 * bins);
      emp[k] += 1.0;
    }
    double acc = emp[bins] / zetas.size();
    for (int k = 0; k < bins; ++k) {
      const double lo = 16.0 * k / bins, hi = 16.0 * (k + 1) / bins;
      const double model = d.F.at_clamped(hi) - d.F.at_clamped(lo);
      acc += std::abs(emp[k] / zetas.size() - model);
    }
    return 0.5 * acc;
  }();
  CHECK(tv < 0.02);
}

TEST_CASE("transition density: support, normalization, positivity") {
  const auto& dk = solved_kary2();
  // kary support: P(x, y) = 0 for y >= k^{|alpha|} x
  CHECK(transition_density(1.0, 2.0001, dk) == 0.0);
  CHECK(transition_density(1.0, 5.0, dk) == 0.0);
  CHECK(transition_density(1.0, 1.9, dk) > 0.0);

  const auto& d = solved_binary_uniform();
  for (double x : {0.5, 1.0, 2.0}) {
    double integral = 0.0;
    double prev = 0.0;
    for (int j = 1; j <= d.f.n_points; ++j) {
      const double cur = transition_density(x, d.f.x(j), d);
      integral += 0.5 * d.f.h() * (prev + cur);
      prev = cur;
    }
    CHECK(std::abs(integral - 1.0) <= 0.01);
  }
  // strictly positive for x,y > 0 under a non-geometric law
  for (double x : {0.5, 1.0, 3.0})
    for (double y : {0.2, 1.0, 4.0})
      CHECK(transition_density(x, y, d) > 0.0);
  CHECK_THROWS_AS(transition_density(15.9, 1.0, d), unsupported_point_error);
}

TEST_CASE("stationary solver: positivity, residual, closure") {
  const auto& d = solved_binary_uniform();
  auto st = solve_stationary(d, 1e-9, 600);
  CHECK(st.residual <= 1e-9);
  for (int j = 1; j <= st.pi.n_points; ++j) CHECK(st.pi.values[j] >= 0.0);
  int positive = 0;
  for (int j = 1; j <= st.pi.n_points; ++j)
    positive += st.pi.values[j] > 0.0 ? 1 : 0;
  CHECK(positive > st.pi.n_points / 2);
  GridFunction push = stationary_map(d, st.pi);
  normalize_density(push);
  double closure = 0.0;
  for (int j = 0; j < push.size(); ++j)
    closure = std::max(closure, std::abs(push.values[j] - st.pi.values[j]));
  CHECK(closure <= 5e-9);
  // moment diagnostics: exp(a x) integrable for small a, x^{-b} for b < 2
  double exp_moment = 0.0, neg_moment = 0.0;
  for (int j = 1; j <= st.pi.n_points; ++j) {
    exp_moment += st.pi.values[j] * std::exp(0.05 * st.pi.x(j)) * st.pi.h();
    neg_moment += st.pi.values[j] * std::pow(st.pi.x(j), -1.5) * st.pi.h();
  }
  CHECK(std::isfinite(exp_moment));
  CHECK(std::isfinite(neg_moment));
}

TEST_CASE("grid-too-small detection fires on a short grid") {
  SolverOptions opt;
  opt.grid = {4.0, 512};
  opt.n_quad = 128;
  CHECK_THROWS_AS(
      solve_extinction_density(DislocationLaw::binary_uniform(), -1.0, opt),
      grid_too_small_error);
}
