#include "fragsim/geometric.hpp"

#include <algorithm>
#include <cmath>

#include "fragsim/errors.hpp"

namespace fragsim {

int KaryConfig::depth_cutoff() const {
  return (int)std::ceil(std::log(1.0 / dust_threshold) / std::log((double)k));
}

void KaryConfig::validate() const {
  if (k < 2) throw config_error("kary: k must be >= 2");
  if (!(alpha < 0.0)) throw config_error("kary: alpha must be < 0");
  if (!(dust_threshold > 0.0 && dust_threshold < 1.0))
    throw config_error("kary: dust_threshold in (0,1)");
}

namespace {

struct KaryEngine {
  int k;
  double alpha;
  std::uint64_t seed;
  int depth_max;
  double prune_h;
  std::vector<double> mean_wait;   // k^{d alpha} per depth
  std::vector<double> resid_cap;   // prune bound kappa * k^{-d alpha}... per depth

  double best = -1.0;
  std::vector<double> cur_T, best_T;

  double run(std::uint64_t id, int depth, double birth) {
    if (depth == depth_max) {
      if (birth > best) {
        best = birth;
        best_T = cur_T;
      }
      return birth;
    }
    Stream rng = Stream::from(seed, id);
    const double t_split = birth + rng.next_exp() * mean_wait[depth];
    double ext = t_split;
    cur_T.push_back(t_split);
    for (int j = 0; j < k; ++j) {
      if (prune_h > 0.0 && t_split + resid_cap[depth + 1] < best) break;
      const double e = run(child_block_id(id, j), depth + 1, t_split);
      if (e > ext) ext = e;
    }
    cur_T.pop_back();
    return ext;
  }
};

}  // namespace

KaryRun kary_extinction(const KaryConfig& config, std::uint64_t replica,
                        double prune_horizon) {
  config.validate();
  KaryEngine eng;
  eng.k = config.k;
  eng.alpha = config.alpha;
  eng.seed = config.seed;
  eng.depth_max = config.depth_cutoff();
  eng.prune_h = prune_horizon;
  eng.mean_wait.resize(eng.depth_max + 1);
  eng.resid_cap.resize(eng.depth_max + 1);
  for (int d = 0; d <= eng.depth_max; ++d) {
    const double mass = std::pow((double)config.k, -double(d));
    eng.mean_wait[d] = std::pow(mass, -config.alpha);
    eng.resid_cap[d] = prune_horizon * eng.mean_wait[d];
  }
  KaryRun out;
  out.zeta = eng.run(replica_block_id(replica), 0, 0.0);
  out.T = eng.best_T;
  return out;
}

double kary_z(const KaryConfig& config, const KaryRun& run, int n) {
  if (n < 0 || n > (int)run.T.size())
    throw config_error("kary_z: level outside the simulated spine");
  const double t_n = n == 0 ? 0.0 : run.T[n - 1];
  const double mass = std::pow((double)config.k, -double(n));
  return std::pow(mass, config.alpha) * (run.zeta - t_n);
}

double kary_subseq_exponent(const KaryConfig& config, const KaryRun& run,
                            double x, int n) {
  const double eps = std::pow((double)config.k, config.alpha * (x + n));
  const double tau = run.zeta - eps;
  // N = number of spine splits at or before tau; F_*(tau) = k^{-N}
  int N = 0;
  while (N < (int)run.T.size() && run.T[N] <= tau) ++N;
  return (x + n) - double(N);
}

MonotonicityReport stochastic_monotonicity_check(const KaryConfig& config,
                                                 int n_levels, long n_mc) {
  if (n_levels < 2) throw config_error("monotonicity: n_levels >= 2");
  if (n_levels >= config.depth_cutoff())
    throw config_error("monotonicity: n_levels exceeds the depth cutoff");
  MonotonicityReport rep;
  rep.n_levels = n_levels;
  rep.n_mc = n_mc;
  rep.band = 2.0 * dkw_band((std::size_t)n_mc, 0.01);

  std::vector<std::vector<double>> z(n_levels + 1);
  for (auto& v : z) v.reserve(n_mc);
  // independent halves for the F1 = F0^k identity
  std::vector<double> z0_a, z1_b;
  z0_a.reserve(n_mc);
  z1_b.reserve(n_mc);
  for (long r = 0; r < n_mc; ++r) {
    const KaryRun run = kary_extinction(config, (std::uint64_t)r);
    for (int n = 0; n <= n_levels; ++n) z[n].push_back(kary_z(config, run, n));
    if (r % 2 == 0)
      z0_a.push_back(kary_z(config, run, 0));
    else
      z1_b.push_back(kary_z(config, run, 1));
  }

  // sup_t |F1_hat(t) - F0_hat(t)^k| on the pooled support
  std::sort(z0_a.begin(), z0_a.end());
  std::sort(z1_b.begin(), z1_b.end());
  double gap = 0.0;
  {
    std::vector<double> grid = z0_a;
    grid.insert(grid.end(), z1_b.begin(), z1_b.end());
    std::sort(grid.begin(), grid.end());
    for (double t : grid) {
      const double f0 =
          double(std::upper_bound(z0_a.begin(), z0_a.end(), t) - z0_a.begin()) /
          double(z0_a.size());
      const double f1 =
          double(std::upper_bound(z1_b.begin(), z1_b.end(), t) - z1_b.begin()) /
          double(z1_b.size());
      gap = std::max(gap, std::abs(f1 - std::pow(f0, config.k)));
    }
  }
  rep.f1_vs_f0k_gap = gap;
  const double band_halves = 2.0 * dkw_band((std::size_t)(n_mc / 2), 0.01);
  rep.f1_eq_f0k = gap <= band_halves;

  // stochastic ordering F_{n+1} <= F_n + band on the pooled grid, and the
  // domination of zeta by the top level
  for (int n = 0; n <= n_levels; ++n) std::sort(z[n].begin(), z[n].end());
  auto ecdf = [](const std::vector<double>& v, double t) {
    return double(std::upper_bound(v.begin(), v.end(), t) - v.begin()) /
           double(v.size());
  };
  double worst = -1.0, worst_top = -1.0;
  for (int n = 0; n < n_levels; ++n) {
    for (std::size_t i = 0; i < z[n].size(); i += 37) {
      const double t = z[n][i];
      worst = std::max(worst, ecdf(z[n + 1], t) - ecdf(z[n], t));
    }
  }
  for (std::size_t i = 0; i < z[0].size(); i += 37) {
    const double t = z[0][i];
    worst_top = std::max(worst_top, ecdf(z[n_levels], t) - ecdf(z[0], t));
  }
  rep.worst_order_gap = worst;
  rep.ordered = worst <= rep.band;
  rep.zinf_vs_zeta_gap = worst_top;
  rep.zinf_dominates = worst_top <= rep.band;
  return rep;
}

SubseqReport subsequence_limits(const KaryConfig& config,
                                const std::vector<double>& x_offsets, int n_lo,
                                int n_hi, long n_mc) {
  if (x_offsets.size() < 1) throw config_error("subsequence: need offsets");
  for (double x : x_offsets)
    if (!(x >= 0.0 && x < 1.0))
      throw config_error("subsequence: offsets must lie in [0,1)");
  if (!(n_lo < n_hi)) throw config_error("subsequence: need n_lo < n_hi");
  // the statistic at depth n needs spine resolution well past n
  if (n_hi + 8 > config.depth_cutoff())
    throw config_error(
        "subsequence: depth cutoff too shallow for n_hi; lower dust_threshold");

  SubseqReport rep;
  const double logk = std::log((double)config.k);
  std::vector<std::vector<double>> stabilized;
  for (double x : x_offsets) {
    SubseqOffsetReport off;
    off.x = x;
    // split halves: depth n_hi-1 from even replicas, n_hi from odd
    std::vector<double> lo_half, hi_half;
    off.limit_values.reserve(n_mc);
    for (long r = 0; r < n_mc; ++r) {
      const std::uint64_t rep_id =
          mix64((std::uint64_t)(x * 4096.0)) + (std::uint64_t)r;
      const KaryRun run = kary_extinction(config, rep_id);
      const double e_hi = kary_subseq_exponent(config, run, x, n_hi);
      off.limit_values.push_back(std::exp(logk * e_hi));
      if (r % 2 == 0)
        lo_half.push_back(
            std::exp(logk * kary_subseq_exponent(config, run, x, n_hi - 1)));
      else
        hi_half.push_back(std::exp(logk * e_hi));
      // lattice check: exponent must sit on x + integers
      const double frac = e_hi - x;
      if (std::abs(frac - std::round(frac)) > 1e-9) off.lattice_ok = false;
    }
    auto ks = ks_two_sample(lo_half, hi_half);
    off.stabilization_ks = ks.ks;
    off.stabilized = ks.ks <= ks.band;
    stabilized.push_back(off.limit_values);
    rep.offsets.push_back(std::move(off));
  }
  if (stabilized.size() >= 2) {
    auto ks = ks_two_sample(stabilized[0], stabilized[1]);
    rep.cross_ks = ks.ks;
    // bootstrap CI for the two-sample KS
    Stream rng = Stream::from(config.seed, 0x63726f73ULL);
    std::vector<double> boot(200);
    for (int b = 0; b < 200; ++b) {
      std::vector<double> ra(stabilized[0].size()), rb(stabilized[1].size());
      for (auto& v : ra)
        v = stabilized[0][rng.next_u64() % stabilized[0].size()];
      for (auto& v : rb)
        v = stabilized[1][rng.next_u64() % stabilized[1].size()];
      boot[b] = ks_two_sample(ra, rb).ks;
    }
    std::sort(boot.begin(), boot.end());
    rep.cross_ks_ci = {boot[2], boot[197]};
    rep.cross_distinct = rep.cross_ks >= 0.1 && rep.cross_ks_ci.lo > 0.0;
  }
  for (const auto& off : rep.offsets)
    if (!off.stabilized) rep.inconclusive = true;
  return rep;
}

std::vector<double> kary_nx_oracle(const KaryConfig& config,
                                   const TransitionKernel& kernel,
                                   const GridSampler& pi_stat, double x,
                                   long n, std::uint64_t seed) {
  // stationary window emulating indices -15..40 of the eternal chain
  const int lo = -15, hi = 40;
  std::vector<double> out;
  out.reserve(n);
  const double logk = std::log((double)config.k);
  for (long r = 0; r < n; ++r) {
    Stream rng = Stream::from(seed, mix64(0x6e78ULL ^ (std::uint64_t)r));
    double z = pi_stat.sample(rng);
    int best = lo - 1;
    for (int idx = lo; idx <= hi; ++idx) {
      const double threshold = std::exp(logk * config.alpha * (x - idx));
      if (z >= threshold) best = idx;
      if (idx < hi) z = kernel.step(z, rng, /*want_delta=*/false).z;
    }
    out.push_back(std::exp(logk * (x - best)));
  }
  return out;
}

}  // namespace fragsim
