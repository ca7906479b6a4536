#include "fragsim/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <sstream>

#include "fragsim/density_solver.hpp"
#include "fragsim/errors.hpp"
#include "fragsim/frag_engine.hpp"
#include "fragsim/geometric.hpp"
#include "fragsim/grid.hpp"
#include "fragsim/invariant.hpp"
#include "fragsim/parallel.hpp"
#include "fragsim/renewal_limit.hpp"
#include "fragsim/spine_chain.hpp"
#include "fragsim/stats.hpp"

namespace fragsim {

AcceptProfile AcceptProfile::desk() { return AcceptProfile{}; }

AcceptProfile AcceptProfile::quick() {
  AcceptProfile p;
  p.name = "quick";
  p.n_structure = 5000;
  p.n_density = 50000;
  p.n_two_route = 10000;
  p.n_ergodic = 10000;
  p.n_mu = 10000;
  p.n_renewal = 10000;
  p.n_lastfrag = 10000;
  p.n_full_limit = 2000;
  p.n_self_similar = 5000;
  p.n_invariance = 500;
  p.n_geometric = 10000;
  return p;
}

bool all_passed(const std::vector<CriterionResult>& results) {
  for (const auto& r : results)
    if (!r.pass) return false;
  return true;
}

namespace {

struct Shared {
  AcceptProfile prof;
  FragmentationConfig cfg;
  DensityResult dens;
  StationaryResult stat;
  TransitionKernel kernel;
  GridSampler pi_sampler;
  GridSampler f_sampler;
  LadderBuilder builder;
  double q999 = 0.0;

  explicit Shared(const AcceptProfile& p)
      : prof(p),
        cfg(make_cfg(p)),
        dens(solve_extinction_density(cfg.law, p.alpha, solver_options(p))),
        stat(solve_stationary(dens, p.tol)),
        kernel(dens),
        pi_sampler(stat.pi),
        f_sampler(dens.f),
        builder(kernel, pi_sampler, 32) {
    kernel.prepare_reverse(stat.pi);
    q999 = inverse_cdf(dens.F, 0.999);
  }

  static FragmentationConfig make_cfg(const AcceptProfile& p) {
    FragmentationConfig c;
    c.law = DislocationLaw::parse(p.law);
    c.alpha = p.alpha;
    c.dust_threshold = p.dust;
    c.seed = p.seed;
    return c;
  }
  static SolverOptions solver_options(const AcceptProfile& p) {
    SolverOptions o;
    o.grid = {p.x_max, p.n_points};
    o.tol = p.tol;
    o.n_quad = p.n_quad;
    return o;
  }

  double F_of(double x) const {
    return dens.F.at_clamped(x) / dens.F.values.back();
  }
};

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  }
};

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

// TV between a sample and the solved density, bin width = the grid step.
double tv_vs_density(const std::vector<double>& samples,
                     const DensityResult& d) {
  const int bins = d.F.n_points;
  std::vector<double> emp(bins + 1, 0.0);
  for (double x : samples) {
    if (x < 0.0 || x >= d.F.x_max) {
      emp[bins] += 1.0;
      continue;
    }
    int k = int(x / d.F.h());
    if (k >= bins) k = bins - 1;
    emp[k] += 1.0;
  }
  const double n = double(samples.size());
  const double tot = d.F.values.back();
  double tv = std::abs(emp[bins] / n - 0.0);
  for (int k = 0; k < bins; ++k) {
    const double model = (d.F.values[k + 1] - d.F.values[k]) / tot;
    tv += std::abs(emp[k] / n - model);
  }
  return 0.5 * tv;
}

struct LastFragSamples {
  std::vector<double> zeta;       // per replica
  std::vector<double> spine_val;  // eps^{1/alpha} F_*((zeta-eps)-)
  std::vector<double> total;      // eps^{1/alpha} ||F((zeta-eps)-)||_1
};

LastFragSamples collect_prelimit(const Shared& sh, double eps, long n,
                                 double dust, std::uint64_t salt) {
  LastFragSamples out;
  out.zeta.assign(n, 0.0);
  out.spine_val.assign(n, 0.0);
  out.total.assign(n, 0.0);
  FragmentationConfig cfg = sh.cfg;
  cfg.dust_threshold = dust;
  const std::vector<double> times{1.0};
  parallel_replicas(n, sh.prof.threads, [&](long r) {
    auto pre = rescaled_prelimit(cfg, mix64(salt) + std::uint64_t(r), eps,
                                 times, sh.q999);
    out.zeta[r] = pre.zeta;
    out.spine_val[r] = pre.spine_values[0];
    out.total[r] = total_mass(pre.states[0]);
  });
  return out;
}

BiasedLadder ladder_covering(const LadderBuilder& builder, double t_lo,
                             double t_hi, int k_min, int k_max, Stream& rng) {
  for (int attempt = 0; attempt < 6; ++attempt) {
    BiasedLadder lad = builder.build(k_min, k_max, rng);
    if (lad.R(lad.k_max) <= t_lo && t_hi < lad.R(lad.k_min)) return lad;
    k_min *= 2;
    k_max *= 2;
  }
  throw window_exceeded_error("ladder never covered the query range");
}

// ---------------- criteria ----------------

CriterionResult c1_structure(const Shared& sh, std::vector<double>& zetas,
                             std::vector<double>& z1s) {
  CriterionResult res{1, "conservation-and-structure", false, 0, 120, ""};
  Timer timer;
  const long n = sh.prof.n_structure;
  zetas.assign(n, 0.0);
  z1s.assign(n, -1.0);
  std::vector<std::uint64_t> violations(n, 0);
  std::vector<std::uint64_t> spine_violations(n, 0);
  SummaryOptions opt;
  opt.q_hat = sh.q999;
  parallel_replicas(n, sh.prof.threads, [&](long r) {
    auto run = simulate_summary(sh.cfg, std::uint64_t(r), opt);
    zetas[r] = run.zeta;
    violations[r] = run.conservation_violations;
    if (run.spine.size() > 1) z1s[r] = run.spine[1].Z;
    for (const auto& st : run.spine) {
      if (st.n == 0 || st.truncation_flag) continue;
      const double sum = st.Theta + total_mass(st.Delta);
      if (std::abs(sum - 1.0) > 1e-12) ++spine_violations[r];
    }
  });
  std::uint64_t bad_splits = 0, bad_steps = 0;
  for (long r = 0; r < n; ++r) {
    bad_splits += violations[r];
    bad_steps += spine_violations[r];
  }
  res.pass = bad_splits == 0 && bad_steps == 0;
  res.seconds = timer.seconds();
  res.detail = "split-violations=" + std::to_string(bad_splits) +
               " spine-violations=" + std::to_string(bad_steps) + " over " +
               std::to_string(n) + " trees";
  return res;
}

CriterionResult c2_density(const Shared& sh, double dust, long n, int id,
                           double* tv_out) {
  CriterionResult res{id, "density-vs-simulation", false, 0, 600, ""};
  Timer timer;
  FragmentationConfig cfg = sh.cfg;
  cfg.dust_threshold = dust;
  std::vector<double> zetas(n);
  SummaryOptions opt;
  opt.want_spine = false;
  opt.q_hat = sh.q999;
  parallel_replicas(n, sh.prof.threads, [&](long r) {
    zetas[r] = simulate_summary(cfg, 0x20000000ULL + std::uint64_t(r), opt).zeta;
  });
  const double tv = tv_vs_density(zetas, sh.dens);
  if (tv_out) *tv_out = tv;
  const auto diag = density_diagnostics(sh.dens, sh.cfg.law);
  res.pass = tv <= 0.02 && diag.max_ok && diag.tail_ok;
  res.seconds = timer.seconds();
  res.detail = "TV=" + fmt(tv) + " (<=0.02), max f=" + fmt(diag.max_density) +
               " (<=1), tail rate=" + fmt(diag.tail_rate) + " (>0)";
  return res;
}

CriterionResult c3_two_route(const Shared& sh, const std::vector<double>& zetas,
                             const std::vector<double>& z1s, long n, int id,
                             double* ks_out) {
  CriterionResult res{id, "kernel-two-route", false, 0, 600, ""};
  Timer timer;
  std::vector<double> extraction, kernel_side;
  extraction.reserve(n);
  kernel_side.reserve(n);
  for (long r = 0; r < (long)zetas.size() && (long)extraction.size() < n; ++r) {
    if (z1s[r] < 0.0) continue;
    extraction.push_back(z1s[r]);
    Stream rng = Stream::from(sh.cfg.seed, mix64(0xc3ULL ^ std::uint64_t(r)));
    kernel_side.push_back(
        sh.kernel.step(zetas[r], rng, /*want_delta=*/false).z);
  }
  auto rep = ks_two_sample(extraction, kernel_side, 0.05);
  if (ks_out) *ks_out = rep.ks;
  res.pass = rep.pass;
  res.seconds = timer.seconds();
  res.detail = "KS=" + fmt(rep.ks) + " (<=0.05) at n=" +
               std::to_string(extraction.size());
  return res;
}

CriterionResult c4_ergodicity(const Shared& sh) {
  CriterionResult res{4, "ergodicity-and-stationarity", false, 0, 900, ""};
  Timer timer;
  const auto rep = ergodicity_report({0.2, 1.0, 4.0}, 30, sh.prof.n_ergodic,
                                     sh.kernel, sh.pi_sampler,
                                     sh.cfg.seed ^ 0xe42ULL);
  double ks30 = 0.0;
  for (const auto& ks : rep.ks_by_n) ks30 = std::max(ks30, ks.back());
  // kernel pushforward of pi reproduces pi within 5 tol (sup-norm)
  GridFunction push = stationary_map(sh.dens, sh.stat.pi);
  normalize_density(push);
  double closure = 0.0;
  for (int j = 0; j < push.size(); ++j)
    closure = std::max(closure,
                       std::abs(push.values[j] - sh.stat.pi.values[j]));
  res.pass = ks30 <= 0.03 && closure <= 5.0 * sh.prof.tol;
  res.seconds = timer.seconds();
  res.detail = "max KS(n=30)=" + fmt(ks30) + " (<=0.03), closure=" +
               fmt(closure) + " (<=" + fmt(5.0 * sh.prof.tol) + ")";
  return res;
}

CriterionResult c5_mu(const Shared& sh) {
  CriterionResult res{5, "mu-positivity", false, 0, 120, ""};
  Timer timer;
  const auto est = estimate_mu(sh.kernel, sh.pi_sampler, sh.prof.n_mu,
                               sh.cfg.seed ^ 0x3a5ULL, 0.99);
  res.pass = est.ci.lo > 0.0;
  res.seconds = timer.seconds();
  res.detail = "mu=" + fmt(est.mu) + " 99% CI [" + fmt(est.ci.lo) + ", " +
               fmt(est.ci.hi) + "] (lower bound > 0)";
  return res;
}

CriterionResult c6_renewal(const Shared& sh) {
  CriterionResult res{6, "markov-renewal-limit", false, 0, 600, ""};
  Timer timer;
  const double r_level = 8.0;
  const long n = sh.prof.n_renewal;
  std::vector<double> zj(n), over(n), zb(n), ub(n);
  parallel_replicas(n, sh.prof.threads, [&](long r) {
    Stream rng = Stream::from(sh.cfg.seed, mix64(0x6a1ULL ^ std::uint64_t(r)));
    double z = sh.f_sampler.sample(rng);  // Z0 = zeta has density f
    double s = 0.0, zcur = z, zprev = z, sprev = 0.0;
    for (int k = 0; k < 600 && s <= r_level; ++k) {
      zprev = zcur;
      sprev = s;
      auto m = sh.kernel.step(zcur, rng, false);
      zcur = m.z;
      s += std::log(m.y);
    }
    zj[r] = zprev;
    over[r] = r_level - sprev;
    auto pair = sh.builder.biased_pair(rng);
    zb[r] = pair.z0;
    ub[r] = rng.next_unit_open() * std::log(pair.y1);
  });
  auto k1 = ks_two_sample(zj, zb, 0.05);
  auto k2 = ks_two_sample(over, ub, 0.05);
  res.pass = k1.pass && k2.pass;
  res.seconds = timer.seconds();
  res.detail = "KS(Z_J vs Z0^bias)=" + fmt(k1.ks) + ", KS(overshoot vs U logY)=" +
               fmt(k2.ks) + " (<=0.05)";
  return res;
}

CriterionResult c7_lastfrag(const Shared& sh, double dust, long n, int id,
                            double* ks_out) {
  CriterionResult res{id, "last-fragment-limit", false, 0, 1200, ""};
  Timer timer;
  const double eps = 1e-3;
  auto pre = collect_prelimit(sh, eps, n, dust, 0x71ULL);
  std::vector<double> ladder_vals(n);
  parallel_replicas(n, sh.prof.threads, [&](long r) {
    Stream rng = Stream::from(sh.cfg.seed, mix64(0x7bULL ^ std::uint64_t(r)));
    auto pair = sh.builder.biased_pair(rng);
    const double u = rng.next_unit_open();
    ladder_vals[r] =
        std::pow(pair.y1, u) * std::pow(pair.z0, 1.0 / sh.cfg.alpha);
  });
  auto ks = ks_two_sample(pre.spine_val, ladder_vals, 0.05);
  if (ks_out) *ks_out = ks.ks;

  // independence diagnostics: split the extraction sample at the zeta median
  std::vector<double> lo_half, hi_half;
  const double med = quantile(pre.zeta, 0.5);
  for (long r = 0; r < n; ++r)
    (pre.zeta[r] <= med ? lo_half : hi_half).push_back(pre.spine_val[r]);
  auto ks_ind = ks_two_sample(lo_half, hi_half, 0.05);
  // correlation within noise of zero
  double corr = 0.0;
  {
    const double mz = mean(pre.zeta), mv = mean(pre.spine_val);
    double num = 0.0, dz = 0.0, dv = 0.0;
    for (long r = 0; r < n; ++r) {
      num += (pre.zeta[r] - mz) * (pre.spine_val[r] - mv);
      dz += (pre.zeta[r] - mz) * (pre.zeta[r] - mz);
      dv += (pre.spine_val[r] - mv) * (pre.spine_val[r] - mv);
    }
    corr = num / std::sqrt(dz * dv);
  }
  const double corr_noise = 4.0 / std::sqrt(double(n));
  res.pass = ks.pass && ks_ind.pass && std::abs(corr) <= corr_noise;
  res.seconds = timer.seconds();
  res.detail = "KS=" + fmt(ks.ks) + " (<=0.05), median-split KS=" +
               fmt(ks_ind.ks) + " (<=0.05), corr=" + fmt(corr);
  return res;
}

CriterionResult c8_full_limit(const Shared& sh) {
  CriterionResult res{8, "full-limit-total-mass", false, 0, 2700, ""};
  Timer timer;
  const double eps = 1e-3;
  const long n = sh.prof.n_full_limit;
  auto pre = collect_prelimit(sh, eps, n, sh.prof.dust, 0x81ULL);

  auto limit_totals = [&](int kmin, int kmax, std::uint64_t salt) {
    std::vector<double> totals(n);
    const std::vector<double> ts{1.0};
    parallel_replicas(n, sh.prof.threads, [&](long r) {
      Stream rng =
          Stream::from(sh.cfg.seed, mix64(salt ^ std::uint64_t(r)));
      BiasedLadder lad = ladder_covering(sh.builder, 1.0, 1.0, kmin, kmax, rng);
      auto sample = full_limit_sample(lad, ts, sh.cfg, sh.dens,
                                      mix64(salt) + std::uint64_t(r));
      totals[r] = total_mass(sample.states[0]);
    });
    return totals;
  };
  auto lim1 = limit_totals(-40, 40, 0x88aULL);
  auto ks1 = ks_two_sample(pre.total, lim1, 0.07);
  auto lim2 = limit_totals(-80, 80, 0x88bULL);
  auto ks2 = ks_two_sample(pre.total, lim2, 0.07);
  const double shift = std::abs(ks1.ks - ks2.ks);
  res.pass = ks1.pass && ks2.pass && shift <= 0.02;
  res.seconds = timer.seconds();
  res.detail = "KS=" + fmt(ks1.ks) + " (<=0.07), window-doubled KS=" +
               fmt(ks2.ks) + ", shift=" + fmt(shift) + " (<=0.02)";
  return res;
}

CriterionResult c9_self_similarity(const Shared& sh) {
  CriterionResult res{9, "limit-self-similarity", false, 0, 300, ""};
  Timer timer;
  const long n = sh.prof.n_self_similar;
  const double a = 2.0;
  std::vector<double> lhs(n), rhs(n);
  parallel_replicas(n, sh.prof.threads, [&](long r) {
    Stream rng1 =
        Stream::from(sh.cfg.seed, mix64(0x91aULL ^ std::uint64_t(r)));
    BiasedLadder lad1 = ladder_covering(sh.builder, a, a, -16, 10, rng1);
    lhs[r] = std::pow(a, 1.0 / sh.cfg.alpha) * last_fragment_limit_at(lad1, a);
    Stream rng2 =
        Stream::from(sh.cfg.seed, mix64(0x91bULL ^ std::uint64_t(r)));
    BiasedLadder lad2 = ladder_covering(sh.builder, 1.0, 1.0, -16, 10, rng2);
    rhs[r] = last_fragment_limit_at(lad2, 1.0);
  });
  auto ks = ks_two_sample(lhs, rhs, 0.02);
  res.pass = ks.pass;
  res.seconds = timer.seconds();
  res.detail = "KS(a^{1/alpha} C*(a) vs C*(1))=" + fmt(ks.ks) + " (<=0.02)";
  return res;
}

CriterionResult c10_invariance(const Shared& sh) {
  CriterionResult res{10, "invariant-measure", false, 0, 2700, ""};
  Timer timer;
  // geometric time grid; the integrand of every desk event dies well before
  // the upper end
  std::vector<double> t_grid;
  for (int i = 0; i < 24; ++i)
    t_grid.push_back(0.02 * std::pow(16.0 / 0.02, i / 23.0));
  auto paths = sample_limit_paths((int)sh.prof.n_invariance, t_grid,
                                  sh.builder, -40, 40, sh.cfg, sh.dens,
                                  sh.cfg.seed ^ 0xa10ULL);
  const auto events = EventPredicate::desk_family();
  auto rep = invariance_test(events, 0.05, paths, sh.cfg,
                             sh.cfg.seed ^ 0xa11ULL);
  // negative control: corrupted rate exponent alpha/2 must fail loudly
  FragmentationConfig broken = sh.cfg;
  broken.alpha = sh.cfg.alpha / 2.0;
  auto control = invariance_test(events, 0.05, paths, broken,
                                 sh.cfg.seed ^ 0xa12ULL);
  res.pass = rep.pass && control.max_abs_z > 5.0;
  res.seconds = timer.seconds();
  res.detail = "max|z|=" + fmt(rep.max_abs_z) + " (<=" + fmt(rep.z_cutoff) +
               "), control max|z|=" + fmt(control.max_abs_z) + " (>5)";
  return res;
}

CriterionResult c11_geometric(const Shared& sh) {
  CriterionResult res{11, "geometric-suite", false, 0, 1200, ""};
  Timer timer;
  KaryConfig kc;
  kc.k = 2;
  kc.alpha = sh.cfg.alpha;
  kc.dust_threshold = 1e-12;
  kc.seed = sh.cfg.seed ^ 0xb11ULL;

  auto mono = stochastic_monotonicity_check(kc, 10, sh.prof.n_geometric);
  auto subseq =
      subsequence_limits(kc, {0.0, 0.5}, 6, 12, sh.prof.n_geometric);

  // N(x) oracle from the stationary chain of the k-ary kernel
  SolverOptions so = Shared::solver_options(sh.prof);
  auto kary_dens = solve_extinction_density(DislocationLaw::kary_equal(kc.k),
                                            kc.alpha, so);
  auto kary_stat = solve_stationary(kary_dens, sh.prof.tol);
  TransitionKernel kary_kernel(kary_dens);
  GridSampler kary_pi(kary_stat.pi);
  bool nx_ok = true;
  double nx_worst = 0.0;
  for (std::size_t xi = 0; xi < subseq.offsets.size(); ++xi) {
    auto oracle =
        kary_nx_oracle(kc, kary_kernel, kary_pi, subseq.offsets[xi].x,
                       sh.prof.n_geometric / 2, kc.seed ^ (0xccULL + xi));
    auto ks = ks_two_sample(subseq.offsets[xi].limit_values, oracle, 0.05);
    nx_worst = std::max(nx_worst, ks.ks);
    nx_ok = nx_ok && ks.pass;
  }
  bool lattice_ok = true, stabilized = true;
  for (const auto& off : subseq.offsets) {
    lattice_ok = lattice_ok && off.lattice_ok;
    stabilized = stabilized && off.stabilized;
  }
  res.pass = mono.f1_eq_f0k && mono.ordered && mono.zinf_dominates &&
             stabilized && lattice_ok && subseq.cross_distinct && nx_ok;
  res.seconds = timer.seconds();
  res.detail = "F1=F0^k gap=" + fmt(mono.f1_vs_f0k_gap) + ", ordered=" +
               std::to_string(mono.ordered) + ", cross KS=" +
               fmt(subseq.cross_ks) + " (>=0.1, CI lo=" +
               fmt(subseq.cross_ks_ci.lo) + "), N(x) KS=" + fmt(nx_worst) +
               " (<=0.05)";
  return res;
}

CriterionResult c12_truncation(const Shared& sh, double tv_ref, double ks3_ref,
                               double ks7_ref, std::ostream& log) {
  CriterionResult res{12, "truncation-robustness", false, 0, 2400, ""};
  Timer timer;
  const double dust2 = 5e-7;
  double tv2 = 0.0, ks3 = 0.0, ks7 = 0.0;
  auto r2 = c2_density(sh, dust2, sh.prof.n_density, 12, &tv2);
  log << "      [c12] density re-run: " << r2.detail << "\n";
  std::vector<double> zetas(sh.prof.n_two_route), z1s(sh.prof.n_two_route);
  {
    FragmentationConfig cfg = sh.cfg;
    cfg.dust_threshold = dust2;
    SummaryOptions opt;
    opt.q_hat = sh.q999;
    parallel_replicas(sh.prof.n_two_route, sh.prof.threads, [&](long r) {
      auto run = simulate_summary(cfg, 0x30000000ULL + std::uint64_t(r), opt);
      zetas[r] = run.zeta;
      z1s[r] = run.spine.size() > 1 ? run.spine[1].Z : -1.0;
    });
  }
  auto r3 = c3_two_route(sh, zetas, z1s, sh.prof.n_two_route, 12, &ks3);
  log << "      [c12] two-route re-run: " << r3.detail << "\n";
  auto r7 = c7_lastfrag(sh, dust2, sh.prof.n_lastfrag, 12, &ks7);
  log << "      [c12] last-fragment re-run: " << r7.detail << "\n";
  const bool shifts_ok = std::abs(tv2 - tv_ref) < 0.02 &&
                         std::abs(ks3 - ks3_ref) < 0.05 &&
                         std::abs(ks7 - ks7_ref) < 0.05;
  res.pass = r2.pass && r3.pass && r7.pass && shifts_ok;
  res.seconds = timer.seconds();
  res.detail = "dTV=" + fmt(std::abs(tv2 - tv_ref)) + " (<0.02), dKS3=" +
               fmt(std::abs(ks3 - ks3_ref)) + " (<0.05), dKS7=" +
               fmt(std::abs(ks7 - ks7_ref)) + " (<0.05)";
  return res;
}

void emit(std::ostream& log, const CriterionResult& r) {
  log << (r.pass ? "PASS" : "FAIL") << "  C" << (r.id < 10 ? "0" : "")
      << r.id << " " << r.name << ": " << r.detail << "  [" << fmt(r.seconds)
      << " s, budget " << fmt(r.budget_seconds) << " s]\n"
      << std::flush;
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const AcceptProfile& profile,
                                            std::ostream& log) {
  log << "acceptance profile '" << profile.name << "': law=" << profile.law
      << " alpha=" << profile.alpha << " dust=" << profile.dust
      << " seed=" << profile.seed << "\n";
  Timer total;
  Shared sh(profile);
  log << "solver: " << sh.dens.iterations
      << " sweeps, residual=" << sh.dens.residual
      << "; stationary: " << sh.stat.iterations
      << " sweeps, residual=" << sh.stat.residual << "\n";

  std::vector<CriterionResult> out;
  std::vector<double> zetas, z1s;
  double tv_ref = 0.0, ks3_ref = 0.0, ks7_ref = 0.0;

  out.push_back(c1_structure(sh, zetas, z1s));
  emit(log, out.back());
  out.push_back(c2_density(sh, profile.dust, profile.n_density, 2, &tv_ref));
  out.back().budget_seconds = 600;
  emit(log, out.back());
  out.push_back(
      c3_two_route(sh, zetas, z1s, profile.n_two_route, 3, &ks3_ref));
  emit(log, out.back());
  out.push_back(c4_ergodicity(sh));
  emit(log, out.back());
  out.push_back(c5_mu(sh));
  emit(log, out.back());
  out.push_back(c6_renewal(sh));
  emit(log, out.back());
  out.push_back(c7_lastfrag(sh, profile.dust, profile.n_lastfrag, 7, &ks7_ref));
  emit(log, out.back());
  out.push_back(c8_full_limit(sh));
  emit(log, out.back());
  out.push_back(c9_self_similarity(sh));
  emit(log, out.back());
  out.push_back(c10_invariance(sh));
  emit(log, out.back());
  out.push_back(c11_geometric(sh));
  emit(log, out.back());
  out.push_back(c12_truncation(sh, tv_ref, ks3_ref, ks7_ref, log));
  emit(log, out.back());

  int passed = 0;
  for (const auto& r : out) passed += r.pass ? 1 : 0;
  log << (passed == (int)out.size() ? "ALL PASS" : "FAILURES PRESENT") << " ("
      << passed << "/" << out.size() << ") in " << fmt(total.seconds())
      << " s\n";
  return out;
}

}  // namespace fragsim
