#include "fragsim/renewal_limit.hpp"

#include <algorithm>
#include <cmath>

#include "fragsim/errors.hpp"

namespace fragsim {

RenewalFunctionals renewal_functionals(const std::vector<SpineStep>& chain,
                                       double r) {
  if (chain.empty()) throw chain_too_short_error("renewal: empty chain");
  RenewalFunctionals out;
  double s = 0.0;
  long j = 0;
  double s_j = 0.0;
  bool passed = false;
  for (std::size_t n = 1; n < chain.size(); ++n) {
    s += std::log(chain[n].Y);
    if (s <= r) {
      j = (long)n;
      s_j = s;
    } else {
      passed = true;
      break;
    }
  }
  if (!passed)
    throw chain_too_short_error(
        "renewal: chain never crossed r; extend n_steps");
  out.J = j;
  out.S_J = s_j;
  out.Z_J = chain[j].Z;
  out.overshoot = r - s_j;
  return out;
}

int BiasedLadder::segment_for(double t) const {
  if (!(t >= Rv.back() && t < Rv.front()))
    throw window_exceeded_error(
        "ladder: query time outside [R(k_max), R(k_min))");
  // Rv is strictly decreasing; find k with R(k+1) <= t < R(k)
  int lo = 0, hi = (int)Rv.size() - 1;
  while (lo + 1 < hi) {
    const int mid = (lo + hi) / 2;
    if (Rv[mid] > t)
      lo = mid;
    else
      hi = mid;
  }
  return k_min + lo;
}

LadderBuilder::LadderBuilder(const TransitionKernel& kernel,
                             const GridSampler& pi_stat, int n_candidates)
    : kernel_(&kernel), pi_(&pi_stat), n_candidates_(n_candidates) {
  if (n_candidates < 2) throw config_error("ladder: n_candidates must be >= 2");
}

namespace {

struct PairCandidates {
  std::vector<double> z0;
  std::vector<TransitionKernel::Mark> marks;
  int chosen = 0;
  double ess = 0.0;
};

// SIR over (Z0, step-1 mark) candidates; the bias weight log(Y1) depends on
// the first transition only, so resampling the candidate tuple reproduces the
// biased chain's law around index 0.
PairCandidates draw_pair_candidates(const TransitionKernel& kernel,
                                    const GridSampler& pi, int n_candidates,
                                    Stream& rng, bool want_delta) {
  PairCandidates out;
  out.z0.resize(n_candidates);
  out.marks.resize(n_candidates);
  std::vector<double> w(n_candidates);
  double wsum = 0.0, wsq = 0.0;
  for (int c = 0; c < n_candidates; ++c) {
    out.z0[c] = pi.sample(rng);
    out.marks[c] = kernel.step(out.z0[c], rng, want_delta);
    w[c] = std::log(out.marks[c].y);
    wsum += w[c];
    wsq += w[c] * w[c];
  }
  const double pick = rng.next_unit() * wsum;
  double acc = 0.0;
  out.chosen = n_candidates - 1;
  for (int c = 0; c < n_candidates; ++c) {
    acc += w[c];
    if (pick < acc) {
      out.chosen = c;
      break;
    }
  }
  out.ess = wsq > 0.0 ? wsum * wsum / wsq : 0.0;
  return out;
}

}  // namespace

LadderBuilder::Pair LadderBuilder::biased_pair(Stream& rng) const {
  auto cand = draw_pair_candidates(*kernel_, *pi_, n_candidates_, rng,
                                   /*want_delta=*/false);
  Pair p;
  p.z0 = cand.z0[cand.chosen];
  p.y1 = cand.marks[cand.chosen].y;
  p.ess = cand.ess;
  return p;
}

BiasedLadder LadderBuilder::build(int k_min, int k_max, Stream& rng) const {
  if (!(k_min <= 0 && 0 < k_max))
    throw config_error("ladder: window must satisfy k_min <= 0 < k_max");
  if (!kernel_->reverse_ready())
    throw config_error("ladder: kernel reverse tables not prepared");
  auto cand = draw_pair_candidates(*kernel_, *pi_, n_candidates_, rng,
                                   /*want_delta=*/true);

  BiasedLadder lad;
  lad.alpha = kernel_->alpha();
  lad.k_min = k_min;
  lad.k_max = k_max;
  const int len = k_max - k_min + 1;
  lad.Z.assign(len, 0.0);
  lad.Y.assign(len - 1, 1.0);
  lad.Theta.assign(len - 1, 1.0);
  lad.Delta.assign(len - 1, {});
  lad.ess = cand.ess;
  lad.weight_degenerate = cand.ess < double(n_candidates_) / 10.0;

  const int i0 = -k_min;  // position of index 0
  lad.Z[i0] = cand.z0[cand.chosen];
  {
    auto& m1 = cand.marks[cand.chosen];
    lad.Z[i0 + 1] = m1.z;
    lad.Y[i0] = m1.y;
    lad.Theta[i0] = m1.theta;
    lad.Delta[i0] = std::move(m1.delta);
  }

  // forward extension beyond the biased first transition
  double z = lad.Z[i0 + 1];
  for (int k = 2; k <= k_max; ++k) {
    auto m = kernel_->step(z, rng, true);
    lad.Z[i0 + k] = m.z;
    lad.Y[i0 + k - 1] = m.y;
    lad.Theta[i0 + k - 1] = m.theta;
    lad.Delta[i0 + k - 1] = std::move(m.delta);
    z = m.z;
  }
  // backward extension by the reversed kernel
  z = lad.Z[i0];
  for (int k = 0; k > k_min; --k) {
    auto m = kernel_->step_back(z, rng, true);
    lad.Z[i0 + k - 1] = m.z;
    lad.Y[i0 + k - 1] = m.y;
    lad.Theta[i0 + k - 1] = m.theta;
    lad.Delta[i0 + k - 1] = std::move(m.delta);
    z = m.z;
  }

  lad.U = rng.next_unit_open();
  lad.Rv.assign(len, 0.0);
  const double a = lad.alpha;
  lad.Rv[i0] = std::pow(lad.Yat(1), -a * lad.U);  // R(0)
  for (int k = 1; k <= k_max; ++k)
    lad.Rv[i0 + k] = lad.Rv[i0 + k - 1] * std::pow(lad.Yat(k), a);
  for (int k = 0; k > k_min; --k)
    lad.Rv[i0 + k - 1] = lad.Rv[i0 + k] * std::pow(lad.Yat(k), -a);
  return lad;
}

double last_fragment_limit_at(const BiasedLadder& ladder, double t) {
  const int k = ladder.segment_for(t);
  return std::pow(ladder.Zat(k), 1.0 / ladder.alpha) *
         std::pow(ladder.R(k), -1.0 / ladder.alpha);
}

LimitStateSample full_limit_sample(const BiasedLadder& ladder,
                                   const std::vector<double>& query_times,
                                   const FragmentationConfig& config,
                                   const DensityResult& densities,
                                   std::uint64_t salt,
                                   const LimitSampleOptions& opt) {
  if (query_times.empty())
    throw config_error("full_limit_sample: need query times");
  std::vector<double> ts = query_times;
  std::sort(ts.begin(), ts.end());

  LimitStateSample out;
  out.query_times = ts;
  out.states.assign(ts.size(), {});
  out.spine_values.assign(ts.size(), 0.0);
  out.budget.window_lo = ladder.k_min;
  out.budget.window_hi = ladder.k_max;

  const double a = ladder.alpha;
  std::vector<std::vector<double>> collect(ts.size());
  for (std::size_t q = 0; q < ts.size(); ++q) {
    const int k = ladder.segment_for(ts[q]);
    const double spine = std::pow(ladder.Zat(k), 1.0 / a) *
                         std::pow(ladder.R(k), -1.0 / a);
    out.spine_values[q] = spine;
    collect[q].push_back(spine);
  }

  const double Ftot = densities.F.values.back();
  auto Fz = [&](double x) { return densities.F.at_clamped(x) / Ftot; };

  FragmentationConfig block_cfg = config;
  block_cfg.dust_threshold = opt.block_dust;
  block_cfg.initial_mass = 1.0;

  const int i_top = ladder.segment_for(ts.front());  // largest contributing i
  for (int i = i_top; i > ladder.k_min; --i) {
    const double z_prev = ladder.Zat(i - 1);
    const double y_i = ladder.Yat(i);
    const double r_prev = ladder.R(i - 1);
    const double r_i = ladder.R(i);
    const auto& delta = ladder.Deltaat(i);
    for (std::size_t mto = 0; mto < delta.size(); ++mto) {
      const double dm = delta[mto];
      ++out.budget.blocks_total;
      const double x = z_prev * std::pow(y_i, a) * std::pow(dm, a);
      const double pref =
          dm * std::pow(z_prev, 1.0 / a) * std::pow(r_prev, -1.0 / a);
      // query times this block can contribute to: t < R(i)
      std::size_t q_hi = ts.size();
      while (q_hi > 0 && !(ts[q_hi - 1] < r_i)) --q_hi;
      if (q_hi == 0) continue;
      const double u_scale = std::pow(dm, a) * z_prev / r_prev;
      const double u_max = ts[q_hi - 1] * u_scale;
      const double fx = Fz(x);
      if (fx < 1e-12) {
        ++out.budget.blocks_skipped;
        continue;
      }
      const double p_vis = 1.0 - Fz(x - u_max) / fx;
      if (p_vis < opt.visibility_eps) {
        ++out.budget.blocks_skipped;
        out.budget.skipped_visibility += p_vis;
        continue;
      }
      // conditioned time-reversed block, evaluated at forward times x - u(t)
      SummaryOptions sopt;
      sopt.want_spine = false;
      std::vector<double> abs_times;
      for (std::size_t q = 0; q < q_hi; ++q)
        abs_times.push_back(x - ts[q] * u_scale);
      std::sort(abs_times.begin(), abs_times.end());
      sopt.absolute_times = abs_times;
      sopt.left_limits = true;
      try {
        auto run = simulate_conditioned_summary(
            block_cfg, x,
            mix64(salt ^ (std::uint64_t(i + 1000) << 20) ^ mto),
            opt.rejection_cap, sopt);
        out.budget.rejection_attempts += run.attempts;
        // abs_times ascending = query times descending
        for (std::size_t q = 0; q < q_hi; ++q) {
          const auto& st = run.summary.states_abs[q_hi - 1 - q];
          for (double m : st) collect[q].push_back(pref * m);
        }
      } catch (const rejection_budget_error&) {
        ++out.budget.blocks_capped;  // contributes the zero state
        out.budget.rejection_attempts += opt.rejection_cap;
      }
    }
  }
  for (std::size_t q = 0; q < ts.size(); ++q)
    out.states[q] = rearrange(std::move(collect[q]));
  return out;
}

PrelimitSample rescaled_prelimit(const FragmentationConfig& config,
                                 std::uint64_t replica, double eps,
                                 const std::vector<double>& query_times,
                                 double q_hat) {
  if (!(eps > 0.0)) throw config_error("prelimit: eps must be > 0");
  const double floor_eps = 100.0 * std::pow(config.dust_threshold, -config.alpha);
  if (eps < floor_eps)
    throw config_error(
        "prelimit: eps below 100 * dust^{-alpha}; the state near extinction "
        "would be distorted by the dust truncation (shrink dust_threshold)");
  std::vector<double> ts = query_times;
  std::sort(ts.begin(), ts.end());

  SummaryOptions opt;
  opt.want_spine = true;
  opt.q_hat = q_hat;
  for (double t : ts) opt.end_offsets.push_back(eps * t);
  RunSummary run = simulate_summary(config, replica, opt);
  if (!(eps < run.zeta))
    throw config_error("prelimit: eps must be smaller than zeta");

  PrelimitSample out;
  out.zeta = run.zeta;
  out.query_times = ts;
  const double resc = std::pow(eps, 1.0 / config.alpha);
  for (std::size_t q = 0; q < ts.size(); ++q) {
    if (eps * ts[q] >= run.zeta) {
      // before the first split in reversed time: the initial state
      out.states.push_back({resc * config.initial_mass});
      out.spine_values.push_back(resc * config.initial_mass);
      continue;
    }
    out.states.push_back(scale(resc, run.states_end[q]));
    const double tau = run.zeta - eps * ts[q];
    double mass = config.initial_mass;
    for (std::size_t k = 1; k < run.spine.size(); ++k) {
      if (run.spine[k].T < tau)
        mass *= run.spine[k].Theta;
      else
        break;
    }
    out.spine_values.push_back(resc * mass);
  }
  return out;
}

void require_non_arithmetic(const DislocationLaw& law) {
  const auto rep = law.is_geometric();
  if (rep.status == GeometricStatus::Geometric)
    throw config_error(
        "law is geometric (ratio " + std::to_string(rep.ratio) +
        "); scaling limits exist only along lattice subsequences - use the "
        "geometric subsequence mode instead");
  if (rep.status == GeometricStatus::Unknown)
    throw config_error(
        "law arithmeticity is ambiguous at detector tolerance; refusing the "
        "non-lattice limit mode");
}

}  // namespace fragsim
