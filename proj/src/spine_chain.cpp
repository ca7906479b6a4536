#include "fragsim/spine_chain.hpp"

#include <algorithm>
#include <cmath>

#include "fragsim/errors.hpp"

namespace fragsim {

TransitionKernel::TransitionKernel(const DensityResult& densities)
    : dens_(&densities), alpha_(densities.alpha) {
  const GridFunction& f = densities.f;
  const GridFunction& F = densities.F;
  h_ = f.h();
  n_ = f.n_points;
  for (std::size_t l = 0; l < densities.atoms.size(); ++l) {
    const auto& atom = densities.atoms[l];
    const int nf = (int)atom.masses.size();
    for (int i = 0; i < nf; ++i) {
      Pair p;
      p.weight = atom.weight;
      p.atom = (std::uint32_t)l;
      p.index = (std::uint16_t)i;
      p.nfrag = (std::uint16_t)nf;
      const double si = atom.masses[i];
      p.a = std::pow(si, alpha_);
      p.b = std::pow(si, -alpha_);
      p.cfac.resize(nf);
      for (int j = 0; j < nf; ++j)
        p.cfac[j] = std::pow(atom.masses[j] / si, alpha_);
      // cumulative of g(u) = e^{b u} f(u) prod_{j != i} F(c_ij u)
      p.cum.resize(n_ + 1);
      double prev = 0.0, acc = 0.0;
      p.cum[0] = 0.0;
      for (int jn = 1; jn <= n_; ++jn) {
        const double u = f.x(jn);
        double g = std::exp(p.b * u) * f.values[jn];
        for (int j = 0; j < nf && g != 0.0; ++j) {
          if (j == i) continue;
          g *= F.at_clamped(p.cfac[j] * u);
        }
        acc += 0.5 * h_ * (prev + g);
        p.cum[jn] = acc;
        prev = g;
      }
      pairs_.push_back(std::move(p));
    }
  }
}

namespace {

// value of a cumulative table at an arbitrary point (linear interpolation)
inline double cum_at(const std::vector<double>& cum, double h, int n, double u) {
  if (u <= 0.0) return 0.0;
  const double t = u / h;
  if (t >= n) return cum[n];
  const int j = (int)t;
  const double f = t - j;
  return cum[j] * (1.0 - f) + cum[j + 1] * f;
}

// solve cum(u) = target on [0, cap] (cum non-decreasing)
inline double cum_inverse(const std::vector<double>& cum, double h, int n,
                          double target, double cap) {
  int lo = 0, hi = std::min(n, (int)std::ceil(cap / h));
  while (lo < hi) {
    const int mid = (lo + hi) / 2;
    if (cum[mid] < target)
      lo = mid + 1;
    else
      hi = mid;
  }
  if (lo == 0) return 0.0;
  const double c0 = cum[lo - 1], c1 = cum[lo];
  const double frac = c1 > c0 ? (target - c0) / (c1 - c0) : 0.0;
  return std::min((lo - 1 + frac) * h, cap);
}

}  // namespace

TransitionKernel::Mark TransitionKernel::finish_mark(const Pair& p,
                                                     double z_from,
                                                     double y_to,
                                                     bool want_delta,
                                                     bool forward) const {
  Mark m;
  m.z = forward ? y_to : z_from;
  const auto& masses = dens_->atoms[p.atom].masses;
  m.theta = masses[p.index];
  m.y = std::pow(y_to / z_from, 1.0 / alpha_) / m.theta;
  if (want_delta) {
    m.delta.reserve(p.nfrag - 1);
    for (int j = 0; j < p.nfrag; ++j)
      if (j != p.index) m.delta.push_back(masses[j]);
  }
  return m;
}

TransitionKernel::Mark TransitionKernel::step(double z, Stream& rng,
                                              bool want_delta) const {
  if (!(z > 0.0)) throw config_error("kernel step: z must be > 0");
  thread_local std::vector<double> w;
  w.resize(pairs_.size());
  double total = 0.0;
  for (std::size_t k = 0; k < pairs_.size(); ++k) {
    const Pair& p = pairs_[k];
    const double cap = std::min(p.a * z, dens_->f.x_max);
    total += p.weight * cum_at(p.cum, h_, n_, cap);
    w[k] = total;
  }
  if (!(total > 0.0))
    throw unsupported_point_error(
        "kernel step: no transition mass at z (beyond grid support)");
  const double pick = rng.next_unit() * total;
  std::size_t k = std::lower_bound(w.begin(), w.end(), pick) - w.begin();
  if (k >= pairs_.size()) k = pairs_.size() - 1;
  const Pair& p = pairs_[k];
  const double cap = std::min(p.a * z, dens_->f.x_max);
  const double mass = cum_at(p.cum, h_, n_, cap);
  const double y = cum_inverse(p.cum, h_, n_, rng.next_unit_open() * mass, cap);
  return finish_mark(p, z, y, want_delta, /*forward=*/true);
}

double TransitionKernel::kernel_cdf(double x, double y) const {
  if (!(x > 0.0)) throw config_error("kernel_cdf: x must be > 0");
  double num = 0.0, den = 0.0;
  for (const Pair& p : pairs_) {
    const double cap = std::min(p.a * x, dens_->f.x_max);
    den += p.weight * cum_at(p.cum, h_, n_, cap);
    num += p.weight * cum_at(p.cum, h_, n_, std::min(y, cap));
  }
  if (!(den > 0.0))
    throw unsupported_point_error("kernel_cdf: no mass at x");
  return num / den;
}

void TransitionKernel::prepare_reverse(const GridFunction& pi_stat) {
  const GridFunction& f = dens_->f;
  suffix_ = GridFunction({f.x_max, n_});
  // ratio pi/f with the same nearest-valid-node guard as the solver
  std::vector<double> ratio(n_ + 1, 0.0);
  int last = -1;
  for (int j = 0; j <= n_; ++j)
    if (f.values[j] >= 1e-12) {
      ratio[j] = pi_stat.values[j] / f.values[j];
      last = j;
    }
  (void)last;
  for (int j = 0; j <= n_; ++j) {
    if (f.values[j] >= 1e-12) continue;
    int left = j - 1;
    while (left >= 0 && f.values[left] < 1e-12) --left;
    int right = j + 1;
    while (right <= n_ && f.values[right] < 1e-12) ++right;
    if (left >= 0)
      ratio[j] = ratio[left];
    else if (right <= n_)
      ratio[j] = ratio[right];
  }
  double acc = 0.0;
  suffix_.values[n_] = 0.0;
  for (int j = n_; j >= 1; --j) {
    const double g1 = std::exp(-f.x(j)) * ratio[j];
    const double g0 = std::exp(-f.x(j - 1)) * ratio[j - 1];
    acc += 0.5 * h_ * (g0 + g1);
    suffix_.values[j - 1] = acc;
  }
}

TransitionKernel::Mark TransitionKernel::step_back(double z, Stream& rng,
                                                   bool want_delta) const {
  if (suffix_.values.empty())
    throw config_error("step_back: prepare_reverse() not called");
  if (!(z > 0.0)) throw config_error("step_back: z must be > 0");
  const GridFunction& F = dens_->F;
  thread_local std::vector<double> w;
  w.resize(pairs_.size());
  double total = 0.0;
  for (std::size_t k = 0; k < pairs_.size(); ++k) {
    const Pair& p = pairs_[k];
    double pref = 0.0;
    const double lo = p.b * z;  // predecessor must exceed s_i^{-alpha} z
    if (lo < suffix_.x_max) {
      pref = p.weight * std::exp(p.b * z);
      for (int j = 0; j < p.nfrag && pref != 0.0; ++j) {
        if (j == p.index) continue;
        pref *= F.at_clamped(p.cfac[j] * z);
      }
      pref *= suffix_.at_clamped(lo);
    }
    total += pref;
    w[k] = total;
  }
  if (!(total > 0.0))
    throw unsupported_point_error("step_back: no reverse mass at z");
  const double pick = rng.next_unit() * total;
  std::size_t k = std::lower_bound(w.begin(), w.end(), pick) - w.begin();
  if (k >= pairs_.size()) k = pairs_.size() - 1;
  const Pair& p = pairs_[k];
  const double lo = p.b * z;
  // sample x on (lo, x_max] with density proportional to pi e^{-x}/f(x):
  // suffix Q is decreasing; solve Q(x) = v * Q(lo)
  const double qlo = suffix_.at_clamped(lo);
  const double target = rng.next_unit_open() * qlo;
  int a = 0, b = n_;
  while (a < b) {  // first node with Q <= target
    const int mid = (a + b) / 2;
    if (suffix_.values[mid] > target)
      a = mid + 1;
    else
      b = mid;
  }
  double x;
  if (a == 0)
    x = 0.0;
  else {
    const double q0 = suffix_.values[a - 1], q1 = suffix_.values[a];
    const double frac = q0 > q1 ? (q0 - target) / (q0 - q1) : 0.0;
    x = (a - 1 + frac) * h_;
  }
  x = std::max(x, lo);
  return finish_mark(p, x, z, want_delta, /*forward=*/false);
}

std::vector<SpineStep> run_chain(double z0, int n_steps,
                                 const TransitionKernel& kernel, Stream& rng,
                                 bool want_delta) {
  if (n_steps < 1) throw config_error("run_chain: n_steps must be >= 1");
  std::vector<SpineStep> steps;
  steps.reserve(n_steps + 1);
  SpineStep s0;
  s0.n = 0;
  s0.Z = z0;
  s0.Y = std::pow(z0, 1.0 / kernel.alpha());
  steps.push_back(std::move(s0));
  double z = z0;
  double prod_ya = 1.0;
  for (int n = 1; n <= n_steps; ++n) {
    auto m = kernel.step(z, rng, want_delta);
    prod_ya *= std::pow(m.y, kernel.alpha());
    SpineStep st;
    st.n = n;
    st.T = z0 * (1.0 - prod_ya);
    st.Z = m.z;
    st.Y = m.y;
    st.Theta = m.theta;
    st.Delta = std::move(m.delta);
    steps.push_back(std::move(st));
    z = st.Z;
  }
  return steps;
}

double s_log_sum(const std::vector<SpineStep>& steps, int n) {
  double s = 0.0;
  for (int i = 1; i <= n && i < (int)steps.size(); ++i)
    s += std::log(steps[i].Y);
  return s;
}

MuEstimate estimate_mu(const TransitionKernel& kernel, const GridSampler& pi,
                       long n, std::uint64_t seed, double level) {
  if (n < 100)
    throw insufficient_data_error("estimate_mu: need at least 100 samples");
  MuEstimate est;
  est.samples.reserve(n);
  Stream rng = Stream::from(seed, 0x6d75ULL);
  for (long i = 0; i < n; ++i) {
    const double z0 = pi.sample(rng);
    auto m = kernel.step(z0, rng, /*want_delta=*/false);
    est.samples.push_back(std::log(m.y));
  }
  est.mu = mean(est.samples);
  est.ci = bootstrap_ci(
      est.samples, [](const std::vector<double>& v) { return mean(v); }, 400,
      level, seed ^ 0x6d75ULL);
  double m2 = 0.0, m4 = 0.0;
  for (double x : est.samples) {
    m2 += x * x;
    m4 += x * x * x * x;
  }
  est.moment2 = m2 / double(n);
  est.moment4 = m4 / double(n);
  return est;
}

ErgodicityReport ergodicity_report(const std::vector<double>& starts,
                                   int n_steps, long n_rep,
                                   const TransitionKernel& kernel,
                                   const GridSampler& pi_stat,
                                   std::uint64_t seed) {
  if (starts.size() < 2)
    throw config_error("ergodicity_report: need >= 2 starting points");
  ErgodicityReport rep;
  rep.starts = starts;
  rep.n_rep = n_rep;
  auto cdf = [&](double x) { return pi_stat.cdf_at(x); };
  std::vector<std::vector<double>> samples(n_steps + 1);
  for (std::size_t s = 0; s < starts.size(); ++s) {
    for (auto& v : samples) {
      v.clear();
      v.reserve(n_rep);
    }
    for (long r = 0; r < n_rep; ++r) {
      Stream rng = Stream::from(seed, mix64((s << 40) ^ std::uint64_t(r)));
      double z = starts[s];
      samples[0].push_back(z);
      for (int n = 1; n <= n_steps; ++n) {
        z = kernel.step(z, rng, /*want_delta=*/false).z;
        samples[n].push_back(z);
      }
    }
    std::vector<double> ks(n_steps + 1);
    for (int n = 0; n <= n_steps; ++n) ks[n] = ks_vs_cdf(samples[n], cdf);
    rep.ks_by_n.push_back(std::move(ks));
  }
  // geometric decay fit over steps where KS is above the noise floor
  const double floor = 3.0 * dkw_band(n_rep);
  std::vector<double> xs, ys;
  for (std::size_t s = 0; s < starts.size(); ++s)
    for (int n = 0; n <= n_steps; ++n)
      if (rep.ks_by_n[s][n] > floor) {
        xs.push_back(double(n));
        ys.push_back(std::log(rep.ks_by_n[s][n]));
      }
  if (xs.size() >= 3) {
    auto fit = fit_line(xs, ys);
    rep.decay_rate = std::exp(-fit.slope);
    rep.decay_rate_se = fit.slope_se * rep.decay_rate;
  }
  rep.final_ks_max = 0.0;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    rep.final_ks_max = std::max(rep.final_ks_max, rep.ks_by_n[s][n_steps]);
    for (int n = 5; n < n_steps; ++n)
      if (rep.ks_by_n[s][n + 1] >
          rep.ks_by_n[s][n] + 2.0 * dkw_band(n_rep))
        rep.contracts = false;
  }
  return rep;
}

}  // namespace fragsim
