#include "fragsim/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fragsim/errors.hpp"
#include "fragsim/rng.hpp"

namespace fragsim {

double mean(const std::vector<double>& xs) {
  if (xs.empty()) throw insufficient_data_error("mean: empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / xs.size();
}

double variance(const std::vector<double>& xs) {
  if (xs.size() < 2) throw insufficient_data_error("variance: need >= 2");
  const double m = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / (xs.size() - 1);
}

double dkw_band(std::size_t n, double delta) {
  return std::sqrt(std::log(2.0 / delta) / (2.0 * double(n)));
}

EcdfReport ks_two_sample(std::vector<double> a, std::vector<double> b,
                         double tolerance) {
  if (a.empty() || b.empty())
    throw insufficient_data_error("ks_two_sample: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = double(a.size()), nb = double(b.size());
  std::size_t i = 0, j = 0;
  double ks = 0.0;
  while (i < a.size() || j < b.size()) {
    double x;
    if (i < a.size() && (j >= b.size() || a[i] <= b[j]))
      x = a[i];
    else
      x = b[j];
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    ks = std::max(ks, std::abs(double(i) / na - double(j) / nb));
  }
  EcdfReport r;
  r.n_a = a.size();
  r.n_b = b.size();
  r.ks = ks;
  r.band_a = dkw_band(a.size());
  r.band_b = dkw_band(b.size());
  r.band = r.band_a + r.band_b;
  r.tolerance = tolerance;
  r.pass = ks <= tolerance;
  return r;
}

double ks_vs_cdf(std::vector<double> samples,
                 const std::function<double(double)>& cdf) {
  if (samples.empty()) throw insufficient_data_error("ks_vs_cdf: empty sample");
  std::sort(samples.begin(), samples.end());
  const double n = double(samples.size());
  double ks = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double F = cdf(samples[i]);
    ks = std::max(ks, std::abs(double(i + 1) / n - F));
    ks = std::max(ks, std::abs(double(i) / n - F));
  }
  return ks;
}

double tv_histogram(const std::vector<double>& a, const std::vector<double>& b,
                    int bins, double lo, double hi) {
  if (bins < 1 || !(hi > lo)) throw config_error("tv_histogram: bad binning");
  std::vector<double> ha(bins + 1, 0.0), hb(bins + 1, 0.0);  // last = overflow
  auto fill = [&](const std::vector<double>& xs, std::vector<double>& h) {
    for (double x : xs) {
      if (x < lo || x >= hi) {
        h[bins] += 1.0;
        continue;
      }
      int k = int((x - lo) / (hi - lo) * bins);
      if (k >= bins) k = bins - 1;
      h[k] += 1.0;
    }
    for (double& v : h) v /= double(xs.size());
  };
  fill(a, ha);
  fill(b, hb);
  double tv = 0.0;
  for (int k = 0; k <= bins; ++k) tv += std::abs(ha[k] - hb[k]);
  return 0.5 * tv;
}

Interval bootstrap_ci(
    const std::vector<double>& xs,
    const std::function<double(const std::vector<double>&)>& statistic,
    int n_boot, double level, std::uint64_t seed) {
  if (n_boot < 200) throw config_error("bootstrap_ci: n_boot must be >= 200");
  if (xs.empty()) throw insufficient_data_error("bootstrap_ci: empty sample");
  Stream rng = Stream::from(seed, 0xb5a7ULL);
  std::vector<double> stats(n_boot);
  std::vector<double> resample(xs.size());
  for (int b = 0; b < n_boot; ++b) {
    for (std::size_t i = 0; i < xs.size(); ++i)
      resample[i] = xs[rng.next_u64() % xs.size()];
    stats[b] = statistic(resample);
  }
  std::sort(stats.begin(), stats.end());
  const double tail = (1.0 - level) / 2.0;
  auto pick = [&](double p) {
    double idx = p * (n_boot - 1);
    std::size_t k = (std::size_t)idx;
    double f = idx - double(k);
    return k + 1 < stats.size() ? stats[k] * (1 - f) + stats[k + 1] * f
                                : stats[k];
  };
  return {pick(tail), pick(1.0 - tail)};
}

LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 3)
    throw insufficient_data_error("fit_line: need >= 3 matched points");
  const double mx = mean(xs), my = mean(ys);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (f.intercept + f.slope * xs[i]);
    rss += r * r;
  }
  f.slope_se = std::sqrt(rss / double(xs.size() - 2) / sxx);
  return f;
}

namespace {

// Regularized upper incomplete gamma Q(a,x), series + continued fraction.
double igamc(double a, double x) {
  if (x <= 0.0) return 1.0;
  if (a <= 0.0) return 0.0;
  const double lg = std::lgamma(a);
  if (x < a + 1.0) {
    // P(a,x) by series, return 1 - P.
    double term = 1.0 / a, sum = term;
    for (int n = 1; n < 500; ++n) {
      term *= x / (a + n);
      sum += term;
      if (term < sum * 1e-16) break;
    }
    const double p = sum * std::exp(-x + a * std::log(x) - lg);
    return 1.0 - p;
  }
  // Lentz continued fraction for Q.
  double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -double(i) * (double(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::abs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - lg) * h;
}

}  // namespace

double chi2_sf(double x, int dof) { return igamc(0.5 * dof, 0.5 * x); }

double chi2_homogeneity_p(const std::vector<double>& counts_a,
                          const std::vector<double>& counts_b) {
  if (counts_a.size() != counts_b.size() || counts_a.empty())
    throw config_error("chi2_homogeneity: mismatched cells");
  double na = 0.0, nb = 0.0;
  for (double c : counts_a) na += c;
  for (double c : counts_b) nb += c;
  if (na <= 0.0 || nb <= 0.0)
    throw insufficient_data_error("chi2_homogeneity: empty table");
  double stat = 0.0;
  int cells = 0;
  for (std::size_t k = 0; k < counts_a.size(); ++k) {
    const double tot = counts_a[k] + counts_b[k];
    if (tot < 5.0) continue;  // merge-or-skip sparse cells
    const double ea = tot * na / (na + nb);
    const double eb = tot * nb / (na + nb);
    stat += (counts_a[k] - ea) * (counts_a[k] - ea) / ea;
    stat += (counts_b[k] - eb) * (counts_b[k] - eb) / eb;
    ++cells;
  }
  if (cells < 2) throw insufficient_data_error("chi2_homogeneity: too sparse");
  return chi2_sf(stat, cells - 1);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw config_error("normal_quantile: p in (0,1)");
  // Bisection on the standard normal CDF via erfc; accuracy far beyond need.
  double lo = -40.0, hi = 40.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double cdf = 0.5 * std::erfc(-mid / std::sqrt(2.0));
    (cdf < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double quantile(std::vector<double> xs, double p) {
  if (xs.empty()) throw insufficient_data_error("quantile: empty sample");
  std::sort(xs.begin(), xs.end());
  const double idx = p * double(xs.size() - 1);
  const std::size_t k = (std::size_t)idx;
  const double f = idx - double(k);
  return k + 1 < xs.size() ? xs[k] * (1 - f) + xs[k + 1] * f : xs[k];
}

}  // namespace fragsim
