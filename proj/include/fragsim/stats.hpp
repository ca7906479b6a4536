#pragma once

// Statistical verification primitives shared by the test and acceptance
// machinery: exact two-sample KS (lattice-aware), DKW bands, histogram total
// variation, percentile bootstrap, and small fitting/quantile helpers.

#include <cstdint>
#include <functional>
#include <vector>

namespace fragsim {

double mean(const std::vector<double>& xs);
double variance(const std::vector<double>& xs);  // unbiased

// DKW 99% (by default) one-sample band: sqrt(ln(2/delta) / (2n)).
double dkw_band(std::size_t n, double delta = 0.01);

struct EcdfReport {
  std::size_t n_a = 0, n_b = 0;
  double ks = 0.0;
  double band_a = 0.0, band_b = 0.0;
  double band = 0.0;  // band_a + band_b
  double tolerance = 0.0;
  bool pass = false;
};

// Exact sup-distance between the two ECDFs, step-aligned on the union of
// support points (valid for lattice-valued samples).
EcdfReport ks_two_sample(std::vector<double> a, std::vector<double> b,
                         double tolerance = 1.0);

// One-sample KS against a CDF evaluated by `cdf`.
double ks_vs_cdf(std::vector<double> samples,
                 const std::function<double(double)>& cdf);

// Half the l1 distance between normalized histograms on a shared binning.
double tv_histogram(const std::vector<double>& a, const std::vector<double>& b,
                    int bins, double lo, double hi);

struct Interval {
  double lo = 0.0, hi = 0.0;
};

// Percentile bootstrap; deterministic under a fixed seed. n_boot >= 200.
Interval bootstrap_ci(
    const std::vector<double>& xs,
    const std::function<double(const std::vector<double>&)>& statistic,
    int n_boot, double level, std::uint64_t seed);

struct LineFit {
  double slope = 0.0, intercept = 0.0, slope_se = 0.0;
};

LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys);

// Survival function of the chi-square distribution (regularized upper
// incomplete gamma Q(k/2, x/2)).
double chi2_sf(double x, int dof);

// Two-sample chi-square homogeneity p-value over shared cells.
double chi2_homogeneity_p(const std::vector<double>& counts_a,
                          const std::vector<double>& counts_b);

double normal_quantile(double p);

// Empirical p-quantile (sorted copy, nearest-rank interpolation).
double quantile(std::vector<double> xs, double p);

}  // namespace fragsim
