#pragma once

// Geometric (lattice) fragmentations: exact k-ary recursive sampler driven by
// the recursive distributional equation, stochastic monotonicity of the
// driving chain, and subsequence limits indexed by the lattice offset.

#include <cstdint>
#include <vector>

#include "fragsim/grid.hpp"
#include "fragsim/spine_chain.hpp"
#include "fragsim/stats.hpp"

namespace fragsim {

struct KaryConfig {
  int k = 2;
  double alpha = -1.0;
  double dust_threshold = 1e-12;  // depth cutoff ceil(log(1/dust)/log k)
  std::uint64_t seed = 0;

  int depth_cutoff() const;
  void validate() const;
};

struct KaryRun {
  double zeta = 0.0;
  std::vector<double> T;  // spine split times T_1..T_n (depth of spine = n)
};

KaryRun kary_extinction(const KaryConfig& config, std::uint64_t replica,
                        double prune_horizon = 120.0);

// Z_n = k^{-n alpha} (zeta - T_n)
double kary_z(const KaryConfig& config, const KaryRun& run, int n);

// Lattice exponent e with k^{(x+n)} F_*(zeta - k^{alpha (x+n)}) = k^e.
double kary_subseq_exponent(const KaryConfig& config, const KaryRun& run,
                            double x, int n);

struct MonotonicityReport {
  int n_levels = 0;
  long n_mc = 0;
  double f1_vs_f0k_gap = 0.0;  // sup_t |F1(t) - F0(t)^k|
  bool f1_eq_f0k = false;
  double worst_order_gap = 0.0;  // max_t max_n (F_{n+1}(t) - F_n(t))
  bool ordered = false;
  double band = 0.0;
  double zinf_vs_zeta_gap = 0.0;  // max_t (F_top(t) - F_0(t))
  bool zinf_dominates = false;
};

MonotonicityReport stochastic_monotonicity_check(const KaryConfig& config,
                                                 int n_levels, long n_mc);

struct SubseqOffsetReport {
  double x = 0.0;
  double stabilization_ks = 0.0;  // KS between consecutive depths (split halves)
  bool stabilized = false;
  bool lattice_ok = true;
  std::vector<double> limit_values;  // stabilized sample at the top depth
};

struct SubseqReport {
  std::vector<SubseqOffsetReport> offsets;
  double cross_ks = 0.0;  // KS between the first two stabilized offsets
  Interval cross_ks_ci;
  bool cross_distinct = false;  // CI excludes 0 and ks >= 0.1
  bool inconclusive = false;
};

SubseqReport subsequence_limits(const KaryConfig& config,
                                const std::vector<double>& x_offsets, int n_lo,
                                int n_hi, long n_mc);

// Oracle for the subsequence limit: k^{x - N(x)} with
// N(x) = sup{ n : Z_n^stat >= k^{(x-n) alpha} } sampled from a stationary
// window of the k-ary driving chain.
std::vector<double> kary_nx_oracle(const KaryConfig& config,
                                   const TransitionKernel& kernel,
                                   const GridSampler& pi_stat, double x,
                                   long n, std::uint64_t seed);

}  // namespace fragsim
