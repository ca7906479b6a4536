#pragma once

// Kernel-based sampling of the driving chain and its marks: tabulated
// inverse-CDF sampling of the one-step transition, long-run simulation,
// stationary/backward stepping, and ergodicity diagnostics.

#include <cstdint>
#include <vector>

#include "fragsim/density_solver.hpp"
#include "fragsim/frag_engine.hpp"
#include "fragsim/grid.hpp"
#include "fragsim/stats.hpp"

namespace fragsim {

class TransitionKernel {
 public:
  explicit TransitionKernel(const DensityResult& densities);

  struct Mark {
    double z = 0.0;      // sampled endpoint of the transition
    double y = 1.0;      // ratio Y of the transition
    double theta = 1.0;  // surviving relative mass
    MassPartition delta; // split-off relative masses (when requested)
  };

  // Sample (Z', Theta', Delta') given Z = z; Y' derived.
  Mark step(double z, Stream& rng, bool want_delta = true) const;

  // CDF in y of the one-step kernel from x (prefactors cancel).
  double kernel_cdf(double x, double y) const;

  // Time-reversed step of the stationary chain: given Z_k = z, samples
  // Z_{k-1} together with the mark of the transition k-1 -> k. Requires
  // prepare_reverse().
  void prepare_reverse(const GridFunction& pi_stat);
  Mark step_back(double z, Stream& rng, bool want_delta = true) const;
  bool reverse_ready() const { return !suffix_.values.empty(); }

  double alpha() const { return alpha_; }
  const DensityResult& densities() const { return *dens_; }

 private:
  struct Pair {  // one (atom, surviving-index) combination
    double weight;     // atom weight
    double a;          // s_i^alpha  (>= 1)
    double b;          // s_i^{-alpha} (<= 1)
    std::uint32_t atom;
    std::uint16_t index;
    std::uint16_t nfrag;
    std::vector<double> cum;   // cumulative of e^{b u} f(u) prod F(c u) on grid
    std::vector<double> cfac;  // c_{ij} = (s_j/s_i)^alpha, j = 0..nfrag-1
  };
  Mark finish_mark(const Pair& p, double z_from, double y_to,
                   bool want_delta, bool forward) const;

  const DensityResult* dens_;
  double alpha_;
  double h_;
  int n_;
  std::vector<Pair> pairs_;
  GridFunction suffix_;  // Q(x) = int_x^xmax pi(u) e^{-u} / f(u) du
};

// n_steps kernel transitions from z0; emits steps n = 0..n_steps with the
// accumulated T_n = z0 (1 - prod Y^alpha) and no truncation flags.
std::vector<SpineStep> run_chain(double z0, int n_steps,
                                 const TransitionKernel& kernel, Stream& rng,
                                 bool want_delta = true);

double s_log_sum(const std::vector<SpineStep>& steps, int n);  // S_n

struct MuEstimate {
  double mu = 0.0;
  Interval ci;          // bootstrap CI at the requested level
  double moment2 = 0.0; // E (log Y)^2
  double moment4 = 0.0;
  std::vector<double> samples;
};

// log Y_1 under the stationary chain: Z0 ~ pi_stat, one kernel step each.
MuEstimate estimate_mu(const TransitionKernel& kernel, const GridSampler& pi,
                       long n, std::uint64_t seed, double level = 0.99);

struct ErgodicityReport {
  std::vector<double> starts;
  std::vector<std::vector<double>> ks_by_n;  // [start][n]
  double decay_rate = 1.0;      // r with KS(n) ~ C r^{-n}
  double decay_rate_se = 0.0;
  bool contracts = true;        // KS non-increasing after n = 5 up to noise
  double final_ks_max = 1.0;    // max over starts at the last step
  long n_rep = 0;
};

ErgodicityReport ergodicity_report(const std::vector<double>& starts,
                                   int n_steps, long n_rep,
                                   const TransitionKernel& kernel,
                                   const GridSampler& pi_stat,
                                   std::uint64_t seed);

}  // namespace fragsim
