#pragma once

// Markov-renewal functionals, the biased ladder R(k), and samplers for the
// spine scaling limit and the full limit state, plus rescaled pre-limit
// evaluation of simulated runs.

#include <cstdint>
#include <vector>

#include "fragsim/density_solver.hpp"
#include "fragsim/frag_engine.hpp"
#include "fragsim/spine_chain.hpp"

namespace fragsim {

struct RenewalFunctionals {
  long J = 0;
  double S_J = 0.0;
  double Z_J = 0.0;
  double overshoot = 0.0;
};

// J(r) = sup{n >= 0 : S_n <= r} with S_n the partial sums of log Y over the
// chain; throws chain_too_short_error when the chain never passes r.
RenewalFunctionals renewal_functionals(const std::vector<SpineStep>& chain,
                                       double r);

struct BiasedLadder {
  int k_min = 0, k_max = 0;     // inclusive index range of Z
  std::vector<double> Z;        // Z[k - k_min]
  std::vector<double> Y;        // transition k-1 -> k stored at [k - k_min - 1]
  std::vector<double> Theta;
  std::vector<MassPartition> Delta;
  std::vector<double> Rv;       // R(k), k = k_min..k_max
  double U = 0.5;
  double ess = 0.0;             // effective sample size of the SIR weights
  bool weight_degenerate = false;
  double alpha = -1.0;

  double Zat(int k) const { return Z[k - k_min]; }
  double Yat(int k) const { return Y[k - k_min - 1]; }
  double Thetaat(int k) const { return Theta[k - k_min - 1]; }
  const MassPartition& Deltaat(int k) const { return Delta[k - k_min - 1]; }
  double R(int k) const { return Rv[k - k_min]; }
  // k with R(k+1) <= t < R(k); throws window_exceeded_error outside
  // [R(k_max), R(k_min)).
  int segment_for(double t) const;
};

class LadderBuilder {
 public:
  LadderBuilder(const TransitionKernel& kernel, const GridSampler& pi_stat,
                int n_candidates = 32);

  // SIR over (Z0, Y1) pair candidates with weight log Y1, then window
  // extension forward by the kernel and backward by the reversed kernel.
  BiasedLadder build(int k_min, int k_max, Stream& rng) const;

  // Just the biased pair (Z0^bias, Y1^bias) and its SIR effective sample size.
  struct Pair {
    double z0 = 0.0, y1 = 1.0;
    double ess = 0.0;
  };
  Pair biased_pair(Stream& rng) const;

 private:
  const TransitionKernel* kernel_;
  const GridSampler* pi_;
  int n_candidates_;
};

// C_{*,infinity}(t) evaluated on a ladder.
double last_fragment_limit_at(const BiasedLadder& ladder, double t);

struct TruncationBudget {
  long blocks_total = 0;
  long blocks_skipped = 0;    // visibility pre-screen
  long blocks_capped = 0;     // rejection cap exhausted, contributed 0
  double skipped_visibility = 0.0;  // accumulated visibility of skipped blocks
  long rejection_attempts = 0;
  int window_lo = 0, window_hi = 0;
};

struct LimitStateSample {
  std::vector<double> query_times;
  std::vector<MassPartition> states;
  std::vector<double> spine_values;
  TruncationBudget budget;
};

struct LimitSampleOptions {
  long rejection_cap = 20000;
  double visibility_eps = 1e-4;  // skip blocks invisible at all query times
  double block_dust = 1e-5;      // relative dust of the conditioned blocks
};

LimitStateSample full_limit_sample(const BiasedLadder& ladder,
                                   const std::vector<double>& query_times,
                                   const FragmentationConfig& config,
                                   const DensityResult& densities,
                                   std::uint64_t salt,
                                   const LimitSampleOptions& opt = {});

struct PrelimitSample {
  double zeta = 0.0;
  std::vector<double> query_times;
  std::vector<MassPartition> states;  // eps^{1/alpha} F((zeta - eps t)-)
  std::vector<double> spine_values;   // eps^{1/alpha} F_*((zeta - eps t)-)
};

PrelimitSample rescaled_prelimit(const FragmentationConfig& config,
                                 std::uint64_t replica, double eps,
                                 const std::vector<double>& query_times,
                                 double q_hat = 12.0);

// Lattice guard: limit-theorem entry points refuse geometric laws.
void require_non_arithmetic(const DislocationLaw& law);

}  // namespace fragsim
