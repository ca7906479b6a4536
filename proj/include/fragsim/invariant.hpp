#pragma once

// Monte Carlo estimation of the invariant measure (time-integral of the limit
// state's marginals) and a statistical test of invariance under the
// fragmentation semigroup.

#include <cstdint>
#include <string>
#include <vector>

#include "fragsim/frag_engine.hpp"
#include "fragsim/renewal_limit.hpp"
#include "fragsim/stats.hpp"

namespace fragsim {

struct EventPredicate {
  enum class Kind { TopMassIn, TotalMassIn, CountAtLeast };
  Kind kind = Kind::TotalMassIn;
  double lo = 0.0, hi = 1.0;     // interval for the mass functionals
  double threshold = 0.0;        // mass floor for CountAtLeast
  int count = 1;                 // block count for CountAtLeast
  double cap = 1.0;              // restrict to { ||s||_1 <= cap }
  std::string name;

  bool eval(const MassPartition& s) const;
  static std::vector<EventPredicate> desk_family();
  static EventPredicate parse_json(const std::string& text);
};

// Shared sample of limit-state paths on a fixed time grid.
struct LimitPathSet {
  std::vector<double> t_grid;
  std::vector<std::vector<MassPartition>> paths;  // paths[p][q]
  TruncationBudget budget;  // accumulated over paths
};

LimitPathSet sample_limit_paths(int n_paths, const std::vector<double>& t_grid,
                                const LadderBuilder& builder, int k_min,
                                int k_max, const FragmentationConfig& config,
                                const DensityResult& densities,
                                std::uint64_t seed,
                                const LimitSampleOptions& opt = {});

struct LambdaEstimate {
  double value = 0.0;
  Interval ci;
  double tail_fraction = 0.0;  // fitted mass of the integrand beyond t_max
  bool tail_ok = true;
};

// Trapezoid-in-t average of indicator means over the path set; CI by
// path-level bootstrap. Throws when the fitted integrand tail beyond t_max
// exceeds 1% of the estimate.
LambdaEstimate estimate_lambda(const EventPredicate& event,
                               const LimitPathSet& paths, std::uint64_t seed,
                               bool enforce_tail = true);

struct InvarianceRow {
  std::string event;
  double lhs = 0.0, rhs = 0.0;
  double z = 0.0;
};

struct InvarianceReport {
  std::vector<InvarianceRow> rows;
  double z_cutoff = 0.0;  // two-sided family-wise 1% after Bonferroni
  double max_abs_z = 0.0;
  bool pass = false;
  double u = 0.0;
};

// For each event: lhs = time-integral over the sampled paths, rhs = the same
// integral with every sampled state evolved forward u time units. Paired
// per-path differences give the z-scores.
InvarianceReport invariance_test(const std::vector<EventPredicate>& events,
                                 double u, const LimitPathSet& paths,
                                 const FragmentationConfig& evolve_config,
                                 std::uint64_t seed);

}  // namespace fragsim
