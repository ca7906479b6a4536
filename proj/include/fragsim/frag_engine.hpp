#pragma once

// Exact event-driven simulation of the fragmentation process: extinction time,
// genealogy, the last-fragment spine, states near extinction, and
// rejection-based conditioning on early extinction.
//
// Simulation is depth-first over subtrees (each subtree is an independent
// fragmentation given its root mass). Per-block counter-based random streams
// make a tree a pure function of (seed, replica), so a tree can be re-walked
// for state queries without storing it, and subtrees whose extinction cannot
// (up to a tail event of the unit extinction law beyond `prune_horizon`)
// influence the result can be skipped without changing anything downstream.

#include <cstdint>
#include <limits>
#include <vector>

#include "fragsim/dislocation.hpp"
#include "fragsim/mass_partition.hpp"

namespace fragsim {

struct FragmentationConfig {
  double alpha = -1.0;
  DislocationLaw law = DislocationLaw::binary_uniform();
  double dust_threshold = 1e-6;
  std::uint64_t seed = 0;
  std::uint64_t max_blocks = 10'000'000;
  double initial_mass = 1.0;

  void validate() const;
};

struct SpineStep {
  int n = 0;
  double T = 0.0;      // split time of the last-fragment process
  double Z = 0.0;      // rescaled residual extinction time F_*(T_n)^a (zeta-T_n)
  double Y = 1.0;      // ((zeta-T_n)/(zeta-T_{n-1}))^{1/a}, > 1 for n >= 1
  double Theta = 1.0;  // spine mass ratio at the split
  MassPartition Delta; // relative masses split off, non-increasing
  bool truncation_flag = false;  // spine mass below sqrt(dust_threshold)
};

struct SummaryOptions {
  bool want_spine = true;
  // kappa: a subtree of mass m born at b is skipped when b + m^{-alpha}*kappa
  // cannot reach the running maximum / any state query. 0 disables.
  double prune_horizon = 120.0;
  // Abort (exact rejection) as soon as the running extinction exceeds this.
  double reject_above = std::numeric_limits<double>::infinity();
  // State queries at absolute times (sorted ascending) ...
  std::vector<double> absolute_times;
  // ... and at times zeta - offset (offsets sorted ascending).
  std::vector<double> end_offsets;
  bool left_limits = true;  // side used for the state queries above
  // 0.999-quantile of the unit extinction time, for the truncation-error
  // report; callers with a solved density pass the solved quantile.
  double q_hat = 12.0;
};

struct RunSummary {
  double zeta = 0.0;
  bool rejected = false;
  std::uint64_t blocks = 0;       // split blocks visited
  std::uint64_t dust_blocks = 0;  // dust blocks seen (exact when not pruning)
  std::uint64_t conservation_violations = 0;
  double zeta_error_bound = 0.0;
  std::vector<SpineStep> spine;
  std::vector<MassPartition> states_abs;  // one per absolute_times entry
  std::vector<MassPartition> states_end;  // one per end_offsets entry
};

RunSummary simulate_summary(const FragmentationConfig& config,
                            std::uint64_t replica,
                            const SummaryOptions& opt = {});

// ---- stored-genealogy interface ----

struct BlockRecord {
  std::uint64_t rng_id = 0;
  std::int32_t parent = -1;
  double mass = 0.0;
  double birth = 0.0;
  double split_or_dust = 0.0;  // split time; equals birth for dust blocks
  std::int32_t first_child = -1;
  std::int32_t n_children = 0;
  double subtree_ext = 0.0;
  bool dust = false;
};

struct SimulationRecord {
  FragmentationConfig config;
  std::vector<BlockRecord> blocks;  // root first
  double zeta = 0.0;
  double zeta_error_bound = 0.0;
  std::vector<std::int32_t> spine_ids;  // indices into blocks, root first
};

// Full genealogy; no pruning. Memory scales like 1/dust_threshold.
SimulationRecord simulate(const FragmentationConfig& config,
                          std::uint64_t replica, double q_hat = 12.0);

enum class StateSide { Value, LeftLimit };

MassPartition state_at(const SimulationRecord& record, double t,
                       StateSide side = StateSide::Value);

std::vector<SpineStep> spine(const SimulationRecord& record);

struct ConditionedRun {
  RunSummary summary;
  long attempts = 0;
  double acceptance_estimate = 0.0;
};

// Rejection sampling of a run conditioned on zeta < x. State queries in `opt`
// are evaluated on the accepted run.
ConditionedRun simulate_conditioned_summary(const FragmentationConfig& config,
                                            double x, std::uint64_t replica,
                                            long max_attempts,
                                            SummaryOptions opt = {});

SimulationRecord simulate_conditioned(const FragmentationConfig& config,
                                      double x, std::uint64_t replica,
                                      long max_attempts, long* attempts_out = nullptr);

// Forward evolution of a state by u time units: each block fragments
// independently with the scaling of the strong fragmentation property.
MassPartition evolve_state(const MassPartition& state, double u,
                           const FragmentationConfig& config,
                           std::uint64_t salt);

}  // namespace fragsim
