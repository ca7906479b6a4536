#pragma once

// The acceptance suite: every criterion runs at its stated tolerance against
// the desk configuration and prints one pass/fail line.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace fragsim {

struct AcceptProfile {
  std::string name = "desk";
  std::string law = "binary-uniform";
  double alpha = -1.0;
  double dust = 1e-6;
  std::uint64_t seed = 20240801;
  double x_max = 16.0;
  int n_points = 2736;
  double tol = 1e-9;
  int n_quad = 512;
  int threads = 1;

  // replica counts per criterion
  long n_structure = 100000;    // C1
  long n_density = 1000000;     // C2
  long n_two_route = 100000;    // C3
  long n_ergodic = 100000;      // C4
  long n_mu = 100000;           // C5
  long n_renewal = 100000;      // C6
  long n_lastfrag = 100000;     // C7
  long n_full_limit = 20000;    // C8
  long n_self_similar = 50000;  // C9
  long n_invariance = 4000;     // C10
  long n_geometric = 100000;    // C11

  static AcceptProfile desk();
  static AcceptProfile quick();  // scaled-down development profile
};

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  double seconds = 0.0;
  double budget_seconds = 0.0;
  std::string detail;
};

// Runs all criteria, streaming one line per criterion to `log`; returns the
// results. Never throws on a failed criterion (failures are reported).
std::vector<CriterionResult> run_acceptance(const AcceptProfile& profile,
                                            std::ostream& log);

bool all_passed(const std::vector<CriterionResult>& results);

}  // namespace fragsim
