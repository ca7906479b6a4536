#pragma once

// Dislocation measures on the unit simplex: built-in families, sampling,
// integrability estimates and geometric-ratio metadata. Laws are immutable
// descriptors; samplers take the caller's random stream.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fragsim/mass_partition.hpp"
#include "fragsim/rng.hpp"

namespace fragsim {

inline constexpr int kMaxFragments = 64;

enum class LawKind {
  BinaryUniform,
  BinaryFixed,
  KaryEqual,
  DirichletSorted,
  FiniteSupport,
};

struct LawAtom {
  double weight = 1.0;
  MassPartition masses;
};

enum class GeometricStatus { Geometric, NonGeometric, Unknown };

struct GeometricReport {
  GeometricStatus status = GeometricStatus::Unknown;
  double ratio = 0.0;  // valid when status == Geometric
};

struct IntegralEstimate {
  double value = 0.0;
  double lo = 0.0, hi = 0.0;  // bootstrap CI (equals value when exact)
  bool exact = false;
  bool divergence_suspected = false;
};

class DislocationLaw {
 public:
  static DislocationLaw binary_uniform();
  static DislocationLaw binary_fixed(double a);
  static DislocationLaw kary_equal(int k);
  static DislocationLaw dirichlet_sorted(int k, double theta);
  static DislocationLaw finite_support(std::vector<LawAtom> table);

  // "binary-uniform" | "binary-fixed:0.7" | "kary:3" | "dirichlet:4:1.0" |
  // "table:p:(m,m,...);p:(m,...)"
  static DislocationLaw parse(const std::string& spec);

  LawKind kind() const { return kind_; }
  std::string spec_string() const;

  // True when the law is a single atom (the ν-integral is exact).
  bool deterministic() const;
  int max_fragments() const;

  MassPartition sample(Stream& rng) const;
  // Writes relative masses in non-increasing order into out[0..n); allocation
  // free (hot path). Returns n.
  int sample_into(Stream& rng, double* out) const;

  // Quadrature atoms for the ν-integrals: exact atoms for finite-support laws,
  // n_quad frozen Monte Carlo samples (weight 1/n_quad) otherwise.
  std::vector<LawAtom> frozen_atoms(int n_quad, std::uint64_t seed) const;

  GeometricReport is_geometric() const;

  // Estimate of ∫ s1^{-q} ν(ds); exact for laws with finite support.
  IntegralEstimate integral_s1_power(double q, long n_mc,
                                     std::uint64_t seed) const;

  double binary_fixed_a() const { return a_; }
  int kary_k() const { return k_; }

 private:
  DislocationLaw() = default;
  LawKind kind_ = LawKind::BinaryUniform;
  double a_ = 0.5;      // binary-fixed
  int k_ = 2;           // kary / dirichlet
  double theta_ = 1.0;  // dirichlet
  std::vector<LawAtom> table_;
  std::vector<double> cum_weights_;
  bool conservative_ = true;
};

}  // namespace fragsim
