#include "fragsim/dislocation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "fragsim/errors.hpp"
#include "fragsim/stats.hpp"

namespace fragsim {

DislocationLaw DislocationLaw::binary_uniform() {
  DislocationLaw law;
  law.kind_ = LawKind::BinaryUniform;
  return law;
}

DislocationLaw DislocationLaw::binary_fixed(double a) {
  if (!(a > 0.0 && a < 1.0))
    throw config_error("binary-fixed: a must lie in (0,1)");
  DislocationLaw law;
  law.kind_ = LawKind::BinaryFixed;
  law.a_ = std::max(a, 1.0 - a);
  return law;
}

DislocationLaw DislocationLaw::kary_equal(int k) {
  if (k < 2 || k > kMaxFragments)
    throw config_error("kary: k must lie in [2," +
                       std::to_string(kMaxFragments) + "]");
  DislocationLaw law;
  law.kind_ = LawKind::KaryEqual;
  law.k_ = k;
  return law;
}

DislocationLaw DislocationLaw::dirichlet_sorted(int k, double theta) {
  if (k < 2 || k > kMaxFragments)
    throw config_error("dirichlet: k must lie in [2," +
                       std::to_string(kMaxFragments) + "]");
  if (!(theta > 0.0)) throw config_error("dirichlet: theta must be > 0");
  DislocationLaw law;
  law.kind_ = LawKind::DirichletSorted;
  law.k_ = k;
  law.theta_ = theta;
  return law;
}

DislocationLaw DislocationLaw::finite_support(std::vector<LawAtom> table) {
  if (table.empty()) throw config_error("finite-support: empty table");
  double wsum = 0.0;
  for (auto& atom : table) {
    if (!(atom.weight > 0.0))
      throw config_error("finite-support: atom weights must be > 0");
    wsum += atom.weight;
    atom.masses = rearrange(atom.masses);
    if (atom.masses.empty())
      throw config_error("finite-support: empty atom");
    if ((int)atom.masses.size() > kMaxFragments)
      throw config_error("finite-support: too many fragments per atom");
    const double s = total_mass(atom.masses);
    if (std::abs(s - 1.0) > 1e-12)
      throw config_error("finite-support: atom masses must sum to 1");
    if (atom.masses.size() == 1)
      throw config_error("finite-support: the state (1,0,...) is excluded");
  }
  if (std::abs(wsum - 1.0) > 1e-9)
    throw config_error("finite-support: probabilities must sum to 1");
  DislocationLaw law;
  law.kind_ = LawKind::FiniteSupport;
  law.table_ = std::move(table);
  double c = 0.0;
  for (const auto& atom : law.table_) {
    c += atom.weight / wsum;
    law.cum_weights_.push_back(c);
  }
  law.cum_weights_.back() = 1.0;
  return law;
}

DislocationLaw DislocationLaw::parse(const std::string& spec) {
  auto split = [](const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, sep)) out.push_back(tok);
    return out;
  };
  if (spec == "binary-uniform") return binary_uniform();
  if (spec.rfind("binary-fixed:", 0) == 0)
    return binary_fixed(std::stod(spec.substr(13)));
  if (spec.rfind("kary:", 0) == 0) return kary_equal(std::stoi(spec.substr(5)));
  if (spec.rfind("dirichlet:", 0) == 0) {
    auto parts = split(spec.substr(10), ':');
    if (parts.size() != 2) throw config_error("law: expected dirichlet:k:theta");
    return dirichlet_sorted(std::stoi(parts[0]), std::stod(parts[1]));
  }
  if (spec.rfind("table:", 0) == 0) {
    std::vector<LawAtom> table;
    for (const auto& entry : split(spec.substr(6), ';')) {
      auto open = entry.find('(');
      auto close = entry.find(')');
      if (open == std::string::npos || close == std::string::npos ||
          entry[open - 1] != ':')
        throw config_error("law: expected table:p:(m,m,...);...");
      LawAtom atom;
      atom.weight = std::stod(entry.substr(0, open - 1));
      for (const auto& m : split(entry.substr(open + 1, close - open - 1), ','))
        atom.masses.push_back(std::stod(m));
      table.push_back(std::move(atom));
    }
    return finite_support(std::move(table));
  }
  throw config_error("unknown law spec: " + spec);
}

std::string DislocationLaw::spec_string() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case LawKind::BinaryUniform:
      return "binary-uniform";
    case LawKind::BinaryFixed:
      os << "binary-fixed:" << a_;
      return os.str();
    case LawKind::KaryEqual:
      os << "kary:" << k_;
      return os.str();
    case LawKind::DirichletSorted:
      os << "dirichlet:" << k_ << ":" << theta_;
      return os.str();
    case LawKind::FiniteSupport: {
      os << "table:";
      for (std::size_t a = 0; a < table_.size(); ++a) {
        if (a) os << ";";
        os << table_[a].weight << ":(";
        for (std::size_t i = 0; i < table_[a].masses.size(); ++i) {
          if (i) os << ",";
          os << table_[a].masses[i];
        }
        os << ")";
      }
      return os.str();
    }
  }
  return "?";
}

bool DislocationLaw::deterministic() const {
  switch (kind_) {
    case LawKind::BinaryFixed:
    case LawKind::KaryEqual:
      return true;
    case LawKind::FiniteSupport:
      return table_.size() == 1;
    default:
      return false;
  }
}

int DislocationLaw::max_fragments() const {
  switch (kind_) {
    case LawKind::BinaryUniform:
    case LawKind::BinaryFixed:
      return 2;
    case LawKind::KaryEqual:
    case LawKind::DirichletSorted:
      return k_;
    case LawKind::FiniteSupport: {
      std::size_t n = 0;
      for (const auto& atom : table_) n = std::max(n, atom.masses.size());
      return (int)n;
    }
  }
  return 2;
}

int DislocationLaw::sample_into(Stream& rng, double* out) const {
  switch (kind_) {
    case LawKind::BinaryUniform: {
      const double v = rng.next_unit_open();
      const double hi = v > 0.5 ? v : 1.0 - v;
      out[0] = hi;
      out[1] = 1.0 - hi;  // exact: hi in [1/2,1]
      return 2;
    }
    case LawKind::BinaryFixed:
      out[0] = a_;
      out[1] = 1.0 - a_;
      return 2;
    case LawKind::KaryEqual: {
      const double m = 1.0 / k_;
      for (int i = 0; i < k_; ++i) out[i] = m;
      return k_;
    }
    case LawKind::DirichletSorted: {
      double g[kMaxFragments];
      double s = 0.0;
      for (int i = 0; i < k_; ++i) {
        g[i] = rng.next_gamma(theta_);
        s += g[i];
      }
      for (int i = 0; i < k_; ++i) out[i] = g[i] / s;
      std::sort(out, out + k_, std::greater<double>());
      return k_;
    }
    case LawKind::FiniteSupport: {
      const double u = rng.next_unit();
      std::size_t a = 0;
      while (a + 1 < cum_weights_.size() && u >= cum_weights_[a]) ++a;
      const auto& m = table_[a].masses;
      std::copy(m.begin(), m.end(), out);
      return (int)m.size();
    }
  }
  return 0;
}

MassPartition DislocationLaw::sample(Stream& rng) const {
  double buf[kMaxFragments];
  const int n = sample_into(rng, buf);
  return MassPartition(buf, buf + n);
}

std::vector<LawAtom> DislocationLaw::frozen_atoms(int n_quad,
                                                  std::uint64_t seed) const {
  std::vector<LawAtom> atoms;
  switch (kind_) {
    case LawKind::BinaryFixed:
      atoms.push_back({1.0, {a_, 1.0 - a_}});
      return atoms;
    case LawKind::KaryEqual:
      atoms.push_back({1.0, MassPartition(k_, 1.0 / k_)});
      return atoms;
    case LawKind::FiniteSupport:
      return table_;
    case LawKind::BinaryUniform: {
      if (n_quad < 1) throw config_error("frozen_atoms: n_quad must be >= 1");
      // stratified over the underlying uniform: one randomized point per
      // cell keeps the estimator unbiased while killing the O(n^{-1/2})
      // quadrature noise of iid draws
      Stream rng = Stream::from(seed, 0x66726f7a656eULL);
      atoms.reserve(n_quad);
      const double w = 1.0 / n_quad;
      for (int i = 0; i < n_quad; ++i) {
        const double v = (i + rng.next_unit_open()) / n_quad;
        const double hi = v > 0.5 ? v : 1.0 - v;
        atoms.push_back({w, {hi, 1.0 - hi}});
      }
      return atoms;
    }
    default: {
      if (n_quad < 1) throw config_error("frozen_atoms: n_quad must be >= 1");
      Stream rng = Stream::from(seed, 0x66726f7a656eULL);
      atoms.reserve(n_quad);
      const double w = 1.0 / n_quad;
      for (int i = 0; i < n_quad; ++i) atoms.push_back({w, sample(rng)});
      return atoms;
    }
  }
}

namespace {

// Lattice check: every -log(m) an integer multiple of g, in the dimensionless
// sense |log m / log r - round(log m / log r)| <= tol.
bool fits_lattice(const std::vector<double>& logm, double g, double tol) {
  for (double lm : logm) {
    const double t = lm / g;
    if (std::abs(t - std::round(t)) > tol) return false;
    if (std::round(t) < 1.0) return false;
  }
  return true;
}

GeometricReport search_lattice(const std::vector<double>& masses) {
  std::vector<double> logm;
  for (double m : masses)
    if (m < 1.0) logm.push_back(-std::log(m));
  if (logm.empty()) return {GeometricStatus::NonGeometric, 0.0};
  // Reciprocal-integer ratios first: the canonical answer for lattices like
  // {1/4} is 1/2, not 1/4.
  for (int k = 2; k <= 64; ++k) {
    const double g = std::log((double)k);
    if (fits_lattice(logm, g, 1e-9)) return {GeometricStatus::Geometric, 1.0 / k};
  }
  // General rational search seeded by the largest mass.
  const double g0 = *std::min_element(logm.begin(), logm.end());
  for (int j = 1; j <= 256; ++j) {
    const double g = g0 / j;
    if (fits_lattice(logm, g, 1e-9))
      return {GeometricStatus::Geometric, std::exp(-g)};
  }
  // A near-fit at loose tolerance is ambiguous, not a certificate either way.
  for (int j = 1; j <= 256; ++j) {
    const double g = g0 / j;
    if (fits_lattice(logm, g, 1e-6)) return {GeometricStatus::Unknown, 0.0};
  }
  return {GeometricStatus::NonGeometric, 0.0};
}

}  // namespace

GeometricReport DislocationLaw::is_geometric() const {
  switch (kind_) {
    case LawKind::BinaryUniform:
    case LawKind::DirichletSorted:
      return {GeometricStatus::NonGeometric, 0.0};  // s1 has a density
    case LawKind::KaryEqual:
      return {GeometricStatus::Geometric, 1.0 / k_};
    case LawKind::BinaryFixed:
      return search_lattice({a_, 1.0 - a_});
    case LawKind::FiniteSupport: {
      std::vector<double> masses;
      for (const auto& atom : table_)
        masses.insert(masses.end(), atom.masses.begin(), atom.masses.end());
      return search_lattice(masses);
    }
  }
  return {GeometricStatus::Unknown, 0.0};
}

IntegralEstimate DislocationLaw::integral_s1_power(double q, long n_mc,
                                                   std::uint64_t seed) const {
  if (!(q > 0.0)) throw config_error("integral_s1_power: q must be > 0");
  IntegralEstimate est;
  if (deterministic() || kind_ == LawKind::FiniteSupport) {
    double v = 0.0;
    for (const auto& atom : frozen_atoms(1, 0))
      v += atom.weight * std::pow(atom.masses[0], -q);
    est.value = est.lo = est.hi = v;
    est.exact = true;
    return est;
  }
  if (n_mc < 1) throw config_error("integral_s1_power: n_mc must be >= 1");
  Stream rng = Stream::from(seed, 0x7331ULL);
  std::vector<double> xs;
  xs.reserve(n_mc);
  double buf[kMaxFragments];
  for (long i = 0; i < n_mc; ++i) {
    sample_into(rng, buf);
    xs.push_back(std::pow(buf[0], -q));
  }
  est.value = mean(xs);
  auto ci = bootstrap_ci(
      xs, [](const std::vector<double>& v) { return mean(v); }, 400, 0.99,
      seed ^ 0xb007ULL);
  est.lo = ci.lo;
  est.hi = ci.hi;
  // Instability across a doubling of the sample marks a suspect integral.
  std::vector<double> first_half(xs.begin(), xs.begin() + xs.size() / 2);
  const double m1 = mean(first_half);
  const double se = std::sqrt(variance(xs) / xs.size());
  est.divergence_suspected = std::abs(m1 - est.value) > 6.0 * se + 1e-12;
  return est;
}

}  // namespace fragsim
