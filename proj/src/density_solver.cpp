#include "fragsim/density_solver.hpp"

#include <algorithm>
#include <cmath>

#include "fragsim/errors.hpp"
#include "fragsim/stats.hpp"

namespace fragsim {

namespace {

// Per-atom precomputation: a_i = s_i^alpha (> 1), b_i = s_i^{-alpha} (<= 1),
// c_{ij} = (s_j/s_i)^alpha.
struct AtomTables {
  std::vector<double> w;                   // atom weight
  std::vector<std::vector<double>> a, b;   // per atom, per index
  std::vector<std::vector<double>> c;      // per atom, flattened k*k
  std::vector<int> nfrag;
  const std::vector<LawAtom>* atoms = nullptr;

  explicit AtomTables(const std::vector<LawAtom>& atoms_in, double alpha)
      : atoms(&atoms_in) {
    for (const auto& atom : atoms_in) {
      const int n = (int)atom.masses.size();
      std::vector<double> ai(n), bi(n), cij(n * n);
      for (int i = 0; i < n; ++i) {
        ai[i] = std::pow(atom.masses[i], alpha);
        bi[i] = std::pow(atom.masses[i], -alpha);
        for (int j = 0; j < n; ++j)
          cij[i * n + j] = std::pow(atom.masses[j] / atom.masses[i], alpha);
      }
      w.push_back(atom.weight);
      a.push_back(std::move(ai));
      b.push_back(std::move(bi));
      c.push_back(std::move(cij));
      nfrag.push_back(n);
    }
  }
};

// f_xi[f](y) = ∫ Σ_i f(s_i^a y) s_i^a Π_{j≠i} F(s_j^a y) ν(ds)
GridFunction apply_xi_map(const GridFunction& f, const GridFunction& F,
                          const AtomTables& t) {
  GridFunction fxi({f.x_max, f.n_points});
  for (int j = 0; j <= f.n_points; ++j) {
    const double y = f.x(j);
    double acc = 0.0;
    for (std::size_t l = 0; l < t.w.size(); ++l) {
      const int n = t.nfrag[l];
      double sum = 0.0;
      for (int i = 0; i < n; ++i) {
        const double ay = t.a[l][i] * y;
        if (ay > f.x_max) continue;  // density vanishes beyond the grid
        double term = f.at(ay) * t.a[l][i];
        if (term == 0.0) continue;
        for (int k = 0; k < n; ++k) {
          if (k == i) continue;
          term *= F.at_clamped(t.a[l][k] * y);
          if (term == 0.0) break;
        }
        sum += term;
      }
      acc += t.w[l] * sum;
    }
    fxi.values[j] = acc;
  }
  return fxi;
}

// f_new(x) = e^{-x} ∫_0^x e^y f_xi(y) dy
GridFunction apply_smoothing(const GridFunction& fxi) {
  GridFunction out({fxi.x_max, fxi.n_points});
  const double h = fxi.h();
  double acc = 0.0;
  out.values[0] = 0.0;
  for (int j = 1; j <= fxi.n_points; ++j) {
    const double y0 = fxi.x(j - 1), y1 = fxi.x(j);
    acc += 0.5 * h * (std::exp(y0) * fxi.values[j - 1] +
                      std::exp(y1) * fxi.values[j]);
    out.values[j] = std::exp(-y1) * acc;
  }
  return out;
}

}  // namespace

DensityResult solve_extinction_density(const DislocationLaw& law, double alpha,
                                       const SolverOptions& opt) {
  if (!(alpha < 0.0)) throw config_error("solver: alpha must be < 0");
  if (!(opt.tol > 0.0)) throw config_error("solver: tol must be > 0");
  DensityResult res;
  res.alpha = alpha;
  res.atoms = law.frozen_atoms(opt.n_quad, opt.quad_seed);
  AtomTables tables(res.atoms, alpha);

  GridFunction f(opt.grid);
  for (int j = 0; j <= f.n_points; ++j) {
    const double x = f.x(j);
    f.values[j] = x * std::exp(-x);
  }
  normalize_density(f);

  double escaped = 0.0;
  for (int it = 0; it < opt.max_iter; ++it) {
    GridFunction F = cumtrapz(f);
    GridFunction fnew = apply_smoothing(apply_xi_map(f, F, tables));
    escaped = 1.0 - trapz(fnew);
    normalize_density(fnew);
    double resid = 0.0;
    for (int j = 0; j <= f.n_points; ++j)
      resid = std::max(resid, std::abs(fnew.values[j] - f.values[j]));
    for (int j = 0; j <= f.n_points; ++j)
      f.values[j] = (1.0 - opt.damping) * f.values[j] +
                    opt.damping * fnew.values[j];
    res.residual_history.push_back(resid);
    res.iterations = it + 1;
    res.residual = resid;
    if (resid <= opt.tol) break;
  }
  if (res.residual > opt.tol)
    throw iteration_diverged_error("extinction density: no convergence after " +
                                       std::to_string(opt.max_iter) + " sweeps",
                                   res.residual_history);
  if (escaped > 1e-3)
    throw grid_too_small_error(
        "extinction density: mass beyond x_max = " + std::to_string(escaped) +
        " > 1e-3; increase grid x_max");
  res.escaped_mass = escaped;
  res.f = f;
  res.F = cumtrapz(f);
  return res;
}

double transition_density(double x, double y, const DensityResult& d) {
  if (!(x > 0.0) || !(y > 0.0))
    throw config_error("transition_density: x, y must be > 0");
  const double fx = d.f.at(x);
  if (fx < 1e-12)
    throw unsupported_point_error(
        "transition_density: f_zeta vanishes at x at grid resolution");
  const double fy = d.f.at(y);
  if (fy == 0.0) return 0.0;
  double acc = 0.0;
  for (const auto& atom : d.atoms) {
    const int n = (int)atom.masses.size();
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      const double si = atom.masses[i];
      const double ai = std::pow(si, d.alpha);
      if (!(y < ai * x)) continue;
      double term = std::exp(std::pow(si, -d.alpha) * y);
      for (int k = 0; k < n; ++k) {
        if (k == i) continue;
        term *= d.F.at_clamped(std::pow(atom.masses[k] / si, d.alpha) * y);
        if (term == 0.0) break;
      }
      sum += term;
    }
    acc += atom.weight * sum;
  }
  return std::exp(-x) / fx * fy * acc;
}

namespace {

// Guarded ratio pi/f: nodes with f below the floor reuse the nearest valid
// node's ratio. Returns the number of guarded nodes.
int guarded_ratio(const GridFunction& pi, const GridFunction& f,
                  std::vector<double>& ratio) {
  const int n = f.n_points;
  ratio.assign(n + 1, 0.0);
  std::vector<char> valid(n + 1, 0);
  int flagged = 0;
  for (int j = 0; j <= n; ++j) {
    if (f.values[j] >= 1e-12) {
      ratio[j] = pi.values[j] / f.values[j];
      valid[j] = 1;
    }
  }
  int last = -1;
  for (int j = 0; j <= n; ++j) {
    if (valid[j]) {
      last = j;
      continue;
    }
    ++flagged;
    if (last >= 0)
      ratio[j] = ratio[last];
    else {
      int next = j + 1;
      while (next <= n && !valid[next]) ++next;
      ratio[j] = next <= n ? ratio[next] : 0.0;
    }
  }
  return flagged;
}

}  // namespace

GridFunction stationary_map(const DensityResult& d, const GridFunction& pi) {
  AtomTables tables(d.atoms, d.alpha);
  const int n = pi.n_points;
  std::vector<double> ratio;
  guarded_ratio(pi, d.f, ratio);
  // suffix integral S(x) = ∫_x^{x_max} e^{-y} pi(y)/f(y) dy
  GridFunction suffix({pi.x_max, n});
  double acc = 0.0;
  suffix.values[n] = 0.0;
  for (int j = n; j >= 1; --j) {
    const double g1 = std::exp(-pi.x(j)) * ratio[j];
    const double g0 = std::exp(-pi.x(j - 1)) * ratio[j - 1];
    acc += 0.5 * pi.h() * (g0 + g1);
    suffix.values[j - 1] = acc;
  }
  GridFunction out({pi.x_max, n});
  for (int j = 0; j <= n; ++j) {
    const double x = pi.x(j);
    if (d.f.values[j] == 0.0) {
      out.values[j] = 0.0;
      continue;
    }
    double total = 0.0;
    for (std::size_t l = 0; l < tables.w.size(); ++l) {
      const int nf = tables.nfrag[l];
      double sum = 0.0;
      for (int i = 0; i < nf; ++i) {
        double term = std::exp(tables.b[l][i] * x);
        for (int k = 0; k < nf && term != 0.0; ++k) {
          if (k == i) continue;
          term *= d.F.at_clamped(tables.c[l][i * nf + k] * x);
        }
        if (term == 0.0) continue;
        term *= suffix.at_clamped(tables.b[l][i] * x);
        sum += term;
      }
      total += tables.w[l] * sum;
    }
    out.values[j] = d.f.values[j] * total;
  }
  return out;
}

StationaryResult solve_stationary(const DensityResult& d, double tol,
                                  int max_iter, double damping) {
  StationaryResult res;
  GridFunction pi = d.f;  // initial guess: the density of zeta itself
  for (int it = 0; it < max_iter; ++it) {
    GridFunction next = stationary_map(d, pi);
    normalize_density(next);
    double resid = 0.0;
    for (int j = 0; j <= pi.n_points; ++j)
      resid = std::max(resid, std::abs(next.values[j] - pi.values[j]));
    for (int j = 0; j <= pi.n_points; ++j)
      pi.values[j] =
          (1.0 - damping) * pi.values[j] + damping * next.values[j];
    res.residual_history.push_back(resid);
    res.iterations = it + 1;
    res.residual = resid;
    if (resid <= tol) break;
  }
  if (res.residual > tol)
    throw iteration_diverged_error("stationary density: no convergence after " +
                                       std::to_string(max_iter) + " sweeps",
                                   res.residual_history);
  std::vector<double> ratio;
  res.guarded_nodes = guarded_ratio(pi, d.f, ratio);
  res.pi = pi;
  return res;
}

DensityDiagnostics density_diagnostics(const DensityResult& d,
                                       const DislocationLaw& law) {
  DensityDiagnostics diag;
  diag.max_density = *std::max_element(d.f.values.begin(), d.f.values.end());
  diag.max_ok = diag.max_density <= 1.0 + 1e-9;

  // exponential tail rate on the top decade of the distribution
  const double total = d.F.values.back();
  std::vector<double> xs, ys;
  for (int j = 0; j <= d.f.n_points; ++j) {
    const double q = d.F.values[j] / total;
    if (q >= 0.90 && q <= 0.999 && d.f.values[j] > 0.0) {
      xs.push_back(d.f.x(j));
      ys.push_back(std::log(d.f.values[j]));
    }
  }
  if (xs.size() >= 3) {
    diag.tail_rate = -fit_line(xs, ys).slope;
    diag.tail_ok = diag.tail_rate > 0.0;
  }

  // small-x power of F against 1 - beta/alpha for the largest verified beta
  double beta = 0.0;
  for (double b : {0.5, 1.0, 1.5, 2.0, 3.0}) {
    auto est = law.integral_s1_power(b, 20000, 99);
    if (!est.divergence_suspected && std::isfinite(est.value)) beta = b;
  }
  diag.beta_used = beta;
  diag.smallx_required = 1.0 - beta / d.alpha;
  xs.clear();
  ys.clear();
  for (int j = 1; j <= d.f.n_points; ++j) {
    const double q = d.F.values[j] / total;
    if (q >= 1e-10 && q <= 1e-3) {
      xs.push_back(std::log(d.F.x(j)));
      ys.push_back(std::log(d.F.values[j] / total));
    }
  }
  if (xs.size() >= 3) {
    diag.smallx_exponent = fit_line(xs, ys).slope;
    diag.smallx_ok = diag.smallx_exponent >= diag.smallx_required - 0.3;
  }

  diag.min_positive = 1e300;
  for (int j = 1; j <= d.f.n_points; ++j)
    diag.min_positive = std::min(diag.min_positive, d.f.values[j]);
  diag.positive = diag.min_positive > 0.0;
  return diag;
}

}  // namespace fragsim
