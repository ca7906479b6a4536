#pragma once

// Deterministic grid solvers for the extinction-time density and CDF, the
// one-step transition density of the driving chain, and the stationary
// density. Both solvers are damped fixed-point iterations of smoothing
// integral maps with renormalization after every sweep; the ν-integrals use a
// frozen set of quadrature atoms so the iterated map is deterministic.

#include <cstdint>
#include <vector>

#include "fragsim/dislocation.hpp"
#include "fragsim/grid.hpp"

namespace fragsim {

struct SolverOptions {
  GridSpec grid;
  double tol = 1e-9;
  int max_iter = 600;
  int n_quad = 512;
  double damping = 0.7;
  std::uint64_t quad_seed = 777;
};

struct DensityResult {
  GridFunction f;  // density, unit mass on the grid
  GridFunction F;  // cumulative
  int iterations = 0;
  double residual = 0.0;
  double escaped_mass = 0.0;  // mass the raw map pushed beyond x_max
  double alpha = -1.0;
  std::vector<LawAtom> atoms;  // frozen quadrature actually used
  std::vector<double> residual_history;
};

DensityResult solve_extinction_density(const DislocationLaw& law, double alpha,
                                       const SolverOptions& opt = {});

// Pointwise transition density P(x, dy)/dy of the driving chain.
double transition_density(double x, double y, const DensityResult& d);

struct StationaryResult {
  GridFunction pi;
  int iterations = 0;
  double residual = 0.0;
  int guarded_nodes = 0;  // nodes where the f-division guard fired
  std::vector<double> residual_history;
};

StationaryResult solve_stationary(const DensityResult& d,
                                  double tol = 1e-9, int max_iter = 600,
                                  double damping = 0.7);

// One application of the stationary map (kernel pushforward of pi).
GridFunction stationary_map(const DensityResult& d, const GridFunction& pi);

struct DensityDiagnostics {
  double max_density = 0.0;      // must be <= 1
  double tail_rate = 0.0;        // fitted exponential rate, must be > 0
  double smallx_exponent = 0.0;  // fitted power of F at small x
  double smallx_required = 0.0;  // 1 - beta/alpha for the largest verified beta
  double beta_used = 0.0;
  double min_positive = 0.0;     // min of f over (0, x_max]
  bool max_ok = false, tail_ok = false, smallx_ok = false, positive = false;
};

DensityDiagnostics density_diagnostics(const DensityResult& d,
                                       const DislocationLaw& law);

}  // namespace fragsim
