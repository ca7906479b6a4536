#pragma once

// Tabulated non-negative functions on a uniform grid [0, x_max], used for the
// extinction-time density, its CDF, the stationary density and kernel tables.

#include <cstdint>
#include <vector>

#include "fragsim/rng.hpp"

namespace fragsim {

struct GridSpec {
  double x_max = 16.0;
  int n_points = 2736;
};

struct GridFunction {
  double x_max = 0.0;
  int n_points = 0;
  std::vector<double> values;  // nodes x_j = j*h, j = 0..n_points

  GridFunction() = default;
  GridFunction(GridSpec spec, double fill = 0.0)
      : x_max(spec.x_max),
        n_points(spec.n_points),
        values(spec.n_points + 1, fill) {}

  double h() const { return x_max / n_points; }
  double x(int j) const { return j * h(); }
  int size() const { return n_points + 1; }

  // Linear interpolation; density convention: 0 outside [0, x_max].
  double at(double x) const;
  // CDF convention: 0 below 0, value at x_max beyond.
  double at_clamped(double x) const;
};

double trapz(const GridFunction& f);
GridFunction cumtrapz(const GridFunction& f);
void normalize_density(GridFunction& f);  // scale so trapz == 1

// Inverse of a non-decreasing grid function (e.g. a CDF) at level u*F(x_max);
// linear within bins.
double inverse_cdf(const GridFunction& F, double u);

struct GridSampler {
  explicit GridSampler(const GridFunction& density);
  double sample(Stream& rng) const { return inverse_cdf(cdf, rng.next_unit()); }
  double cdf_at(double x) const { return cdf.at_clamped(x) / total; }
  GridFunction cdf;
  double total = 1.0;
};

}  // namespace fragsim
