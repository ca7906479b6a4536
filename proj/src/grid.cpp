#include "fragsim/grid.hpp"

#include <algorithm>
#include <cmath>

#include "fragsim/errors.hpp"

namespace fragsim {

double GridFunction::at(double xq) const {
  if (xq < 0.0 || xq > x_max) return 0.0;
  const double t = xq / h();
  int j = (int)t;
  if (j >= n_points) return values[n_points];
  const double f = t - j;
  return values[j] * (1.0 - f) + values[j + 1] * f;
}

double GridFunction::at_clamped(double xq) const {
  if (xq <= 0.0) return values[0];
  if (xq >= x_max) return values[n_points];
  return at(xq);
}

double trapz(const GridFunction& f) {
  double s = 0.5 * (f.values.front() + f.values.back());
  for (int j = 1; j < f.n_points; ++j) s += f.values[j];
  return s * f.h();
}

GridFunction cumtrapz(const GridFunction& f) {
  GridFunction F({f.x_max, f.n_points});
  double acc = 0.0;
  F.values[0] = 0.0;
  for (int j = 1; j <= f.n_points; ++j) {
    acc += 0.5 * (f.values[j - 1] + f.values[j]) * f.h();
    F.values[j] = acc;
  }
  return F;
}

void normalize_density(GridFunction& f) {
  const double z = trapz(f);
  if (!(z > 0.0)) throw iteration_diverged_error("normalize: zero mass");
  for (double& v : f.values) v /= z;
}

double inverse_cdf(const GridFunction& F, double u) {
  const double target = u * F.values.back();
  // binary search for first node with F >= target
  int lo = 0, hi = F.n_points;
  while (lo < hi) {
    const int mid = (lo + hi) / 2;
    if (F.values[mid] < target)
      lo = mid + 1;
    else
      hi = mid;
  }
  if (lo == 0) return 0.0;
  const double f0 = F.values[lo - 1], f1 = F.values[lo];
  const double frac = f1 > f0 ? (target - f0) / (f1 - f0) : 0.0;
  return F.x(lo - 1) + frac * F.h();
}

GridSampler::GridSampler(const GridFunction& density)
    : cdf(cumtrapz(density)) {
  total = cdf.values.back();
  if (!(total > 0.0)) throw config_error("GridSampler: zero-mass density");
}

}  // namespace fragsim
