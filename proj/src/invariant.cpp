#include "fragsim/invariant.hpp"

#include <algorithm>
#include <cmath>

#include "fragsim/errors.hpp"
#include "json.hpp"

namespace fragsim {

bool EventPredicate::eval(const MassPartition& s) const {
  const double total = total_mass(s);
  if (total > cap) return false;
  switch (kind) {
    case Kind::TopMassIn: {
      const double top = s.empty() ? 0.0 : s.front();
      return top > 0.0 && top >= lo && top <= hi;
    }
    case Kind::TotalMassIn:
      return total > 0.0 && total >= lo && total <= hi;
    case Kind::CountAtLeast: {
      int c = 0;
      for (double m : s)
        if (m > threshold) ++c;
      return c >= count;
    }
  }
  return false;
}

std::vector<EventPredicate> EventPredicate::desk_family() {
  std::vector<EventPredicate> f;
  EventPredicate e;
  e.cap = 1.0;

  e.kind = Kind::TotalMassIn;
  e.lo = 0.2;
  e.hi = 0.6;
  e.name = "total-mass-0.2-0.6";
  f.push_back(e);

  e.lo = 0.05;
  e.hi = 0.2;
  e.name = "total-mass-0.05-0.2";
  f.push_back(e);

  e.kind = Kind::TopMassIn;
  e.lo = 0.1;
  e.hi = 0.3;
  e.name = "top-mass-0.1-0.3";
  f.push_back(e);

  e.lo = 0.3;
  e.hi = 0.8;
  e.name = "top-mass-0.3-0.8";
  f.push_back(e);

  e.kind = Kind::CountAtLeast;
  e.threshold = 0.05;
  e.count = 2;
  e.name = "count-ge2-above-0.05";
  f.push_back(e);

  e.threshold = 0.02;
  e.count = 3;
  e.name = "count-ge3-above-0.02";
  f.push_back(e);
  return f;
}

EventPredicate EventPredicate::parse_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  EventPredicate e;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "top-mass-in")
    e.kind = Kind::TopMassIn;
  else if (kind == "total-mass-in")
    e.kind = Kind::TotalMassIn;
  else if (kind == "count-at-least")
    e.kind = Kind::CountAtLeast;
  else
    throw config_error("event: unknown kind " + kind);
  e.lo = j.value("lo", 0.0);
  e.hi = j.value("hi", 1.0);
  e.threshold = j.value("threshold", 0.0);
  e.count = j.value("count", 1);
  e.cap = j.value("cap", 1.0);
  e.name = j.value("name", kind);
  return e;
}

LimitPathSet sample_limit_paths(int n_paths, const std::vector<double>& t_grid,
                                const LadderBuilder& builder, int k_min,
                                int k_max, const FragmentationConfig& config,
                                const DensityResult& densities,
                                std::uint64_t seed,
                                const LimitSampleOptions& opt) {
  if (n_paths < 1) throw config_error("sample_limit_paths: n_paths >= 1");
  LimitPathSet out;
  out.t_grid = t_grid;
  std::sort(out.t_grid.begin(), out.t_grid.end());
  out.paths.resize(n_paths);
  for (int p = 0; p < n_paths; ++p) {
    Stream rng = Stream::from(seed, mix64(0x70617468ULL ^ std::uint64_t(p)));
    const BiasedLadder lad = builder.build(k_min, k_max, rng);
    const auto sample = full_limit_sample(lad, out.t_grid, config, densities,
                                          mix64(seed ^ std::uint64_t(p)), opt);
    out.paths[p] = sample.states;
    out.budget.blocks_total += sample.budget.blocks_total;
    out.budget.blocks_skipped += sample.budget.blocks_skipped;
    out.budget.blocks_capped += sample.budget.blocks_capped;
    out.budget.skipped_visibility += sample.budget.skipped_visibility;
    out.budget.rejection_attempts += sample.budget.rejection_attempts;
    out.budget.window_lo = k_min;
    out.budget.window_hi = k_max;
  }
  return out;
}

namespace {

// trapezoid in t of per-path indicators
double path_integral(const EventPredicate& event,
                     const std::vector<MassPartition>& states,
                     const std::vector<double>& t) {
  double acc = 0.0;
  for (std::size_t q = 0; q + 1 < t.size(); ++q) {
    const double a = event.eval(states[q]) ? 1.0 : 0.0;
    const double b = event.eval(states[q + 1]) ? 1.0 : 0.0;
    acc += 0.5 * (a + b) * (t[q + 1] - t[q]);
  }
  // the integrand vanishes at t -> 0 for events away from the zero state
  acc += 0.5 * (event.eval(states[0]) ? 1.0 : 0.0) * t[0];
  return acc;
}

double integrand_tail_fraction(const EventPredicate& event,
                               const LimitPathSet& paths, double integral) {
  // fit a power decay on the last grid nodes with positive empirical mean
  const auto& t = paths.t_grid;
  std::vector<double> xs, ys;
  for (std::size_t q = t.size() >= 6 ? t.size() - 6 : 0; q < t.size(); ++q) {
    double g = 0.0;
    for (const auto& p : paths.paths) g += event.eval(p[q]) ? 1.0 : 0.0;
    g /= double(paths.paths.size());
    if (g > 0.0) {
      xs.push_back(std::log(t[q]));
      ys.push_back(std::log(g));
    }
  }
  if (xs.size() < 3) return 0.0;  // integrand already dead before t_max
  const auto fit = fit_line(xs, ys);
  const double p = -fit.slope;
  const double g_last = std::exp(ys.back());
  const double t_max = t.back();
  if (p <= 1.0) return 1.0;  // non-integrable-looking tail: flag loudly
  const double tail = g_last * t_max / (p - 1.0);
  return integral > 0.0 ? tail / integral : 1.0;
}

}  // namespace

LambdaEstimate estimate_lambda(const EventPredicate& event,
                               const LimitPathSet& paths, std::uint64_t seed,
                               bool enforce_tail) {
  if (paths.paths.empty())
    throw insufficient_data_error("estimate_lambda: no paths");
  std::vector<double> per_path(paths.paths.size());
  for (std::size_t p = 0; p < paths.paths.size(); ++p)
    per_path[p] = path_integral(event, paths.paths[p], paths.t_grid);
  LambdaEstimate est;
  est.value = mean(per_path);
  est.ci = bootstrap_ci(
      per_path, [](const std::vector<double>& v) { return mean(v); }, 400,
      0.99, seed ^ 0x6c616d62ULL);
  est.tail_fraction = integrand_tail_fraction(event, paths, est.value);
  est.tail_ok = est.tail_fraction <= 0.01;
  if (enforce_tail && !est.tail_ok)
    throw config_error("estimate_lambda: t_max too small, fitted tail " +
                       std::to_string(est.tail_fraction) +
                       " of the estimate lies beyond the grid");
  return est;
}

InvarianceReport invariance_test(const std::vector<EventPredicate>& events,
                                 double u, const LimitPathSet& paths,
                                 const FragmentationConfig& evolve_config,
                                 std::uint64_t seed) {
  if (events.empty()) throw config_error("invariance_test: no events");
  if (!(u > 0.0)) throw config_error("invariance_test: u must be > 0");
  InvarianceReport rep;
  rep.u = u;
  rep.z_cutoff = normal_quantile(1.0 - 0.01 / (2.0 * double(events.size())));

  const std::size_t np = paths.paths.size();
  // evolve every sampled state once; all events share the evolved paths
  std::vector<std::vector<MassPartition>> evolved(np);
  for (std::size_t p = 0; p < np; ++p) {
    evolved[p].resize(paths.t_grid.size());
    for (std::size_t q = 0; q < paths.t_grid.size(); ++q)
      evolved[p][q] =
          evolve_state(paths.paths[p][q], u, evolve_config,
                       mix64(seed ^ (std::uint64_t(p) << 22) ^ q));
  }

  rep.max_abs_z = 0.0;
  bool all_ok = true;
  for (const auto& event : events) {
    std::vector<double> lhs(np), rhs(np), diff(np);
    for (std::size_t p = 0; p < np; ++p) {
      lhs[p] = path_integral(event, paths.paths[p], paths.t_grid);
      rhs[p] = path_integral(event, evolved[p], paths.t_grid);
      diff[p] = lhs[p] - rhs[p];
    }
    InvarianceRow row;
    row.event = event.name;
    row.lhs = mean(lhs);
    row.rhs = mean(rhs);
    const double se = std::sqrt(variance(diff) / double(np));
    row.z = se > 0.0 ? mean(diff) / se : 0.0;
    rep.max_abs_z = std::max(rep.max_abs_z, std::abs(row.z));
    if (std::abs(row.z) > rep.z_cutoff) all_ok = false;
    rep.rows.push_back(std::move(row));
  }
  rep.pass = all_ok;
  return rep;
}

}  // namespace fragsim
