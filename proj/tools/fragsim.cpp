// fragsim: command-line front end for the fragmentation engine and its
// verification suite. Subcommands emit CSV bulk data plus a JSON report that
// embeds the resolved configuration and the build identifier.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "fragsim/acceptance.hpp"
#include "fragsim/density_solver.hpp"
#include "fragsim/errors.hpp"
#include "fragsim/frag_engine.hpp"
#include "fragsim/geometric.hpp"
#include "fragsim/invariant.hpp"
#include "fragsim/parallel.hpp"
#include "fragsim/renewal_limit.hpp"
#include "fragsim/spine_chain.hpp"
#include "fragsim/stats.hpp"

using namespace fragsim;
using nlohmann::json;

#ifndef FRAGSIM_BUILD_ID
#define FRAGSIM_BUILD_ID "unversioned"
#endif

namespace {

struct CommonOpts {
  std::string law = "binary-uniform";
  double alpha = -1.0;
  double dust = 1e-6;
  std::uint64_t seed = 0;
  int threads = 1;
  double x_max = 16.0;
  int n_points = 2736;
  double tol = 1e-9;
  int max_iter = 600;
  int n_quad = 512;
  std::string out = "fragsim-out";
  bool gnuplot_stub = false;

  FragmentationConfig config() const {
    FragmentationConfig cfg;
    cfg.law = DislocationLaw::parse(law);
    cfg.alpha = alpha;
    cfg.dust_threshold = dust;
    cfg.seed = seed;
    cfg.validate();
    return cfg;
  }
  SolverOptions solver() const {
    SolverOptions o;
    o.grid = {x_max, n_points};
    o.tol = tol;
    o.max_iter = max_iter;
    o.n_quad = n_quad;
    return o;
  }
  json resolved(const std::string& command) const {
    json j;
    j["command"] = command;
    j["build"] = FRAGSIM_BUILD_ID;
    j["law"] = law;
    j["alpha"] = alpha;
    j["dust"] = dust;
    j["seed"] = seed;
    j["threads"] = threads;
    j["x_max"] = x_max;
    j["n_points"] = n_points;
    j["tol"] = tol;
    j["max_iter"] = max_iter;
    j["n_quad"] = n_quad;
    return j;
  }
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--law", o.law, "dislocation law spec");
  cmd->add_option("--alpha", o.alpha, "index of self-similarity (< 0)");
  cmd->add_option("--dust", o.dust, "dust threshold");
  cmd->add_option("--seed", o.seed, "random seed")->envname("FRAGSIM_SEED");
  cmd->add_option("--threads", o.threads, "worker threads (replica level)");
  cmd->add_option("--x-max", o.x_max, "grid upper end");
  cmd->add_option("--n-points", o.n_points, "grid points");
  cmd->add_option("--tol", o.tol, "solver tolerance");
  cmd->add_option("--max-iter", o.max_iter, "solver sweep limit");
  cmd->add_option("--n-quad", o.n_quad, "frozen quadrature samples");
  cmd->add_option("--out", o.out, "output path prefix");
  cmd->add_flag("--gnuplot-stub", o.gnuplot_stub,
                "emit a ready-to-run gnuplot script per CSV");
}

void write_report(const CommonOpts& o, const std::string& command, json body) {
  body["config"] = o.resolved(command);
  std::ofstream f(o.out + ".report.json");
  f << body.dump(2) << "\n";
}

void maybe_gnuplot(const CommonOpts& o, const std::string& csv,
                   const std::string& title, const std::string& using_spec) {
  if (!o.gnuplot_stub) return;
  std::ofstream g(csv + ".gp");
  g << "set datafile separator ','\nset key autotitle columnhead\n"
    << "set title '" << title << "'\n"
    << "plot '" << csv << "' using " << using_spec << " with lines\n";
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct SolvedBundle {
  DensityResult dens;
  StationaryResult stat;
};

SolvedBundle solve_all(const CommonOpts& o) {
  SolvedBundle b{solve_extinction_density(DislocationLaw::parse(o.law),
                                          o.alpha, o.solver()),
                 {}};
  b.stat = solve_stationary(b.dens, o.tol, o.max_iter);
  return b;
}

// ---------------- subcommand bodies ----------------

int cmd_simulate(const CommonOpts& o, long n, bool full_tree) {
  auto cfg = o.config();
  std::ofstream out(o.out + ".jsonl");
  std::vector<std::string> lines(n);
  SummaryOptions sopt;
  parallel_replicas(n, o.threads, [&](long r) {
    json j;
    if (full_tree) {
      auto rec = simulate(cfg, (std::uint64_t)r);
      j["zeta"] = rec.zeta;
      j["zeta_error_bound"] = rec.zeta_error_bound;
      json blocks = json::array();
      for (const auto& b : rec.blocks)
        blocks.push_back({{"parent", b.parent},
                          {"mass", b.mass},
                          {"birth", b.birth},
                          {"split_or_dust", b.split_or_dust},
                          {"subtree_ext", b.subtree_ext},
                          {"dust", b.dust}});
      j["blocks"] = std::move(blocks);
      json spine_ids = json::array();
      for (auto id : rec.spine_ids) spine_ids.push_back(id);
      j["spine_ids"] = std::move(spine_ids);
    } else {
      auto run = simulate_summary(cfg, (std::uint64_t)r, sopt);
      j["zeta"] = run.zeta;
      j["zeta_error_bound"] = run.zeta_error_bound;
      j["blocks"] = run.blocks;
      j["spine_steps"] = run.spine.size();
      if (run.spine.size() > 1) {
        j["Z1"] = run.spine[1].Z;
        j["Y1"] = run.spine[1].Y;
        j["Theta1"] = run.spine[1].Theta;
      }
    }
    j["replica"] = r;
    lines[r] = j.dump();
  });
  for (const auto& l : lines) out << l << "\n";
  write_report(o, "simulate", {{"n", n}, {"full_tree", full_tree}});
  return 0;
}

int cmd_solve_density(const CommonOpts& o) {
  auto b = solve_all(o);
  const std::string csv = o.out + ".density.csv";
  std::ofstream f(csv);
  f << "x,f_zeta,F_zeta\n";
  for (int j = 0; j <= b.dens.f.n_points; ++j)
    f << num(b.dens.f.x(j)) << "," << num(b.dens.f.values[j]) << ","
      << num(b.dens.F.values[j]) << "\n";
  auto diag = density_diagnostics(b.dens, DislocationLaw::parse(o.law));
  write_report(o, "solve-density",
               {{"iterations", b.dens.iterations},
                {"residual", b.dens.residual},
                {"escaped_mass", b.dens.escaped_mass},
                {"max_density", diag.max_density},
                {"tail_rate", diag.tail_rate},
                {"smallx_exponent", diag.smallx_exponent},
                {"smallx_required", diag.smallx_required},
                {"positive", diag.positive}});
  maybe_gnuplot(o, csv, "extinction-time density", "1:2");
  return 0;
}

int cmd_stationary(const CommonOpts& o) {
  auto b = solve_all(o);
  const std::string csv = o.out + ".stationary.csv";
  std::ofstream f(csv);
  f << "x,pi_stat\n";
  for (int j = 0; j <= b.stat.pi.n_points; ++j)
    f << num(b.stat.pi.x(j)) << "," << num(b.stat.pi.values[j]) << "\n";
  write_report(o, "stationary",
               {{"iterations", b.stat.iterations},
                {"residual", b.stat.residual},
                {"guarded_nodes", b.stat.guarded_nodes}});
  maybe_gnuplot(o, csv, "stationary density", "1:2");
  return 0;
}

int cmd_spine_chain(const CommonOpts& o, const std::string& z0_spec, int steps,
                    long reps) {
  auto b = solve_all(o);
  TransitionKernel kernel(b.dens);
  GridSampler pi(b.stat.pi);
  GridSampler fz(b.dens.f);
  const std::string csv = o.out + ".chain.csv";
  std::vector<std::string> lines(reps);
  parallel_replicas(reps, o.threads, [&](long r) {
    Stream rng = Stream::from(o.seed, mix64(0x5c5cULL ^ (std::uint64_t)r));
    double z0;
    if (z0_spec == "stationary")
      z0 = pi.sample(rng);
    else if (z0_spec == "zeta")
      z0 = fz.sample(rng);
    else
      z0 = std::stod(z0_spec);
    auto chain = run_chain(z0, steps, kernel, rng);
    std::ostringstream os;
    for (const auto& s : chain)
      os << r << "," << s.n << "," << num(s.T) << "," << num(s.Z) << ","
         << num(s.Y) << "," << num(s.Theta) << ","
         << num(total_mass(s.Delta)) << "\n";
    lines[r] = os.str();
  });
  std::ofstream f(csv);
  f << "replica,n,T,Z,Y,theta,delta_total\n";
  for (const auto& l : lines) f << l;
  write_report(o, "spine-chain",
               {{"z0", z0_spec}, {"steps", steps}, {"reps", reps}});
  maybe_gnuplot(o, csv, "driving chain", "2:4");
  return 0;
}

int cmd_ergodicity(const CommonOpts& o, std::vector<double> starts, int steps,
                   long reps) {
  auto b = solve_all(o);
  TransitionKernel kernel(b.dens);
  GridSampler pi(b.stat.pi);
  if (starts.size() < 2) starts = {0.2, 1.0, 4.0};
  auto rep = ergodicity_report(starts, steps, reps, kernel, pi, o.seed);
  json by_start = json::array();
  for (std::size_t s = 0; s < starts.size(); ++s)
    by_start.push_back({{"z0", starts[s]}, {"ks_by_n", rep.ks_by_n[s]}});
  write_report(o, "ergodicity",
               {{"starts", starts},
                {"reps", reps},
                {"ks", by_start},
                {"decay_rate", rep.decay_rate},
                {"decay_rate_se", rep.decay_rate_se},
                {"contracts", rep.contracts},
                {"final_ks_max", rep.final_ks_max}});
  return 0;
}

void write_limit_csv(const std::string& csv,
                     const std::vector<std::string>& lines) {
  std::ofstream f(csv);
  f << "replica,t,m1,m2,m3,m4,m5,m6,m7,m8,spine,total\n";
  for (const auto& l : lines) f << l;
}

std::string limit_row(long rep, double t, const MassPartition& state,
                      double spine_val) {
  std::ostringstream os;
  os << rep << "," << num(t);
  for (int i = 0; i < 8; ++i)
    os << "," << num(i < (int)state.size() ? state[i] : 0.0);
  os << "," << num(spine_val) << "," << num(total_mass(state)) << "\n";
  return os.str();
}

int cmd_geometric(const CommonOpts& o, int k, const std::string& mode,
                  std::vector<double> xs, int levels, long n);

int cmd_limit(const CommonOpts& o, const std::string& mode,
              std::vector<double> times, long reps, bool subsequence) {
  auto law = DislocationLaw::parse(o.law);
  if (subsequence) {
    // lattice laws converge only along k^{alpha(x+n)} subsequences
    if (law.kind() != LawKind::KaryEqual)
      throw config_error(
          "limit --subsequence: lattice subsequence limits are implemented "
          "for kary laws (see the `geometric` subcommand)");
    return cmd_geometric(o, law.kary_k(), "subseq", {0.0, 0.5}, 12, reps);
  }
  require_non_arithmetic(law);
  auto b = solve_all(o);
  TransitionKernel kernel(b.dens);
  kernel.prepare_reverse(b.stat.pi);
  GridSampler pi(b.stat.pi);
  LadderBuilder builder(kernel, pi, 32);
  if (times.empty()) times = {0.25, 0.5, 1.0, 2.0};
  std::sort(times.begin(), times.end());
  auto cfg = o.config();
  std::vector<std::string> lines(reps);
  parallel_replicas(reps, o.threads, [&](long r) {
    Stream rng = Stream::from(o.seed, mix64(0x717aULL ^ (std::uint64_t)r));
    BiasedLadder lad = builder.build(-40, 40, rng);
    std::ostringstream os;
    if (mode == "spine") {
      for (double t : times)
        os << limit_row(r, t, {last_fragment_limit_at(lad, t)},
                        last_fragment_limit_at(lad, t));
    } else {
      auto sample = full_limit_sample(lad, times, cfg, b.dens,
                                      mix64(o.seed ^ (std::uint64_t)r));
      for (std::size_t q = 0; q < times.size(); ++q)
        os << limit_row(r, times[q], sample.states[q], sample.spine_values[q]);
    }
    lines[r] = os.str();
  });
  const std::string csv = o.out + ".limit.csv";
  write_limit_csv(csv, lines);
  write_report(o, "limit", {{"mode", mode}, {"times", times}, {"reps", reps}});
  maybe_gnuplot(o, csv, "limit state", "2:12");
  return 0;
}

int cmd_prelimit(const CommonOpts& o, std::vector<double> eps_list,
                 std::vector<double> times, long reps, bool subsequence) {
  auto law = DislocationLaw::parse(o.law);
  if (!subsequence) require_non_arithmetic(law);
  if (times.empty()) times = {0.25, 0.5, 1.0, 2.0};
  if (eps_list.empty()) eps_list = {1e-2, 1e-3};
  std::sort(times.begin(), times.end());
  auto cfg = o.config();
  std::vector<std::string> lines(reps);
  parallel_replicas(reps, o.threads, [&](long r) {
    std::ostringstream os;
    for (double eps : eps_list) {
      auto pre = rescaled_prelimit(cfg, (std::uint64_t)r, eps, times);
      for (std::size_t q = 0; q < times.size(); ++q)
        os << limit_row(r, times[q], pre.states[q], pre.spine_values[q]);
    }
    lines[r] = os.str();
  });
  const std::string csv = o.out + ".prelimit.csv";
  write_limit_csv(csv, lines);
  write_report(o, "prelimit",
               {{"eps", eps_list}, {"times", times}, {"reps", reps}});
  maybe_gnuplot(o, csv, "rescaled pre-limit state", "2:12");
  return 0;
}

int cmd_invariance(const CommonOpts& o, double u, long n_paths,
                   const std::string& events_file) {
  require_non_arithmetic(DislocationLaw::parse(o.law));
  auto b = solve_all(o);
  TransitionKernel kernel(b.dens);
  kernel.prepare_reverse(b.stat.pi);
  GridSampler pi(b.stat.pi);
  LadderBuilder builder(kernel, pi, 32);
  auto cfg = o.config();

  std::vector<EventPredicate> events;
  if (events_file.empty()) {
    events = EventPredicate::desk_family();
  } else {
    std::ifstream f(events_file);
    if (!f) throw config_error("invariance: cannot read " + events_file);
    json arr = json::parse(f);
    for (const auto& e : arr) events.push_back(EventPredicate::parse_json(e.dump()));
  }

  std::vector<double> t_grid;
  for (int i = 0; i < 24; ++i)
    t_grid.push_back(0.02 * std::pow(16.0 / 0.02, i / 23.0));
  auto paths = sample_limit_paths((int)n_paths, t_grid, builder, -40, 40, cfg,
                                  b.dens, o.seed ^ 0x11aULL);
  auto rep = invariance_test(events, u, paths, cfg, o.seed ^ 0x11bULL);

  json rows = json::array();
  for (std::size_t e = 0; e < events.size(); ++e) {
    auto lam = estimate_lambda(events[e], paths, o.seed ^ e, false);
    rows.push_back({{"event", rep.rows[e].event},
                    {"lambda", lam.value},
                    {"ci_lo", lam.ci.lo},
                    {"ci_hi", lam.ci.hi},
                    {"tail_fraction", lam.tail_fraction},
                    {"lhs", rep.rows[e].lhs},
                    {"rhs", rep.rows[e].rhs},
                    {"z", rep.rows[e].z}});
  }
  write_report(o, "invariance",
               {{"u", u},
                {"paths", n_paths},
                {"events", rows},
                {"z_cutoff", rep.z_cutoff},
                {"max_abs_z", rep.max_abs_z},
                {"verdict", rep.pass ? "pass" : "fail"}});
  return rep.pass ? 0 : 1;
}

int cmd_geometric(const CommonOpts& o, int k, const std::string& mode,
                  std::vector<double> xs, int levels, long n) {
  KaryConfig kc;
  kc.k = k;
  kc.alpha = o.alpha;
  kc.dust_threshold = o.dust < 1e-9 ? o.dust : 1e-12;
  kc.seed = o.seed;
  json report;
  if (mode == "monotone") {
    auto rep = stochastic_monotonicity_check(kc, levels, n);
    report = {{"f1_vs_f0k_gap", rep.f1_vs_f0k_gap},
              {"f1_eq_f0k", rep.f1_eq_f0k},
              {"worst_order_gap", rep.worst_order_gap},
              {"ordered", rep.ordered},
              {"zinf_dominates", rep.zinf_dominates},
              {"band", rep.band}};
  } else if (mode == "subseq") {
    if (xs.empty()) xs = {0.0, 0.5};
    auto rep = subsequence_limits(kc, xs, std::max(2, levels - 6), levels, n);
    json offs = json::array();
    const std::string csv = o.out + ".subseq.csv";
    std::ofstream f(csv);
    f << "x,value\n";
    for (const auto& off : rep.offsets) {
      offs.push_back({{"x", off.x},
                      {"stabilization_ks", off.stabilization_ks},
                      {"stabilized", off.stabilized},
                      {"lattice_ok", off.lattice_ok}});
      for (double v : off.limit_values)
        f << num(off.x) << "," << num(v) << "\n";
    }
    report = {{"offsets", offs},
              {"cross_ks", rep.cross_ks},
              {"cross_ks_ci", {rep.cross_ks_ci.lo, rep.cross_ks_ci.hi}},
              {"cross_distinct", rep.cross_distinct},
              {"inconclusive", rep.inconclusive}};
  } else {
    throw config_error("geometric: mode must be monotone|subseq");
  }
  write_report(o, "geometric",
               {{"k", k}, {"mode", mode}, {"n", n}, {"result", report}});
  return 0;
}

int cmd_accept(const CommonOpts& o, const std::string& profile_name) {
  AcceptProfile p =
      profile_name == "quick" ? AcceptProfile::quick() : AcceptProfile::desk();
  p.threads = o.threads;
  auto results = run_acceptance(p, std::cout);
  json rows = json::array();
  for (const auto& r : results)
    rows.push_back({{"id", r.id},
                    {"name", r.name},
                    {"pass", r.pass},
                    {"seconds", r.seconds},
                    {"detail", r.detail}});
  write_report(o, "accept", {{"profile", p.name}, {"criteria", rows}});
  return all_passed(results) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fragsim: self-similar fragmentation near extinction"};
  app.set_config("--config", "", "flat key=value configuration file");
  app.require_subcommand(1);

  CommonOpts o;

  long n_sim = 1000;
  bool full_tree = false;
  auto* sim = app.add_subcommand("simulate", "simulate fragmentation runs");
  add_common(sim, o);
  sim->add_option("--n", n_sim, "number of runs");
  sim->add_flag("--full-tree", full_tree, "dump complete genealogies");

  auto* dens = app.add_subcommand("solve-density", "solve f_zeta and F_zeta");
  add_common(dens, o);

  auto* stat = app.add_subcommand("stationary", "solve the stationary density");
  add_common(stat, o);

  std::string z0_spec = "stationary";
  int chain_steps = 50;
  long chain_reps = 1000;
  auto* chain = app.add_subcommand("spine-chain", "sample the driving chain");
  add_common(chain, o);
  chain->add_option("--z0", z0_spec, "start: number | stationary | zeta");
  chain->add_option("--steps", chain_steps);
  chain->add_option("--reps", chain_reps);

  std::vector<double> starts;
  int erg_steps = 30;
  long erg_reps = 100000;
  auto* erg = app.add_subcommand("ergodicity", "mixing diagnostics");
  add_common(erg, o);
  erg->add_option("--starts", starts);
  erg->add_option("--steps", erg_steps);
  erg->add_option("--reps", erg_reps);

  std::string limit_mode = "spine";
  std::vector<double> times;
  long limit_reps = 10000;
  bool subsequence = false;
  auto* lim = app.add_subcommand("limit", "sample the limit process");
  add_common(lim, o);
  lim->add_option("--mode", limit_mode, "spine|full");
  lim->add_option("--times", times);
  lim->add_option("--reps", limit_reps);
  lim->add_flag("--subsequence", subsequence,
                "acknowledge lattice laws (refused here; see `geometric`)");

  std::vector<double> eps_list;
  auto* pre = app.add_subcommand("prelimit", "rescaled states near extinction");
  add_common(pre, o);
  pre->add_option("--eps", eps_list);
  pre->add_option("--times", times);
  pre->add_option("--reps", limit_reps);
  pre->add_flag("--subsequence", subsequence,
                "evaluate along lattice subsequences despite a geometric law");

  double u = 0.05;
  long n_paths = 2000;
  std::string events_file;
  auto* inv = app.add_subcommand("invariance", "invariant-measure test");
  add_common(inv, o);
  inv->add_option("--u", u);
  inv->add_option("--paths", n_paths);
  inv->add_option("--events", events_file, "JSON array of event predicates");

  int k = 2;
  std::string geo_mode = "monotone";
  std::vector<double> xs;
  int levels = 12;
  long geo_n = 20000;
  auto* geo = app.add_subcommand("geometric", "k-ary lattice fragmentations");
  add_common(geo, o);
  geo->add_option("--k", k);
  geo->add_option("--mode", geo_mode, "monotone|subseq");
  geo->add_option("--x", xs, "lattice offsets in [0,1)");
  geo->add_option("--levels", levels);
  geo->add_option("--n", geo_n);

  std::string profile = "desk";
  auto* acc = app.add_subcommand("accept", "run the acceptance suite");
  add_common(acc, o);
  acc->add_option("--profile", profile, "desk|quick");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed()) return cmd_simulate(o, n_sim, full_tree);
    if (dens->parsed()) return cmd_solve_density(o);
    if (stat->parsed()) return cmd_stationary(o);
    if (chain->parsed())
      return cmd_spine_chain(o, z0_spec, chain_steps, chain_reps);
    if (erg->parsed()) return cmd_ergodicity(o, starts, erg_steps, erg_reps);
    if (lim->parsed())
      return cmd_limit(o, limit_mode, times, limit_reps, subsequence);
    if (pre->parsed())
      return cmd_prelimit(o, eps_list, times, limit_reps, subsequence);
    if (inv->parsed()) return cmd_invariance(o, u, n_paths, events_file);
    if (geo->parsed()) return cmd_geometric(o, k, geo_mode, xs, levels, geo_n);
    if (acc->parsed()) return cmd_accept(o, profile);
  } catch (const resource_limit_error& e) {
    std::cerr << "resource limit: " << e.what() << "\n";
    return 3;
  } catch (const config_error& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
