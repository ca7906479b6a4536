#include "fragsim/frag_engine.hpp"

#include <algorithm>
#include <cmath>

#include "fragsim/errors.hpp"

namespace fragsim {

void FragmentationConfig::validate() const {
  if (!(alpha < 0.0)) throw config_error("config: alpha must be < 0");
  if (!(dust_threshold > 0.0 && dust_threshold < 1.0))
    throw config_error("config: dust_threshold must lie in (0,1)");
  if (!(initial_mass > 0.0)) throw config_error("config: initial mass > 0");
}

namespace {

struct Engine {
  double alpha;
  bool alpha_is_m1;
  const DislocationLaw* law;
  double dust;
  std::uint64_t seed;
  std::uint64_t max_blocks;

  std::uint64_t visited = 0;
  std::uint64_t dustc = 0;
  std::uint64_t violations = 0;

  double prune_h = 0.0;
  double reject_above = std::numeric_limits<double>::infinity();
  bool aborted = false;

  double best = -1.0;
  bool want_path = false;
  std::vector<std::uint8_t> cur_path, best_path;

  double pow_na(double m) const { return alpha_is_m1 ? m : std::pow(m, -alpha); }

  void budget_check() {
    if (++visited > max_blocks)
      throw resource_limit_error(
          "block budget of " + std::to_string(max_blocks) +
          " exceeded; raise dust_threshold (the lever) or max_blocks");
  }

  // Returns the subtree extinction time of a block with mass >= dust.
  double run(std::uint64_t id, double m, double birth) {
    budget_check();
    Stream rng = Stream::from(seed, id);
    const double t_split = birth + rng.next_exp() * pow_na(m);
    if (t_split >= reject_above) {
      aborted = true;  // zeta exceeds every block's split time: exact reject
      return t_split;
    }
    double s[kMaxFragments];
    const int n = law->sample_into(rng, s);
    double tot = 0.0;
    for (int j = 0; j < n; ++j) tot += s[j];
    if (std::abs(tot - 1.0) > 1e-12) ++violations;

    double ext = t_split;  // dust children die at birth
    // Children in decreasing mass order: the largest subtree usually carries
    // the maximum, which makes the prune bite early.
    bool saw_dust = false;
    int first_dust = -1;
    for (int j = 0; j < n; ++j) {
      const double mc = m * s[j];
      if (mc < dust) {
        ++dustc;
        if (!saw_dust) {
          saw_dust = true;
          first_dust = j;
        }
        continue;
      }
      if (prune_h > 0.0 && t_split + pow_na(mc) * prune_h < best) continue;
      if (want_path) cur_path.push_back((std::uint8_t)j);
      const double e = run(child_block_id(id, j), mc, t_split);
      if (want_path) cur_path.pop_back();
      if (aborted) return ext;
      if (e > ext) ext = e;
    }
    if (saw_dust && t_split > best) {
      best = t_split;
      if (want_path) {
        best_path = cur_path;
        best_path.push_back((std::uint8_t)first_dust);
      }
    }
    return ext;
  }
};

struct StateEngine {
  double alpha;
  bool alpha_is_m1;
  const DislocationLaw* law;
  double dust;
  std::uint64_t seed;
  std::uint64_t max_blocks;
  std::uint64_t visited = 0;
  double prune_h = 0.0;

  const std::vector<double>* times = nullptr;  // sorted ascending
  bool left = true;
  std::vector<std::vector<double>>* out = nullptr;

  double pow_na(double m) const { return alpha_is_m1 ? m : std::pow(m, -alpha); }

  void run(std::uint64_t id, double m, double birth) {
    if (++visited > max_blocks)
      throw resource_limit_error("state query: block budget exceeded");
    Stream rng = Stream::from(seed, id);
    const double t_split = birth + rng.next_exp() * pow_na(m);
    const auto& ts = *times;
    // alive window: [birth, t_split) for values, (birth, t_split] for limits
    for (std::size_t q = 0; q < ts.size(); ++q) {
      const bool alive = left ? (birth < ts[q] && ts[q] <= t_split)
                              : (birth <= ts[q] && ts[q] < t_split);
      if (alive) (*out)[q].push_back(m);
    }
    if (t_split > ts.back()) return;  // children born after every query
    double s[kMaxFragments];
    const int n = law->sample_into(rng, s);
    for (int j = 0; j < n; ++j) {
      const double mc = m * s[j];
      if (mc < dust) continue;  // dust is excluded from states
      if (prune_h > 0.0 && t_split + pow_na(mc) * prune_h < ts.front())
        continue;  // extinct before the first query
      run(child_block_id(id, j), mc, t_split);
    }
  }
};

double dust_error_bound(double dust, double alpha, double q_hat,
                        std::uint64_t dust_count, bool pruned) {
  // Pruned walks undercount dust; a conservative leaf-count cap stands in.
  double n_dust = double(dust_count);
  if (pruned) n_dust = std::max(n_dust, 4.0 / dust);
  return std::pow(dust, -alpha) * q_hat * (1.0 + std::log(std::max(1.0, n_dust)));
}

std::vector<SpineStep> walk_spine(const FragmentationConfig& cfg,
                                  std::uint64_t root_id, double zeta,
                                  const std::vector<std::uint8_t>& path) {
  const bool a1 = cfg.alpha == -1.0;
  auto pow_na = [&](double m) { return a1 ? m : std::pow(m, -cfg.alpha); };
  const double flag_mass = std::sqrt(cfg.dust_threshold);

  std::vector<SpineStep> steps;
  double mass = cfg.initial_mass;
  double t = 0.0;
  std::uint64_t id = root_id;

  SpineStep s0;
  s0.n = 0;
  s0.T = 0.0;
  s0.Z = std::pow(mass, cfg.alpha) * zeta;
  s0.Y = std::pow(s0.Z, 1.0 / cfg.alpha);
  s0.Theta = 1.0;
  s0.truncation_flag = mass < flag_mass;
  steps.push_back(std::move(s0));
  double z_prev = steps[0].Z;

  for (std::size_t k = 0; k < path.size(); ++k) {
    Stream rng = Stream::from(cfg.seed, id);
    const double t_split = t + rng.next_exp() * pow_na(mass);
    double s[kMaxFragments];
    const int n = cfg.law.sample_into(rng, s);
    const int j = path[k];
    const double mc = mass * s[j];
    if (mc < cfg.dust_threshold) break;  // dust arrival, not a spine step
    SpineStep st;
    st.n = int(k) + 1;
    st.T = t_split;
    st.Theta = s[j];
    st.Delta.reserve(n - 1);
    for (int i = 0; i < n; ++i)
      if (i != j) st.Delta.push_back(s[i]);
    st.Z = std::pow(mc, cfg.alpha) * (zeta - t_split);
    st.Y = std::pow(st.Z / z_prev, 1.0 / cfg.alpha) / st.Theta;
    st.truncation_flag = mc < flag_mass;
    steps.push_back(std::move(st));
    z_prev = steps.back().Z;
    mass = mc;
    t = t_split;
    id = child_block_id(id, j);
  }
  return steps;
}

}  // namespace

RunSummary simulate_summary(const FragmentationConfig& config,
                            std::uint64_t replica, const SummaryOptions& opt) {
  config.validate();
  RunSummary out;
  const std::uint64_t root = replica_block_id(replica);

  if (config.initial_mass < config.dust_threshold) {
    out.zeta = 0.0;
    out.dust_blocks = 1;
    out.states_abs.assign(opt.absolute_times.size(), {});
    out.states_end.assign(opt.end_offsets.size(), {});
    return out;
  }

  Engine eng;
  eng.alpha = config.alpha;
  eng.alpha_is_m1 = config.alpha == -1.0;
  eng.law = &config.law;
  eng.dust = config.dust_threshold;
  eng.seed = config.seed;
  eng.max_blocks = config.max_blocks;
  eng.prune_h = opt.prune_horizon;
  eng.reject_above = opt.reject_above;
  eng.want_path = opt.want_spine;

  out.zeta = eng.run(root, config.initial_mass, 0.0);
  out.rejected = eng.aborted;
  out.blocks = eng.visited;
  out.dust_blocks = eng.dustc;
  out.conservation_violations = eng.violations;
  if (out.rejected) return out;

  out.zeta_error_bound = dust_error_bound(
      config.dust_threshold, config.alpha, opt.q_hat, eng.dustc,
      opt.prune_horizon > 0.0);
  if (opt.want_spine)
    out.spine = walk_spine(config, root, out.zeta, eng.best_path);

  auto query = [&](const std::vector<double>& times,
                   std::vector<MassPartition>& dst) {
    dst.assign(times.size(), {});
    std::vector<double> usable;
    std::vector<std::size_t> idx;
    for (std::size_t q = 0; q < times.size(); ++q)
      if (times[q] >= 0.0 && times[q] <= out.zeta) {
        usable.push_back(times[q]);
        idx.push_back(q);
      }
    if (usable.empty()) return;
    StateEngine se;
    se.alpha = config.alpha;
    se.alpha_is_m1 = eng.alpha_is_m1;
    se.law = &config.law;
    se.dust = config.dust_threshold;
    se.seed = config.seed;
    se.max_blocks = config.max_blocks;
    se.prune_h = opt.prune_horizon;
    se.left = opt.left_limits;
    se.times = &usable;
    std::vector<std::vector<double>> collect(usable.size());
    se.out = &collect;
    se.run(root, config.initial_mass, 0.0);
    for (std::size_t q = 0; q < usable.size(); ++q)
      dst[idx[q]] = rearrange(std::move(collect[q]));
  };

  if (!opt.absolute_times.empty()) query(opt.absolute_times, out.states_abs);
  if (!opt.end_offsets.empty()) {
    std::vector<double> abs_times;
    for (double off : opt.end_offsets) abs_times.push_back(out.zeta - off);
    std::sort(abs_times.begin(), abs_times.end());
    std::vector<MassPartition> tmp;
    query(abs_times, tmp);
    // abs_times ascending corresponds to offsets descending
    out.states_end.assign(opt.end_offsets.size(), {});
    for (std::size_t q = 0; q < opt.end_offsets.size(); ++q)
      out.states_end[q] = std::move(tmp[tmp.size() - 1 - q]);
  }
  return out;
}

namespace {

struct RecordBuilder {
  const FragmentationConfig* cfg;
  bool a1;
  SimulationRecord* rec;

  double pow_na(double m) const { return a1 ? m : std::pow(m, -cfg->alpha); }

  double build(std::uint64_t id, std::int32_t self) {
    auto& blocks = rec->blocks;
    if (blocks.size() > cfg->max_blocks)
      throw resource_limit_error(
          "simulate: block budget of " + std::to_string(cfg->max_blocks) +
          " exceeded; raise dust_threshold (the lever) or max_blocks");
    const double m = blocks[self].mass;
    const double birth = blocks[self].birth;
    if (m < cfg->dust_threshold) {
      blocks[self].dust = true;
      blocks[self].split_or_dust = birth;
      blocks[self].subtree_ext = birth;
      return birth;
    }
    Stream rng = Stream::from(cfg->seed, id);
    const double t_split = birth + rng.next_exp() * pow_na(m);
    double s[kMaxFragments];
    const int n = cfg->law.sample_into(rng, s);
    blocks[self].split_or_dust = t_split;
    blocks[self].first_child = (std::int32_t)blocks.size();
    blocks[self].n_children = n;
    for (int j = 0; j < n; ++j) {
      BlockRecord child;
      child.rng_id = child_block_id(id, j);
      child.parent = self;
      child.mass = m * s[j];
      child.birth = t_split;
      blocks.push_back(child);
    }
    double ext = t_split;
    for (int j = 0; j < n; ++j) {
      const std::int32_t ci = blocks[self].first_child + j;
      ext = std::max(ext, build(blocks[ci].rng_id, ci));
    }
    blocks[self].subtree_ext = ext;
    return ext;
  }
};

}  // namespace

SimulationRecord simulate(const FragmentationConfig& config,
                          std::uint64_t replica, double q_hat) {
  config.validate();
  SimulationRecord rec;
  rec.config = config;
  BlockRecord root;
  root.rng_id = replica_block_id(replica);
  root.mass = config.initial_mass;
  root.birth = 0.0;
  rec.blocks.push_back(root);
  RecordBuilder rb{&config, config.alpha == -1.0, &rec};
  rec.zeta = rb.build(root.rng_id, 0);

  std::uint64_t dustc = 0;
  for (const auto& b : rec.blocks) dustc += b.dust ? 1 : 0;
  rec.zeta_error_bound =
      dust_error_bound(config.dust_threshold, config.alpha, q_hat, dustc, false);

  // argmax path: among children of the current spine block, the subtree with
  // the maximal extinction time (unique up to dust ties at the leaf scale)
  std::int32_t cur = 0;
  rec.spine_ids.push_back(0);
  while (!rec.blocks[cur].dust) {
    std::int32_t arg = -1;
    double ext = -1.0;
    for (int j = 0; j < rec.blocks[cur].n_children; ++j) {
      const std::int32_t ci = rec.blocks[cur].first_child + j;
      if (rec.blocks[ci].subtree_ext > ext) {
        ext = rec.blocks[ci].subtree_ext;
        arg = ci;
      }
    }
    if (arg < 0) break;
    rec.spine_ids.push_back(arg);
    cur = arg;
  }
  return rec;
}

MassPartition state_at(const SimulationRecord& record, double t,
                       StateSide side) {
  if (t < 0.0) throw config_error("state_at: t must be >= 0");
  std::vector<double> masses;
  for (const auto& b : record.blocks) {
    if (b.dust) continue;
    const bool alive = side == StateSide::LeftLimit
                           ? (b.birth < t && t <= b.split_or_dust)
                           : (b.birth <= t && t < b.split_or_dust);
    if (alive) masses.push_back(b.mass);
  }
  return rearrange(std::move(masses));
}

std::vector<SpineStep> spine(const SimulationRecord& record) {
  // Recover child indices along the stored spine, then derive steps.
  std::vector<std::uint8_t> path;
  for (std::size_t k = 1; k < record.spine_ids.size(); ++k) {
    const auto& parent = record.blocks[record.spine_ids[k - 1]];
    path.push_back(
        (std::uint8_t)(record.spine_ids[k] - parent.first_child));
  }
  return walk_spine(record.config, record.blocks[0].rng_id, record.zeta, path);
}

ConditionedRun simulate_conditioned_summary(const FragmentationConfig& config,
                                            double x, std::uint64_t replica,
                                            long max_attempts,
                                            SummaryOptions opt) {
  if (!(x > 0.0)) throw config_error("simulate_conditioned: x must be > 0");
  ConditionedRun out;
  opt.reject_above = x;
  const std::uint64_t base = replica_block_id(replica) ^ 0x636f6e64ULL;
  for (long a = 0; a < max_attempts; ++a) {
    ++out.attempts;
    RunSummary s = simulate_summary(config, base + std::uint64_t(a), opt);
    if (!s.rejected) {
      out.summary = std::move(s);
      out.acceptance_estimate = 1.0 / double(out.attempts);
      return out;
    }
  }
  throw rejection_budget_error(
      "simulate_conditioned: no acceptance within " +
          std::to_string(max_attempts) + " attempts",
      1.0 / double(max_attempts + 1));
}

SimulationRecord simulate_conditioned(const FragmentationConfig& config,
                                      double x, std::uint64_t replica,
                                      long max_attempts, long* attempts_out) {
  SummaryOptions probe;
  probe.want_spine = false;
  ConditionedRun run =
      simulate_conditioned_summary(config, x, replica, max_attempts, probe);
  if (attempts_out) *attempts_out = run.attempts;
  // Re-walk the accepted attempt with full genealogy (same streams).
  const std::uint64_t base = replica_block_id(replica) ^ 0x636f6e64ULL;
  FragmentationConfig cfg = config;
  SimulationRecord rec;
  rec.config = cfg;
  BlockRecord root;
  root.rng_id = replica_block_id(base + std::uint64_t(run.attempts - 1));
  root.mass = cfg.initial_mass;
  rec.blocks.push_back(root);
  RecordBuilder rb{&cfg, cfg.alpha == -1.0, &rec};
  rec.zeta = rb.build(root.rng_id, 0);
  std::uint64_t dustc = 0;
  for (const auto& b : rec.blocks) dustc += b.dust ? 1 : 0;
  rec.zeta_error_bound = dust_error_bound(cfg.dust_threshold, cfg.alpha, 12.0,
                                          dustc, false);
  std::int32_t cur = 0;
  rec.spine_ids.push_back(0);
  while (!rec.blocks[cur].dust) {
    std::int32_t arg = -1;
    double ext = -1.0;
    for (int j = 0; j < rec.blocks[cur].n_children; ++j) {
      const std::int32_t ci = rec.blocks[cur].first_child + j;
      if (rec.blocks[ci].subtree_ext > ext) {
        ext = rec.blocks[ci].subtree_ext;
        arg = ci;
      }
    }
    if (arg < 0) break;
    rec.spine_ids.push_back(arg);
    cur = arg;
  }
  return rec;
}

MassPartition evolve_state(const MassPartition& state, double u,
                           const FragmentationConfig& config,
                           std::uint64_t salt) {
  if (!(u >= 0.0)) throw config_error("evolve_state: u must be >= 0");
  if (u == 0.0) return state;
  std::vector<double> masses;
  const std::vector<double> times{u};
  for (std::size_t i = 0; i < state.size(); ++i) {
    if (state[i] < config.dust_threshold) continue;
    StateEngine se;
    se.alpha = config.alpha;
    se.alpha_is_m1 = config.alpha == -1.0;
    se.law = &config.law;
    se.dust = config.dust_threshold;
    se.seed = config.seed;
    se.max_blocks = config.max_blocks;
    se.prune_h = 120.0;
    se.left = false;  // cadlag value at u
    se.times = &times;
    std::vector<std::vector<double>> collect(1);
    se.out = &collect;
    se.run(child_block_id(mix64(salt ^ 0x65766f6cULL), (int)i), state[i], 0.0);
    masses.insert(masses.end(), collect[0].begin(), collect[0].end());
  }
  return rearrange(std::move(masses));
}

}  // namespace fragsim
