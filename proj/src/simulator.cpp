#include "mas/simulator.hpp"

#include <algorithm>
#include <chrono>
#include <future>
#include <set>

namespace mas {

const char* to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Completed: return "completed";
    case RunStatus::MaxTicks: return "max_ticks";
    case RunStatus::Aborted: return "aborted";
  }
  return "?";
}

Simulator::Simulator(SimConfig config)
    : config_(std::move(config)),
      env_(config_.env.get()),
      phi_(SafetyFn::parse(config_.safety_name, *config_.env)),
      ordering_(static_cast<int>(config_.agents.size())) {
  if (!env_) throw ConfigError("missing environment");
  if (config_.lookahead < 1) throw ConfigError("lookahead must be >= 1");
  if (config_.deviation_k < 0) throw ConfigError("deviation k must be >= 0");
  if (config_.resolved_comm_dist() < 1) throw ConfigError("comm_dist must be >= 1");
  if (config_.max_ticks < 1) throw ConfigError("max_ticks must be >= 1");
  const int n = static_cast<int>(config_.agents.size());
  if (n == 0) throw ConfigError("no agents");
  if (n > kMaxAgents) throw TooManyAgents("at most 64 agents are supported");

  std::set<std::string> names;
  std::vector<VertexId> starts;
  for (const AgentSpec& spec : config_.agents) {
    if (spec.name.empty()) throw ConfigError("agent with empty id");
    if (!names.insert(spec.name).second) throw ConfigError("duplicate agent id: " + spec.name);
    if (spec.start < 0 || spec.start >= env_->vertex_count()) {
      throw ConfigError("agent " + spec.name + " has an invalid start vertex");
    }
    try {
      env_->run_word(spec.start, spec.plan);
    } catch (const NoSuchEdge& e) {
      throw ConfigError("agent " + spec.name + " has an ill-formed plan: " + e.what());
    }
    starts.push_back(spec.start);
  }
  Occupancy occ = Occupancy::from_positions(starts);
  if (auto bad = phi_.check(occ)) {
    throw ConfigError("start positions violate " + phi_.name() + " at vertex " +
                      env_->vertex_name(bad->vertex));
  }

  agents_.reserve(static_cast<size_t>(n));
  for (int u = 0; u < n; ++u) {
    AgentRuntime a{starts[static_cast<size_t>(u)],
                   PlanCursor::begin(*env_, starts[static_cast<size_t>(u)],
                                     config_.agents[static_cast<size_t>(u)].plan,
                                     config_.lookahead),
                   "", true, 0};
    a.word = a.cursor.current_block.word;
    a.block_open = !a.cursor.exhausted();
    agents_.push_back(std::move(a));
    initial_rank_.push_back(u);
  }

  result_.metrics.deviation.assign(static_cast<size_t>(n), 0);
  result_.metrics.pathfinder_calls.assign(static_cast<size_t>(n), 0);
  result_.metrics.escape_count.assign(static_cast<size_t>(n), 0);
  result_.metrics.deviation_bound = n * n * config_.lookahead;
  result_.executed.assign(static_cast<size_t>(n), "");
}

bool Simulator::goal_reached(const AgentRuntime& a) const {
  return !a.cursor.exhausted() && a.word.empty() && a.pos == a.cursor.block_goal;
}

void Simulator::begin_tick(StepRecord& rec) {
  const int n = static_cast<int>(agents_.size());
  std::vector<VertexId> pos(static_cast<size_t>(n));
  for (int u = 0; u < n; ++u) pos[static_cast<size_t>(u)] = agents_[static_cast<size_t>(u)].pos;
  groups_ = comm_groups(*env_, pos, config_.resolved_comm_dist());
  rec.groups.clear();
  for (const CommGroup& g : groups_) rec.groups.push_back(g.members);

  std::uint64_t goal_mask = 0;
  for (AgentId u = 0; u < n; ++u) {
    AgentRuntime& a = agents_[static_cast<size_t>(u)];
    if (goal_reached(a)) {
      rec.events.push_back(GoalEvent{u});
      int block_len = static_cast<int>(a.cursor.current_block.word.size());
      int dev = (tick_ - a.block_activated) - block_len;
      result_.metrics.blocks.push_back(
          {u, static_cast<int>(a.cursor.block_index), block_len, a.block_activated, tick_});
      result_.metrics.deviation[static_cast<size_t>(u)] += dev;
      result_.metrics.max_block_deviation = std::max(result_.metrics.max_block_deviation, dev);
      a.cursor = a.cursor.advanced(*env_);
      if (!a.cursor.exhausted()) {
        a.word = a.cursor.current_block.word;
        a.block_activated = tick_;
        a.block_open = true;
        rec.events.push_back(BlockAdvanceEvent{u, static_cast<int>(a.cursor.block_index)});
      } else {
        a.word.clear();
        a.block_open = false;
      }
      goal_mask |= std::uint64_t{1} << u;
    } else if (a.cursor.exhausted()) {
      // Exhausted plans keep the goal flag: the agent stays a maximally
      // yielding, lowest-priority donor.
      goal_mask |= std::uint64_t{1} << u;
    }
  }

  std::vector<std::uint64_t> group_mask_of(static_cast<size_t>(n), 0);
  for (const CommGroup& g : groups_) {
    std::uint64_t m = g.mask();
    for (AgentId u : g.members) group_mask_of[static_cast<size_t>(u)] = m;
  }
  OrderingEvents oe;
  oe.flag_set = [&rec](AgentId owner, AgentId other) {
    rec.events.push_back(FlagSetEvent{owner, other});
  };
  oe.flag_reset = [&rec](AgentId a, AgentId b) { rec.events.push_back(FlagResetEvent{a, b}); };
  ordering_.tick_update(group_mask_of, goal_mask, &oe);
}

void Simulator::enforce_groups(StepRecord& rec) {
  const int n = static_cast<int>(agents_.size());
  std::vector<VertexId> pos(static_cast<size_t>(n));
  for (int u = 0; u < n; ++u) pos[static_cast<size_t>(u)] = agents_[static_cast<size_t>(u)].pos;

  struct GroupWork {
    const CommGroup* group = nullptr;
    PriorityOrder order;
    JointWindow window;
    ReservationTable table{0, 0};
    GroupEnforceResult outcome;
    std::vector<Event> events;
    std::int64_t wall_ns = 0;
    std::optional<std::mt19937_64> rng;
  };

  std::vector<GroupWork> work(groups_.size());
  for (size_t gi = 0; gi < groups_.size(); ++gi) {
    GroupWork& w = work[gi];
    w.group = &groups_[gi];
    w.order = total_order(*w.group, ordering_, initial_rank_);
    w.table = ReservationTable(n, config_.lookahead + config_.deviation_k);
    for (AgentId u : w.group->members) {
      const AgentRuntime& a = agents_[static_cast<size_t>(u)];
      w.window.entries.push_back(
          {u, w.order.rank(u), a.pos, a.word, a.cursor.block_goal});
      w.table.commit(*env_, u, a.pos, a.word);
    }
    std::sort(w.window.entries.begin(), w.window.entries.end(),
              [](const WindowEntry& x, const WindowEntry& y) { return x.rank < y.rank; });
    if (config_.randomized_fallback) {
      std::uint64_t s = config_.seed;
      s = s * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(tick_) + 1;
      s = s * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(w.group->id()) + 1;
      w.rng.emplace(s);
    }
  }

  auto run_one = [&](GroupWork& w) {
    std::uint64_t repair = 0;
    for (AgentId u : w.group->members) {
      const AgentRuntime& a = agents_[static_cast<size_t>(u)];
      if (!a.cursor.exhausted() && a.word.empty() && a.pos != a.cursor.block_goal) {
        repair |= std::uint64_t{1} << u;
      }
    }
    EnforceEvents sink;
    sink.replan = [&w](AgentId agent, PathResult::Kind kind, const std::string& old_word,
                       const std::string& new_word, int expanded, int reserved,
                       std::int64_t wall_ns, bool is_repair) {
      w.events.push_back(
          ReplanEvent{agent, kind, old_word, new_word, expanded, reserved, wall_ns, is_repair});
    };
    sink.forced = [&w](AgentId agent, char action) {
      w.events.push_back(ForcedEvent{agent, action});
    };
    GroupEnforceContext ctx;
    ctx.env = env_;
    ctx.phi = &phi_;
    ctx.lookahead = config_.lookahead;
    ctx.k = config_.deviation_k;
    ctx.positions = pos;
    ctx.members = &w.group->members;
    ctx.order = &w.order;
    ctx.repair_mask = repair;
    ctx.ordering = &ordering_;
    ctx.rng = w.rng ? &*w.rng : nullptr;
    ctx.events = &sink;
    auto t0 = std::chrono::steady_clock::now();
    w.outcome = enforce_group(ctx, w.window, w.table);
    auto t1 = std::chrono::steady_clock::now();
    w.wall_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count();
  };

  if (config_.parallel_groups && work.size() > 1) {
    std::vector<std::future<void>> futures;
    futures.reserve(work.size());
    for (GroupWork& w : work) {
      futures.push_back(std::async(std::launch::async, run_one, std::ref(w)));
    }
    for (auto& f : futures) f.get();
  } else {
    for (GroupWork& w : work) run_one(w);
  }

  for (GroupWork& w : work) {
    for (const WindowEntry& e : w.window.entries) {
      agents_[static_cast<size_t>(e.agent)].word = e.word;
    }
    for (const Event& e : w.events) {
      if (const auto* r = std::get_if<ReplanEvent>(&e)) {
        result_.metrics.pathfinder_calls[static_cast<size_t>(r->agent)] += 1;
        if (r->result == PathResult::Kind::Escape) {
          result_.metrics.escape_count[static_cast<size_t>(r->agent)] += 1;
        }
        result_.metrics.calls.push_back(
            {tick_, r->agent, r->result, r->expanded, r->reserved, r->wall_ns});
      }
      rec.events.push_back(e);
    }
    result_.metrics.total_pathfinder_calls += w.outcome.pathfinder_calls;
    result_.metrics.call_wall_ns.insert(result_.metrics.call_wall_ns.end(),
                                        w.outcome.call_wall_ns.begin(),
                                        w.outcome.call_wall_ns.end());
    result_.metrics.max_future_reservations =
        std::max(result_.metrics.max_future_reservations, w.outcome.max_future_reservations);
    if (w.outcome.top_entry_modified) result_.metrics.top_modified_rounds += 1;
    if (w.outcome.round_replanned != 0) result_.metrics.round_count += 1;
    if (w.outcome.pathfinder_calls > 0) {
      result_.metrics.rounds.push_back(
          {w.wall_ns, static_cast<int>(w.group->members.size()), w.outcome.pathfinder_calls});
    }
    if (!w.outcome.abort_reason.empty() && result_.abort_reason.empty()) {
      result_.abort_reason = w.outcome.abort_reason;
      rec.events.push_back(DiagnosticEvent{w.outcome.abort_reason});
    } else if (w.outcome.unresolved && result_.abort_reason.empty()) {
      result_.abort_reason = "unresolved violation at the next instant in group " +
                             std::to_string(w.group->id());
      rec.events.push_back(DiagnosticEvent{result_.abort_reason});
    }
  }
}

bool Simulator::execute(StepRecord& rec) {
  const int n = static_cast<int>(agents_.size());
  std::vector<VertexId> old_pos(static_cast<size_t>(n)), new_pos(static_cast<size_t>(n));
  rec.acts.assign(static_cast<size_t>(n), env_->idle_action());
  for (AgentId u = 0; u < n; ++u) {
    AgentRuntime& a = agents_[static_cast<size_t>(u)];
    old_pos[static_cast<size_t>(u)] = a.pos;
    char act = env_->idle_action();
    if (!a.word.empty()) {
      act = a.word.front();
      a.word.erase(0, 1);
    }
    rec.acts[static_cast<size_t>(u)] = act;
    auto to = env_->try_step(a.pos, act);
    if (!to) {
      result_.abort_reason = "engine error: invalid action committed for agent " +
                             config_.agents[static_cast<size_t>(u)].name;
      rec.events.push_back(DiagnosticEvent{result_.abort_reason});
      return false;
    }
    new_pos[static_cast<size_t>(u)] = *to;
    result_.executed[static_cast<size_t>(u)].push_back(act);
  }

  Occupancy prev = Occupancy::from_positions(old_pos);
  Occupancy next = Occupancy::from_positions(new_pos);
  auto bad = phi_.check(next);
  if (!bad) bad = phi_.check_transition(prev, next);
  if (bad) {
    result_.abort_reason =
        "engine error: safety violated after the step at vertex " + env_->vertex_name(bad->vertex);
    rec.events.push_back(DiagnosticEvent{result_.abort_reason});
    return false;
  }
  for (AgentId u = 0; u < n; ++u) {
    agents_[static_cast<size_t>(u)].pos = new_pos[static_cast<size_t>(u)];
  }
  return true;
}

RunResult Simulator::run() {
  for (;;) {
    if (tick_ >= config_.max_ticks) {
      result_.status = RunStatus::MaxTicks;
      break;
    }
    StepRecord rec;
    rec.tick = tick_;
    rec.positions.reserve(agents_.size());
    for (const AgentRuntime& a : agents_) rec.positions.push_back(a.pos);

    begin_tick(rec);

    bool all_done = true;
    for (const AgentRuntime& a : agents_) {
      if (!a.cursor.exhausted() || !a.word.empty()) {
        all_done = false;
        break;
      }
    }
    if (all_done) {
      result_.trace.push_back(std::move(rec));
      result_.status = RunStatus::Completed;
      break;
    }

    enforce_groups(rec);
    if (!result_.abort_reason.empty()) {
      result_.trace.push_back(std::move(rec));
      result_.status = RunStatus::Aborted;
      break;
    }
    if (!execute(rec)) {
      result_.trace.push_back(std::move(rec));
      result_.status = RunStatus::Aborted;
      break;
    }
    result_.trace.push_back(std::move(rec));
    ++tick_;
  }

  result_.ticks = result_.trace.empty() ? 0 : result_.trace.back().tick;
  for (AgentId u = 0; u < static_cast<AgentId>(agents_.size()); ++u) {
    const AgentRuntime& a = agents_[static_cast<size_t>(u)];
    if (a.block_open && !a.cursor.exhausted()) {
      result_.metrics.blocks.push_back({u, static_cast<int>(a.cursor.block_index),
                                        static_cast<int>(a.cursor.current_block.word.size()),
                                        a.block_activated, -1});
    }
  }
  return std::move(result_);
}

std::vector<AgentSpec> gen_random_plans(std::uint64_t seed, const Environment& env, int n_agents,
                                        int length, int lookahead_for_clearing,
                                        bool clearable_goals) {
  if (n_agents > env.vertex_count()) {
    throw TooManyAgents("more agents than vertices: " + std::to_string(n_agents));
  }
  if (n_agents > kMaxAgents) throw TooManyAgents("at most 64 agents are supported");
  std::mt19937_64 rng(seed);
  auto draw = [&rng](std::uint64_t bound) { return static_cast<size_t>(rng() % bound); };

  std::vector<VertexId> cells(static_cast<size_t>(env.vertex_count()));
  for (size_t i = 0; i < cells.size(); ++i) cells[i] = static_cast<VertexId>(i);
  for (size_t i = 0; i < static_cast<size_t>(n_agents); ++i) {
    size_t j = i + draw(cells.size() - i);
    std::swap(cells[i], cells[j]);
  }

  auto random_walk = [&](VertexId from) {
    std::string word;
    VertexId v = from;
    for (int s = 0; s < length; ++s) {
      auto edges = env.edges_from(v);
      const auto& e = edges[draw(edges.size())];
      word.push_back(e.action);
      v = e.to;
    }
    return word;
  };
  auto block_goals = [&](VertexId start, const std::string& word) {
    std::set<VertexId> goals;
    int ell = lookahead_for_clearing > 0 ? lookahead_for_clearing : length;
    VertexId v = start;
    for (size_t i = 0; i < word.size(); ++i) {
      v = env.step(v, word[i]);
      if ((i + 1) % static_cast<size_t>(ell) == 0 || i + 1 == word.size()) goals.insert(v);
    }
    if (word.empty()) goals.insert(start);
    return goals;
  };

  std::vector<AgentSpec> specs;
  std::vector<VertexId> finals;
  std::vector<std::set<VertexId>> goal_sets;
  for (int i = 0; i < n_agents; ++i) {
    VertexId start = cells[static_cast<size_t>(i)];
    std::string plan;
    for (int attempt = 0;; ++attempt) {
      plan = random_walk(start);
      if (!clearable_goals) break;
      VertexId fin = env.run_word(start, plan);
      auto goals = block_goals(start, plan);
      bool ok = true;
      for (int j = 0; j < i && ok; ++j) {
        if (fin == finals[static_cast<size_t>(j)]) ok = false;
        if (goal_sets[static_cast<size_t>(j)].contains(fin)) ok = false;
        if (goals.contains(finals[static_cast<size_t>(j)])) ok = false;
      }
      if (ok) break;
      if (attempt > 500) {
        throw TooManyAgents("could not place clearable goals for agent " + std::to_string(i));
      }
    }
    finals.push_back(env.run_word(start, plan));
    goal_sets.push_back(block_goals(start, plan));
    specs.push_back({"a" + std::to_string(i), start, plan});
  }
  return specs;
}

}  // namespace mas
