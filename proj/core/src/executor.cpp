#include "grappa/executor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "grappa/errors.hpp"
#include "grappa/rng.hpp"
#include "grappa/scores.hpp"

namespace grappa {
namespace {

// Fills the guidance-dependent parts of a trace when evaluation fails.
void apply_fallback(step_trace& trace, const score_vector& base_probs,
                    const guidance_context& ctx, const std::string& reason) {
  trace.fallback = true;
  trace.fallback_reason = reason;
  trace.guidance_raw.clear();
  trace.guidance_probs.clear();
  if (ctx.fallback == fallback_mode::uniform_guidance) {
    score_vector ones(base_probs.size(), 1.0);
    trace.guidance_probs = normalize_scores(ones);
    trace.combined = combine_distributions(base_probs, trace.guidance_probs, ctx.alpha);
  } else {
    trace.combined = base_probs;
  }
}

}  // namespace

score_vector combine_distributions(const score_vector& base_probs,
                                   const score_vector& guidance_probs,
                                   double alpha) {
  if (base_probs.size() != guidance_probs.size()) {
    throw length_mismatch_error(base_probs.size(), guidance_probs.size());
  }
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw config_error("alpha must be in [0, 1]");
  }
  score_vector out(base_probs.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (1.0 - alpha) * base_probs[i] + alpha * guidance_probs[i];
  }
  return out;
}

guided_step_result guided_step(const policy_interface& policy,
                               const observation& obs,
                               const robot_state& state,
                               const hidden_state& hidden,
                               const guidance_context& ctx,
                               const gsl::perception_fn& perception,
                               std::uint64_t step_seed) {
  if (ctx.samples <= 0) throw config_error("samples must be positive");

  guided_step_result result;
  step_trace& trace = result.trace;
  trace.step = obs.step;
  trace.state = state;
  trace.hidden_before = hidden;
  result.next_hidden = hidden;

  trace.candidates = policy.sample_actions(obs, state, ctx.samples, step_seed);
  trace.base_raw = policy.action_probabilities(obs, state, trace.candidates);
  trace.base_probs = normalize_scores(trace.base_raw);

  if (!ctx.program) {
    trace.combined = trace.base_probs;
    trace.chosen = select_best(trace.combined);
    trace.action = trace.candidates[trace.chosen];
    trace.hidden_after = result.next_hidden;
    return result;
  }

  std::vector<robot_state> forecasts = ctx.dynamics.forecast_all(state, trace.candidates);
  std::vector<hidden_state> next_hiddens(forecasts.size());
  try {
    trace.guidance_raw.resize(forecasts.size());
    for (std::size_t i = 0; i < forecasts.size(); ++i) {
      gsl::eval_outcome out = gsl::evaluate(*ctx.program, forecasts[i], hidden,
                                            perception, ctx.budget);
      trace.guidance_raw[i] = out.score;
      next_hiddens[i] = std::move(out.next_hidden);
    }
    trace.guidance_probs = normalize_scores(trace.guidance_raw);
    trace.combined = combine_distributions(trace.base_probs, trace.guidance_probs, ctx.alpha);
  } catch (const perception_lost_error&) {
    apply_fallback(trace, trace.base_probs, ctx, "perception");
  } catch (const not_tracked_error&) {
    apply_fallback(trace, trace.base_probs, ctx, "perception");
  } catch (const gsl::budget_exceeded_error&) {
    apply_fallback(trace, trace.base_probs, ctx, "budget");
  }

  trace.chosen = select_best(trace.combined);
  trace.action = trace.candidates[trace.chosen];
  if (!trace.fallback) result.next_hidden = std::move(next_hiddens[trace.chosen]);
  trace.hidden_after = result.next_hidden;
  return result;
}

episode_log run_episode(const simulator& sim,
                        const policy_interface& policy,
                        const guidance_context& ctx,
                        std::uint64_t seed) {
  episode_log log;
  log.task_id = sim.spec().id;
  log.seed = seed;
  log.guidance_version =
      ctx.program ? guidance_version_string(
                        ctx.guidance_label.empty() ? "guidance" : ctx.guidance_label,
                        ctx.program->source)
                  : "none";

  sim_state st = sim.reset(seed);

  track_registry tracks;
  detector_config det_cfg = ctx.detector;
  det_cfg.seed = derive_seed(seed, 0x64657465637400ull);
  detector det(det_cfg);
  rng dropout_rng(derive_seed(seed, 0x64726f706f7574ull));

  hidden_state hidden;
  if (ctx.program) {
    hidden = ctx.program->default_hidden;
    // Ground every object the script names before the first step.
    observation first = sim.observe(st);
    for (const auto& name : collect_object_names(*ctx.program)) {
      thesaurus_entry entry;
      auto it = sim.spec().synonyms_table.find(normalize_object_name(name));
      if (it != sim.spec().synonyms_table.end()) entry = it->second;
      multi_granular_search(det, tracks, *first.snapshot, name, entry.synonyms,
                            entry.parents, ctx.search);
    }
  }

  int perception_fallbacks = 0;
  while (true) {
    observation obs = sim.observe(st);
    auto scene = obs.snapshot;
    gsl::perception_fn binding = [&tracks, scene](geometry_kind kind,
                                                  const std::string& name) {
      return query_object_geometry(tracks, *scene, name, kind);
    };

    guided_step_result step = guided_step(policy, obs, st.ee, hidden, ctx,
                                          binding, derive_seed(seed, st.step_count));
    sim.step(st, step.trace.action);

    hidden_state next_hidden = step.next_hidden;
    if (ctx.program && !step.trace.fallback) {
      robot_state forecast = ctx.dynamics.forecast(step.trace.state, step.trace.action);
      if (distance(st.ee, forecast) > 1e-9) {
        // The environment did not land where the forecast said; recompute the
        // hidden update at the realized state so progress flags stay honest.
        try {
          gsl::eval_outcome out =
              gsl::evaluate(*ctx.program, st.ee, hidden, binding, ctx.budget);
          next_hidden = std::move(out.next_hidden);
        } catch (const error&) {
          next_hidden = hidden;  // keep the previous hidden on re-eval failure
        }
      }
    }
    hidden = std::move(next_hidden);
    step.trace.hidden_after = hidden;
    if (step.trace.fallback && step.trace.fallback_reason == "perception") {
      ++perception_fallbacks;
    }
    log.steps.push_back(std::move(step.trace));

    if (ctx.dropout_rate > 0.0) tracks.advance_step(ctx.dropout_rate, dropout_rng);

    simulator::outcome out = sim.check(st);
    if (out.success) {
      log.success = true;
      log.failure = failure_class::none;
      break;
    }
    if (sim.order_violated(st)) {
      log.success = false;
      log.failure = failure_class::behavior;
      break;
    }
    if (st.step_count >= sim.spec().workspace.timeout) {
      log.success = false;
      log.failure = out.failure;
      break;
    }
  }

  if (!log.success && !log.steps.empty() &&
      perception_fallbacks * 2 > static_cast<int>(log.steps.size())) {
    log.failure = failure_class::perception;
  }
  log.final_state = st.ee;
  return log;
}

robot_state replay_episode(const simulator& sim, const episode_log& log) {
  sim_state st = sim.reset(log.seed);
  for (const auto& step : log.steps) {
    sim.step(st, step.action);
  }
  return st.ee;
}

std::array<double, 2> heatmap_result::argmax_xy() const {
  double cx = grid.x0 + (argmax_ix + 0.5) * (grid.x1 - grid.x0) / grid.nx;
  double cy = grid.y0 + (argmax_iy + 0.5) * (grid.y1 - grid.y0) / grid.ny;
  return {cx, cy};
}

heatmap_result compute_heatmap(const policy_interface& policy,
                               const observation& obs,
                               const robot_state& state,
                               const hidden_state& hidden,
                               const guidance_context& ctx,
                               const gsl::perception_fn& perception,
                               const heatmap_grid& grid) {
  if (grid.nx <= 0 || grid.ny <= 0) throw config_error("heatmap grid must be positive");
  heatmap_result result;
  result.grid = grid;

  std::vector<robot_state> candidates;
  candidates.reserve(static_cast<std::size_t>(grid.nx) * grid.ny);
  for (int iy = 0; iy < grid.ny; ++iy) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      robot_state c = state;
      c.position[0] = grid.x0 + (ix + 0.5) * (grid.x1 - grid.x0) / grid.nx;
      c.position[1] = grid.y0 + (iy + 0.5) * (grid.y1 - grid.y0) / grid.ny;
      c.position[2] = grid.z;
      candidates.push_back(c);
    }
  }

  score_vector base_raw = policy.action_probabilities(obs, state, candidates);
  result.base = normalize_scores(base_raw);

  if (ctx.program) {
    std::vector<robot_state> forecasts = ctx.dynamics.forecast_all(state, candidates);
    score_vector g_raw(forecasts.size());
    for (std::size_t i = 0; i < forecasts.size(); ++i) {
      g_raw[i] = gsl::evaluate(*ctx.program, forecasts[i], hidden, perception,
                               ctx.budget)
                     .score;
    }
    result.guidance = normalize_scores(g_raw);
    result.combined = combine_distributions(result.base, result.guidance, ctx.alpha);
  } else {
    result.combined = result.base;
  }

  std::size_t best = select_best(result.combined);
  result.argmax_ix = static_cast<int>(best % grid.nx);
  result.argmax_iy = static_cast<int>(best / grid.nx);
  return result;
}

void write_heatmap_csv(const heatmap_result& result, std::ostream& out) {
  char buf[64];
  const heatmap_grid& g = result.grid;
  out << "y\\x";
  for (int ix = 0; ix < g.nx; ++ix) {
    std::snprintf(buf, sizeof buf, "%.10g", g.x0 + (ix + 0.5) * (g.x1 - g.x0) / g.nx);
    out << "," << buf;
  }
  out << "\n";
  for (int iy = 0; iy < g.ny; ++iy) {
    std::snprintf(buf, sizeof buf, "%.10g", g.y0 + (iy + 0.5) * (g.y1 - g.y0) / g.ny);
    out << buf;
    for (int ix = 0; ix < g.nx; ++ix) {
      std::snprintf(buf, sizeof buf, "%.10g",
                    result.combined[static_cast<std::size_t>(iy) * g.nx + ix]);
      out << "," << buf;
    }
    out << "\n";
  }
}

namespace {

// Which params of each user function flow into a perception builtin's name
// argument (directly or through further user calls).  Strings in scripts have
// no operators, so any name that reaches perception is a literal at some call
// site; propagating param positions to a fixpoint recovers them all.
using forward_map = std::map<std::string, std::set<std::size_t>>;

bool is_perception_callee(const std::string& name) {
  return name == "get_position" || name == "get_size" ||
         name == "get_orientation";
}

struct name_collector {
  const gsl::program& prog;
  forward_map forwarded;
  std::vector<std::string> out;
  std::set<std::string> seen;

  const gsl::fn_decl* current = nullptr;
  bool changed = false;

  std::optional<std::size_t> param_index(const std::string& ident) const {
    if (current == nullptr) return std::nullopt;
    for (std::size_t i = 0; i < current->params.size(); ++i) {
      if (current->params[i].name == ident) return i;
    }
    return std::nullopt;
  }

  void mark_forwarded(std::size_t index) {
    if (forwarded[current->name].insert(index).second) changed = true;
  }

  void note_call(const gsl::call_expr& call, bool record) {
    std::set<std::size_t> positions;
    if (is_perception_callee(call.callee) && call.args.size() == 1) {
      positions.insert(0);
    } else if (auto it = forwarded.find(call.callee); it != forwarded.end()) {
      positions = it->second;
    }
    for (std::size_t pos : positions) {
      if (pos >= call.args.size()) continue;
      const gsl::expr& arg = *call.args[pos];
      if (const auto* lit = std::get_if<gsl::string_lit>(&arg.node)) {
        if (record && seen.insert(normalize_object_name(lit->value)).second) {
          out.push_back(lit->value);
        }
      } else if (const auto* id = std::get_if<gsl::identifier>(&arg.node)) {
        if (auto idx = param_index(id->name)) mark_forwarded(*idx);
      }
    }
  }

  void walk(const gsl::expr& e, bool record) {
    std::visit(
        [&](const auto& node) {
          using T = std::decay_t<decltype(node)>;
          if constexpr (std::is_same_v<T, gsl::vector_lit>) {
            for (const auto& item : node.items) walk(*item, record);
          } else if constexpr (std::is_same_v<T, gsl::map_lit>) {
            for (const auto& [k, v] : node.entries) walk(*v, record);
          } else if constexpr (std::is_same_v<T, gsl::unary_expr>) {
            walk(*node.operand, record);
          } else if constexpr (std::is_same_v<T, gsl::binary_expr>) {
            walk(*node.lhs, record);
            walk(*node.rhs, record);
          } else if constexpr (std::is_same_v<T, gsl::index_expr>) {
            walk(*node.object, record);
            walk(*node.index, record);
          } else if constexpr (std::is_same_v<T, gsl::slice_expr>) {
            walk(*node.object, record);
            walk(*node.lo, record);
            walk(*node.hi, record);
          } else if constexpr (std::is_same_v<T, gsl::call_expr>) {
            note_call(node, record);
            for (const auto& arg : node.args) walk(*arg, record);
          }
        },
        e.node);
  }

  void walk(const gsl::block& b, bool record) {
    for (const auto& sp : b.stmts) {
      std::visit(
          [&](const auto& node) {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, gsl::let_stmt>) {
              walk(*node.value, record);
            } else if constexpr (std::is_same_v<T, gsl::assign_stmt>) {
              walk(*node.target, record);
              walk(*node.value, record);
            } else if constexpr (std::is_same_v<T, gsl::if_stmt>) {
              walk(*node.cond, record);
              walk(node.then_body, record);
              if (node.else_body) walk(*node.else_body, record);
            } else if constexpr (std::is_same_v<T, gsl::for_stmt>) {
              walk(*node.iterable, record);
              walk(node.body, record);
            } else if constexpr (std::is_same_v<T, gsl::return_stmt>) {
              if (node.value) walk(*node.value, record);
              if (node.second) walk(*node.second, record);
            } else if constexpr (std::is_same_v<T, gsl::expr_stmt>) {
              walk(*node.value, record);
            }
          },
          sp->node);
    }
  }

  void pass(bool record) {
    for (const auto& fn : prog.functions) {
      current = &fn;
      for (const auto& p : fn.params) {
        if (p.default_value) walk(*p.default_value, record);
      }
      walk(fn.body, record);
    }
    current = nullptr;
  }

  void run() {
    do {
      changed = false;
      pass(false);
    } while (changed);
    pass(true);
  }
};

}  // namespace

std::vector<std::string> collect_object_names(const gsl::program& prog) {
  name_collector collector{prog};
  collector.run();
  return std::move(collector.out);
}

}  // namespace grappa
