#include "grappa/agents/improve.hpp"

#include "grappa/rng.hpp"

namespace grappa {

improve_result improve_guidance(simulator& sim,
                                const policy_interface& policy,
                                const guidance_context& ctx_template,
                                chat_backend& backend,
                                const agent_prompts& prompts,
                                const improve_config& cfg) {
  if (cfg.iterations <= 0) throw config_error("improve: iterations must be positive");
  if (cfg.seeds.empty()) throw config_error("improve: need at least one seed");

  improve_result result;
  std::vector<chat_message> feedback_context;

  conversation_config conv = cfg.conversation;
  if (conv.probes.empty()) {
    conv.probes = gsl::default_probe_states(sim.spec().workspace.bounds);
  }
  if (conv.known_objects.empty()) {
    for (const auto& obj : sim.spec().objects) conv.known_objects.push_back(obj.name);
  }

  for (int iter = 0; iter < cfg.iterations; ++iter) {
    // Fresh grounding state per conversation; the scene comes from the first
    // evaluation seed so the agents see what the episodes will see.
    sim_state probe_state = sim.reset(cfg.seeds.front());
    observation obs = sim.observe(probe_state);
    detector_config det_cfg = ctx_template.detector;
    det_cfg.seed = derive_seed(cfg.seeds.front(), 0x636f6e766572736full);
    detector det(det_cfg);
    track_registry tracks;

    guidance_generation gen = generate_guidance_function(
        sim.spec().instruction, *obs.snapshot, det, tracks,
        sim.spec().synonyms_table, backend, prompts, conv, feedback_context);

    iteration_record record;
    record.iteration = iter;
    record.guidance_source = gen.source;
    record.artifacts = std::move(gen.artifacts);

    guidance_context ctx = ctx_template;
    ctx.program = gen.program;
    ctx.guidance_label = "iter" + std::to_string(iter);
    record.guidance_version = guidance_version_string(ctx.guidance_label, gen.source);

    std::size_t successes = 0;
    const episode_log* first_failure = nullptr;
    for (std::uint64_t seed : cfg.seeds) {
      record.episodes.push_back(run_episode(sim, policy, ctx, seed));
      if (record.episodes.back().success) ++successes;
    }
    for (const auto& ep : record.episodes) {
      if (!ep.success) {
        first_failure = &ep;
        break;
      }
    }
    record.success_rate = static_cast<double>(successes) / cfg.seeds.size();

    bool all_succeeded = successes == cfg.seeds.size();
    bool last_iteration = iter + 1 == cfg.iterations;
    if (!all_succeeded && !last_iteration && first_failure != nullptr) {
      record.feedback = monitor_feedback(*first_failure, record.guidance_source,
                                         backend, prompts, cfg.keyframes);
      feedback_context.push_back(
          {"user", "monitor feedback on the previous attempt:\n" + record.feedback});
    }

    if (record.success_rate >= result.best_rate) {  // >= lets refinements win ties
      result.best_rate = record.success_rate;
      result.best_source = record.guidance_source;
      result.best_iteration = iter;
    }
    result.iterations.push_back(std::move(record));
    if (all_succeeded) break;
  }
  return result;
}

}  // namespace grappa
