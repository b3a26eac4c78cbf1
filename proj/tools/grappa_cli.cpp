// Command-line front end: run guided episodes, drive the improvement loop,
// validate guidance scripts, render policy heatmaps, and aggregate results.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "grappa/agents/improve.hpp"
#include "grappa/config.hpp"
#include "grappa/executor.hpp"
#include "grappa/gsl/parser.hpp"
#include "grappa/gsl/validate.hpp"
#include "grappa/rng.hpp"

namespace fs = std::filesystem;
using namespace grappa;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitConfig = 2;
constexpr int kExitBackend = 3;

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct cli_options {
  std::string config_path;
  std::string task_path;
  std::string policy = "random";
  double alpha = 0.0;
  int samples = 16;
  std::string guidance_path;
  std::string seeds = "0";
  std::string out_dir = "out";
  std::string detail = "scores";
  std::string dynamics = "clamped";
  std::string fallback = "base";
  double dropout = 0.0;
  double fn_rate = 0.0;
  double fp_rate = 0.0;
  std::vector<double> expert_bias;
  double expert_noise = 0.0;
  double sigma_pos = 0.05;
  double sigma_rot = 15.0;
  double sigma_grip = 0.01;

  std::string backend = "scripted";
  std::string transcript;
  std::string url;
  std::string model;
  std::string prompts_dir = "prompts";
  int iterations = 5;

  std::string log_path;                  // replay
  std::vector<std::string> report_inputs;
  std::string report_out = "report.csv";
  int nx = 32, ny = 32;
  double z = std::numeric_limits<double>::quiet_NaN();
  std::string heatmap_out = "heatmap.csv";
};

// Config-file values fill in anything the command line left at its default.
void overlay_config(cli_options& opt, const CLI::App& cmd) {
  if (opt.config_path.empty()) return;
  config_file cfg = config_file::parse_file(opt.config_path);
  auto defaulted = [&](const std::string& flag) {
    const CLI::Option* o = cmd.get_option_no_throw(flag);
    return o != nullptr && o->count() == 0;
  };
  auto str = [&](const char* flag, const char* sec, const char* key, std::string& out) {
    if (defaulted(flag) && cfg.has(sec, key)) out = cfg.get_string(sec, key);
  };
  auto num = [&](const char* flag, const char* sec, const char* key, auto& out) {
    if (defaulted(flag) && cfg.has(sec, key)) {
      out = static_cast<std::decay_t<decltype(out)>>(cfg.get_number(sec, key, out));
    }
  };
  str("--task", "run", "task", opt.task_path);
  str("--policy", "run", "policy", opt.policy);
  num("--alpha", "run", "alpha", opt.alpha);
  num("--samples", "run", "samples", opt.samples);
  str("--guidance", "run", "guidance", opt.guidance_path);
  str("--seeds", "run", "seeds", opt.seeds);
  str("--out", "run", "out", opt.out_dir);
  str("--detail", "run", "detail", opt.detail);
  str("--dynamics", "dynamics", "mode", opt.dynamics);
  str("--fallback", "run", "fallback", opt.fallback);
  num("--dropout", "detector", "dropout", opt.dropout);
  num("--fn-rate", "detector", "false_negative_rate", opt.fn_rate);
  num("--fp-rate", "detector", "false_positive_rate", opt.fp_rate);
  num("--expert-noise", "policy", "expert_noise", opt.expert_noise);
  num("--sigma-pos", "policy", "sigma_pos", opt.sigma_pos);
  num("--sigma-rot", "policy", "sigma_rot", opt.sigma_rot);
  num("--sigma-grip", "policy", "sigma_grip", opt.sigma_grip);
  if (opt.expert_bias.empty() && cfg.has("policy", "expert_bias")) {
    opt.expert_bias = cfg.get_number_list("policy", "expert_bias");
  }
  str("--backend", "backend", "kind", opt.backend);
  str("--transcript", "backend", "transcript", opt.transcript);
  str("--url", "backend", "url", opt.url);
  str("--model", "backend", "model", opt.model);
  str("--prompts", "agents", "prompts_dir", opt.prompts_dir);
  num("--iterations", "improve", "iterations", opt.iterations);
}

std::unique_ptr<policy_interface> make_policy(const cli_options& opt,
                                              const task_spec& task) {
  if (opt.policy == "random") {
    return std::make_unique<random_policy>(task.workspace.bounds);
  }
  if (opt.policy == "gaussian") {
    expert_config expert;
    expert.press_order = task.press_order;
    expert.target_object = task.target_object;
    expert.block_object = task.block_object;
    expert.zone_object = task.zone_object;
    expert.noise = opt.expert_noise;
    if (!opt.expert_bias.empty()) {
      if (opt.expert_bias.size() != 3) throw config_error("--expert-bias needs 3 numbers");
      expert.bias = {opt.expert_bias[0], opt.expert_bias[1], opt.expert_bias[2]};
    }
    gaussian_regression_policy::params params{opt.sigma_pos, opt.sigma_rot,
                                               opt.sigma_grip};
    return std::make_unique<gaussian_regression_policy>(make_scripted_expert(expert),
                                                        params);
  }
  if (opt.policy == "waypoint") {
    // One proposal hovering at each object's top center, equal weights.
    std::vector<std::array<double, 3>> proposals;
    for (const auto& obj : task.objects) {
      std::array<double, 3> p = obj.pose;
      p[2] += obj.size[0] / 2.0 + 0.02;
      proposals.push_back(p);
    }
    if (proposals.empty()) throw config_error("waypoint policy needs task objects");
    score_vector weights(proposals.size(), 1.0);
    return std::make_unique<sampled_waypoint_policy>(proposals, weights,
                                                     task.home.orientation,
                                                     task.home.gripper);
  }
  throw config_error("unknown policy: " + opt.policy);
}

log_detail parse_detail(const std::string& s) {
  if (s == "minimal") return log_detail::minimal;
  if (s == "scores") return log_detail::scores;
  if (s == "full") return log_detail::full;
  throw config_error("unknown detail level: " + s);
}

guidance_context make_context(const cli_options& opt, const task_spec& task) {
  guidance_context ctx;
  ctx.alpha = opt.alpha;
  ctx.samples = opt.samples;
  ctx.detail = parse_detail(opt.detail);
  ctx.dropout_rate = opt.dropout;
  ctx.detector.false_negative_rate = opt.fn_rate;
  ctx.detector.false_positive_rate = opt.fp_rate;
  if (opt.dynamics == "identity") {
    ctx.dynamics = dynamics_model(dynamics_mode::identity, task.workspace.max_step);
  } else if (opt.dynamics == "clamped") {
    ctx.dynamics = dynamics_model(dynamics_mode::clamped, task.workspace.max_step,
                                  task.workspace.bounds);
  } else {
    throw config_error("unknown dynamics mode: " + opt.dynamics);
  }
  if (opt.fallback == "base") {
    ctx.fallback = fallback_mode::base_only;
  } else if (opt.fallback == "uniform") {
    ctx.fallback = fallback_mode::uniform_guidance;
  } else {
    throw config_error("unknown fallback mode: " + opt.fallback);
  }
  return ctx;
}

// Parses and format-validates a script, printing the report.  Returns null
// when validation fails.
std::shared_ptr<const gsl::program> load_guidance(const std::string& path,
                                                  const task_spec& task,
                                                  bool print_report) {
  std::string source = read_text_file(path);
  std::shared_ptr<gsl::program> prog;
  try {
    prog = std::make_shared<gsl::program>(gsl::parse(source));
  } catch (const error& e) {
    if (print_report) std::cout << "validation: FAILED\n  " << e.what() << "\n";
    return nullptr;
  }
  std::vector<std::string> known;
  for (const auto& obj : task.objects) known.push_back(obj.name);
  gsl::validation_report report = gsl::validate_format(
      *prog, gsl::default_probe_states(task.workspace.bounds), known);
  if (print_report) std::cout << gsl::render_report(report);
  return report.ok ? prog : nullptr;
}

backend_config make_backend_config(const cli_options& opt) {
  backend_config cfg;
  if (opt.backend == "scripted") {
    cfg.kind = backend_config::backend_kind::scripted;
    cfg.transcript_path = opt.transcript;
  } else if (opt.backend == "http") {
    cfg.kind = backend_config::backend_kind::http;
    cfg.url = opt.url;
    if (!opt.model.empty()) cfg.model = opt.model;
  } else {
    throw config_error("unknown backend kind: " + opt.backend);
  }
  return cfg;
}

struct metrics_row {
  std::string task;
  std::string policy;
  double alpha = 0.0;
  std::string guidance_version;
  std::size_t episodes = 0;
  std::size_t successes = 0;
  double success_rate = 0.0;
  double mean_steps = 0.0;
};

void write_metrics_csv(const std::string& path, const std::vector<metrics_row>& rows) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot write " + path);
  out << "task,policy,alpha,guidance_version,episodes,successes,success_rate,mean_steps\n";
  char buf[64];
  for (const auto& r : rows) {
    out << r.task << "," << r.policy << ",";
    std::snprintf(buf, sizeof buf, "%.10g", r.alpha);
    out << buf << "," << r.guidance_version << "," << r.episodes << "," << r.successes << ",";
    std::snprintf(buf, sizeof buf, "%.6f", r.success_rate);
    out << buf << ",";
    std::snprintf(buf, sizeof buf, "%.4f", r.mean_steps);
    out << buf << "\n";
  }
}

std::vector<metrics_row> read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open " + path);
  std::vector<metrics_row> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (first) {
      first = false;
      continue;
    }
    std::istringstream cells(line);
    std::string cell;
    std::vector<std::string> parts;
    while (std::getline(cells, cell, ',')) parts.push_back(cell);
    if (parts.size() < 8) throw config_error("malformed metrics row in " + path);
    metrics_row r;
    r.task = parts[0];
    r.policy = parts[1];
    r.alpha = std::stod(parts[2]);
    r.guidance_version = parts[3];
    r.episodes = std::stoul(parts[4]);
    r.successes = std::stoul(parts[5]);
    r.success_rate = std::stod(parts[6]);
    r.mean_steps = std::stod(parts[7]);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_manifest(const std::string& path,
                    const std::vector<std::pair<std::string, std::string>>& entries) {
  std::ofstream out(path);
  if (!out) throw config_error("cannot write " + path);
  for (const auto& [k, v] : entries) out << k << "=" << v << "\n";
}

int cmd_run(const cli_options& opt) {
  task_spec task = load_task_fixture(opt.task_path);
  simulator sim(task);
  auto policy = make_policy(opt, task);
  guidance_context ctx = make_context(opt, task);

  std::string guidance_version = "none";
  if (!opt.guidance_path.empty()) {
    auto prog = load_guidance(opt.guidance_path, task, true);
    if (!prog) return kExitValidation;
    ctx.program = prog;
    ctx.guidance_label = fs::path(opt.guidance_path).stem().string();
    guidance_version = guidance_version_string(ctx.guidance_label, prog->source);
  }

  std::vector<std::uint64_t> seeds = parse_seed_spec(opt.seeds);
  fs::create_directories(fs::path(opt.out_dir) / "episodes");

  metrics_row row;
  row.task = task.id;
  row.policy = opt.policy;
  row.alpha = ctx.alpha;
  row.guidance_version = guidance_version;
  double total_steps = 0.0;
  for (std::uint64_t seed : seeds) {
    episode_log log = run_episode(sim, *policy, ctx, seed);
    log.save_atomic((fs::path(opt.out_dir) / "episodes" /
                     ("ep_" + std::to_string(seed) + ".jsonl"))
                        .string(),
                    ctx.detail);
    ++row.episodes;
    if (log.success) ++row.successes;
    total_steps += static_cast<double>(log.steps.size());
  }
  row.success_rate = static_cast<double>(row.successes) / row.episodes;
  row.mean_steps = total_steps / static_cast<double>(row.episodes);
  write_metrics_csv((fs::path(opt.out_dir) / "metrics.csv").string(), {row});

  write_manifest((fs::path(opt.out_dir) / "manifest.txt").string(),
                 {{"task", task.id},
                  {"fixture", opt.task_path},
                  {"policy", opt.policy},
                  {"alpha", std::to_string(ctx.alpha)},
                  {"samples", std::to_string(ctx.samples)},
                  {"seeds", opt.seeds},
                  {"guidance", opt.guidance_path.empty() ? "none" : opt.guidance_path},
                  {"guidance_version", guidance_version},
                  {"dynamics", opt.dynamics},
                  {"fallback", opt.fallback},
                  {"dropout", std::to_string(opt.dropout)},
                  {"detail", opt.detail}});

  std::printf("%s policy=%s alpha=%g guidance=%s: %zu/%zu success (%.1f%%), mean steps %.2f\n",
              task.id.c_str(), opt.policy.c_str(), ctx.alpha, guidance_version.c_str(),
              row.successes, row.episodes, 100.0 * row.success_rate, row.mean_steps);
  return kExitOk;
}

int cmd_validate(const cli_options& opt) {
  std::string source = read_text_file(opt.guidance_path);
  std::shared_ptr<gsl::program> prog;
  try {
    prog = std::make_shared<gsl::program>(gsl::parse(source));
  } catch (const error& e) {
    std::cout << "validation: FAILED\n  " << e.what() << "\n";
    return kExitValidation;
  }

  std::vector<robot_state> probes;
  std::vector<std::string> known;
  if (!opt.task_path.empty()) {
    task_spec task = load_task_fixture(opt.task_path);
    probes = gsl::default_probe_states(task.workspace.bounds);
    for (const auto& obj : task.objects) known.push_back(obj.name);
  } else {
    workspace_bounds unit;
    unit.x = {0.0, 1.0};
    unit.y = {0.0, 1.0};
    unit.z = {0.0, 1.0};
    probes = gsl::default_probe_states(unit);
  }
  gsl::validation_report report = gsl::validate_format(*prog, probes, known);
  std::cout << gsl::render_report(report);
  return report.ok ? kExitOk : kExitValidation;
}

int cmd_heatmap(const cli_options& opt) {
  task_spec task = load_task_fixture(opt.task_path);
  simulator sim(task);
  auto policy = make_policy(opt, task);
  guidance_context ctx = make_context(opt, task);

  if (!opt.guidance_path.empty()) {
    auto prog = load_guidance(opt.guidance_path, task, true);
    if (!prog) return kExitValidation;
    ctx.program = prog;
  }

  std::uint64_t seed = parse_seed_spec(opt.seeds).front();
  sim_state st = sim.reset(seed);
  observation obs = sim.observe(st);

  track_registry tracks;
  detector_config det_cfg = ctx.detector;
  det_cfg.seed = derive_seed(seed, 0x6865617400ull);
  detector det(det_cfg);
  hidden_state hidden;
  if (ctx.program) {
    hidden = ctx.program->default_hidden;
    for (const auto& name : collect_object_names(*ctx.program)) {
      thesaurus_entry entry;
      auto it = task.synonyms_table.find(normalize_object_name(name));
      if (it != task.synonyms_table.end()) entry = it->second;
      multi_granular_search(det, tracks, *obs.snapshot, name, entry.synonyms,
                            entry.parents, ctx.search);
    }
  }
  auto scene = obs.snapshot;
  gsl::perception_fn binding = [&tracks, scene](geometry_kind kind, const std::string& name) {
    return query_object_geometry(tracks, *scene, name, kind);
  };

  heatmap_grid grid;
  grid.x0 = task.workspace.bounds.x[0];
  grid.x1 = task.workspace.bounds.x[1];
  grid.y0 = task.workspace.bounds.y[0];
  grid.y1 = task.workspace.bounds.y[1];
  grid.nx = opt.nx;
  grid.ny = opt.ny;
  grid.z = std::isnan(opt.z) ? task.workspace.bounds.center()[2] : opt.z;

  heatmap_result result =
      compute_heatmap(*policy, obs, st.ee, hidden, ctx, binding, grid);
  std::ofstream out(opt.heatmap_out);
  if (!out) throw config_error("cannot write " + opt.heatmap_out);
  write_heatmap_csv(result, out);

  auto xy = result.argmax_xy();
  std::printf("heatmap %dx%d written to %s; argmax cell (%d, %d) at x=%.4f y=%.4f\n",
              grid.nx, grid.ny, opt.heatmap_out.c_str(), result.argmax_ix,
              result.argmax_iy, xy[0], xy[1]);
  return kExitOk;
}

int cmd_improve(const cli_options& opt) {
  task_spec task = load_task_fixture(opt.task_path);
  simulator sim(task);
  auto policy = make_policy(opt, task);
  guidance_context ctx = make_context(opt, task);

  auto backend = make_backend(make_backend_config(opt));
  agent_prompts prompts = load_prompts(opt.prompts_dir);

  improve_config icfg;
  icfg.iterations = opt.iterations;
  icfg.seeds = parse_seed_spec(opt.seeds);

  improve_result result =
      improve_guidance(sim, *policy, ctx, *backend, prompts, icfg);

  fs::create_directories(fs::path(opt.out_dir) / "episodes");
  std::vector<metrics_row> rows;
  for (const auto& rec : result.iterations) {
    std::ofstream gout(fs::path(opt.out_dir) /
                       ("guidance_iter" + std::to_string(rec.iteration) + ".gsl"));
    gout << rec.guidance_source;
    for (const auto& ep : rec.episodes) {
      ep.save_atomic((fs::path(opt.out_dir) / "episodes" /
                      ("iter" + std::to_string(rec.iteration) + "_ep_" +
                       std::to_string(ep.seed) + ".jsonl"))
                         .string(),
                     ctx.detail);
    }
    metrics_row row;
    row.task = task.id;
    row.policy = opt.policy;
    row.alpha = ctx.alpha;
    row.guidance_version = rec.guidance_version;
    row.episodes = rec.episodes.size();
    for (const auto& ep : rec.episodes) row.successes += ep.success ? 1 : 0;
    row.success_rate = rec.success_rate;
    double total = 0.0;
    for (const auto& ep : rec.episodes) total += static_cast<double>(ep.steps.size());
    row.mean_steps = row.episodes ? total / static_cast<double>(row.episodes) : 0.0;
    rows.push_back(row);
    std::printf("iteration %d: %.1f%% success, guidance %s\n", rec.iteration,
                100.0 * rec.success_rate, rec.guidance_version.c_str());
  }
  write_metrics_csv((fs::path(opt.out_dir) / "metrics.csv").string(), rows);
  std::ofstream best(fs::path(opt.out_dir) / "guidance_best.gsl");
  best << result.best_source;
  write_manifest((fs::path(opt.out_dir) / "manifest.txt").string(),
                 {{"task", task.id},
                  {"policy", opt.policy},
                  {"alpha", std::to_string(ctx.alpha)},
                  {"seeds", opt.seeds},
                  {"iterations", std::to_string(opt.iterations)},
                  {"best_iteration", std::to_string(result.best_iteration)},
                  {"best_rate", std::to_string(result.best_rate)},
                  {"backend", opt.backend}});
  std::printf("best iteration %d at %.1f%% success\n", result.best_iteration,
              100.0 * result.best_rate);
  return kExitOk;
}

int cmd_report(const cli_options& opt) {
  std::vector<metrics_row> rows;
  for (const auto& input : opt.report_inputs) {
    fs::path p(input);
    if (fs::is_directory(p)) p /= "metrics.csv";
    for (auto& r : read_metrics_csv(p.string())) rows.push_back(std::move(r));
  }
  if (rows.empty()) throw config_error("report: no metrics rows found");

  // Baseline per (task, policy): the alpha=0 / unguided row.
  std::map<std::pair<std::string, std::string>, double> baseline;
  for (const auto& r : rows) {
    if (r.alpha == 0.0 && r.guidance_version == "none") {
      baseline[{r.task, r.policy}] = r.success_rate;
    }
  }

  std::ofstream out(opt.report_out);
  if (!out) throw config_error("cannot write " + opt.report_out);
  out << "task,policy,alpha,guidance_version,episodes,success_rate,delta_vs_baseline\n";
  std::printf("%-12s %-9s %-6s %-24s %9s %9s %8s\n", "task", "policy", "alpha",
              "guidance", "episodes", "success", "delta");
  for (const auto& r : rows) {
    auto it = baseline.find({r.task, r.policy});
    std::string delta = "n/a";
    if (it != baseline.end()) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%+.4f", r.success_rate - it->second);
      delta = buf;
    }
    char alpha_buf[32];
    std::snprintf(alpha_buf, sizeof alpha_buf, "%g", r.alpha);
    out << r.task << "," << r.policy << "," << alpha_buf << "," << r.guidance_version
        << "," << r.episodes << "," << r.success_rate << "," << delta << "\n";
    std::printf("%-12s %-9s %-6s %-24s %9zu %8.1f%% %8s\n", r.task.c_str(),
                r.policy.c_str(), alpha_buf, r.guidance_version.c_str(), r.episodes,
                100.0 * r.success_rate, delta.c_str());
  }
  return kExitOk;
}

int cmd_replay(const cli_options& opt) {
  task_spec task = load_task_fixture(opt.task_path);
  simulator sim(task);
  episode_log log = episode_log::load(opt.log_path);
  robot_state final = replay_episode(sim, log);
  double drift = distance(final, log.final_state);
  std::printf("replay of %s seed %llu: drift %.3e %s\n", log.task_id.c_str(),
              static_cast<unsigned long long>(log.seed), drift,
              drift <= 1e-9 ? "(match)" : "(MISMATCH)");
  return drift <= 1e-9 ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"guidance-script policy steering toolkit"};
  app.require_subcommand(1);
  cli_options opt;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", opt.config_path, "config file (TOML subset)");
    cmd->add_option("--task", opt.task_path, "task fixture JSON");
    cmd->add_option("--policy", opt.policy, "random | gaussian | waypoint");
    cmd->add_option("--alpha", opt.alpha, "guidance weight in [0,1]");
    cmd->add_option("--samples", opt.samples, "candidates per step");
    cmd->add_option("--guidance", opt.guidance_path, "guidance script (.gsl)");
    cmd->add_option("--seeds", opt.seeds, "seed spec: 7 | 0..49 | 1,2,3");
    cmd->add_option("--out", opt.out_dir, "output directory");
    cmd->add_option("--detail", opt.detail, "log detail: minimal | scores | full");
    cmd->add_option("--dynamics", opt.dynamics, "forecast mode: identity | clamped");
    cmd->add_option("--fallback", opt.fallback, "guidance fallback: base | uniform");
    cmd->add_option("--dropout", opt.dropout, "per-step track dropout rate");
    cmd->add_option("--fn-rate", opt.fn_rate, "detector false-negative rate");
    cmd->add_option("--fp-rate", opt.fp_rate, "detector false-positive rate");
    cmd->add_option("--expert-bias", opt.expert_bias, "gaussian expert bias x y z")
        ->expected(3);
    cmd->add_option("--expert-noise", opt.expert_noise, "gaussian expert noise scale");
    cmd->add_option("--sigma-pos", opt.sigma_pos, "gaussian position sigma");
    cmd->add_option("--sigma-rot", opt.sigma_rot, "gaussian rotation sigma");
    cmd->add_option("--sigma-grip", opt.sigma_grip, "gaussian gripper sigma");
  };

  CLI::App* run = app.add_subcommand("run", "run guided episodes");
  add_common(run);

  CLI::App* validate = app.add_subcommand("validate", "format-check a guidance script");
  validate->add_option("--guidance", opt.guidance_path, "guidance script (.gsl)")
      ->required();
  validate->add_option("--task", opt.task_path, "task fixture for probes/objects");

  CLI::App* heatmap = app.add_subcommand("heatmap", "score a grid of candidate positions");
  add_common(heatmap);
  heatmap->add_option("--nx", opt.nx, "grid columns");
  heatmap->add_option("--ny", opt.ny, "grid rows");
  heatmap->add_option("--z", opt.z, "slice height (default: workspace center)");
  heatmap->add_option("--heatmap-out", opt.heatmap_out, "output CSV path");

  CLI::App* improve = app.add_subcommand("improve", "generate-evaluate-critique loop");
  add_common(improve);
  improve->add_option("--backend", opt.backend, "scripted | http");
  improve->add_option("--transcript", opt.transcript, "scripted replies JSON");
  improve->add_option("--url", opt.url, "chat completions endpoint");
  improve->add_option("--model", opt.model, "model name");
  improve->add_option("--prompts", opt.prompts_dir, "prompt directory");
  improve->add_option("--iterations", opt.iterations, "max improvement iterations");

  CLI::App* report = app.add_subcommand("report", "merge metrics and show deltas");
  report->add_option("inputs", opt.report_inputs, "run directories or metrics.csv files")
      ->required();
  report->add_option("--report-out", opt.report_out, "merged CSV path");

  CLI::App* replay = app.add_subcommand("replay", "re-run a logged episode");
  replay->add_option("--task", opt.task_path, "task fixture JSON")->required();
  replay->add_option("--log", opt.log_path, "episode JSONL")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run->parsed()) {
      overlay_config(opt, *run);
      if (opt.task_path.empty()) throw config_error("run needs --task (or [run] task)");
      return cmd_run(opt);
    }
    if (validate->parsed()) return cmd_validate(opt);
    if (heatmap->parsed()) {
      overlay_config(opt, *heatmap);
      if (opt.task_path.empty()) throw config_error("heatmap needs --task");
      return cmd_heatmap(opt);
    }
    if (improve->parsed()) {
      overlay_config(opt, *improve);
      if (opt.task_path.empty()) throw config_error("improve needs --task");
      return cmd_improve(opt);
    }
    if (report->parsed()) return cmd_report(opt);
    if (replay->parsed()) return cmd_replay(opt);
  } catch (const backend_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBackend;
  } catch (const transcript_exhausted_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBackend;
  } catch (const protocol_failure_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBackend;
  } catch (const config_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const fixture_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}
