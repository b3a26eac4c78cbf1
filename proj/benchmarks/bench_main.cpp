// Microbenchmarks for the per-step hot path: score normalization, guidance
// evaluation, full guided steps, and keyframe extraction.

#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "grappa/executor.hpp"
#include "grappa/gsl/interp.hpp"
#include "grappa/gsl/parser.hpp"
#include "grappa/keyframes.hpp"
#include "grappa/policy.hpp"
#include "grappa/rng.hpp"
#include "grappa/scores.hpp"

namespace {

using namespace grappa;

score_vector random_scores(std::size_t n, std::uint64_t seed) {
  rng gen(seed);
  score_vector v(n);
  for (auto& x : v) x = gen.uniform(0.0, 10.0);
  return v;
}

void bench_normalize(benchmark::State& state) {
  score_vector raw = random_scores(static_cast<std::size_t>(state.range(0)), 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(normalize_scores(raw));
  }
}
BENCHMARK(bench_normalize)->Arg(16)->Arg(256)->Arg(4096);

const char* kScript = R"(#gsl 1
fn guidance(state, prev = {"reached": false}) {
  let target = [0.35, 0.1, 0.08];
  let d = dist([state[0], state[1], state[2]], target);
  let next = prev;
  if d < 0.03 {
    next["reached"] = true;
  }
  let score = 1.0 / (0.001 + d * d);
  return (score, next);
}
)";

void bench_gsl_eval(benchmark::State& state) {
  gsl::program prog = gsl::parse(kScript);
  robot_state rs;
  rs.position = {0.3, 0.05, 0.1};
  hidden_state hidden = prog.default_hidden;
  auto stub = gsl::stub_perception();
  for (auto _ : state) {
    benchmark::DoNotOptimize(gsl::evaluate(prog, rs, hidden, stub));
  }
}
BENCHMARK(bench_gsl_eval);

void bench_guided_step(benchmark::State& state) {
  workspace_bounds bounds;
  bounds.x = {0.0, 0.6};
  bounds.y = {-0.3, 0.3};
  bounds.z = {0.0, 0.3};
  random_policy policy(bounds);

  guidance_context ctx;
  ctx.program = std::make_shared<gsl::program>(gsl::parse(kScript));
  ctx.alpha = 0.8;
  ctx.samples = static_cast<int>(state.range(0));

  robot_state rs;
  rs.position = {0.3, 0.0, 0.15};
  observation obs;
  hidden_state hidden = ctx.program->default_hidden;
  auto stub = gsl::stub_perception();

  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(guided_step(policy, obs, rs, hidden, ctx, stub, seed++));
  }
}
BENCHMARK(bench_guided_step)->Arg(16)->Arg(64)->Arg(256);

void bench_keyframes(benchmark::State& state) {
  rng gen(11);
  std::vector<std::vector<double>> frames;
  for (int t = 0; t < state.range(0); ++t) {
    std::vector<double> row(19);
    for (auto& v : row) v = gen.uniform(-1.0, 1.0);
    frames.push_back(std::move(row));
  }
  keyframe_config cfg;
  for (auto _ : state) {
    benchmark::DoNotOptimize(extract_keyframes(frames, cfg));
  }
}
BENCHMARK(bench_keyframes)->Arg(20)->Arg(200);

}  // namespace

BENCHMARK_MAIN();
