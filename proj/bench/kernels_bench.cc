// Serial reference vs OpenMP kernels on the standard synthetic dataset.
// Argument 0 runs the serial path, 1 the parallel path.

#include <benchmark/benchmark.h>

#include <numeric>

#include "aehcl/detection.h"
#include "aehcl/injection.h"
#include "aehcl/training.h"

namespace aehcl {
namespace {

struct Workload {
  EventDataset data;
  TrainConfig config;
  ParameterStore params;
  ModelLayout layout;
  ModelContext ctx;
  BatchPlan plan;

  Workload() {
    InjectionConfig inj;
    inj.seed = 7;
    data = inject_anomalies(generate_synthetic(synth_preset("standard")), inj).dataset;
    layout = ModelLayout::create(params, data.ahin.schema, data.ahin.feature_width(), config.hidden,
                                 config.activation, 1);
    ctx = make_model_context(data, config, layout);
    std::vector<std::size_t> batch(config.batch_size);
    std::iota(batch.begin(), batch.end(), 0);
    plan = sample_batch_plan(ctx, batch, 1, 0);
  }
};

const Workload& workload() {
  static const Workload w;
  return w;
}

Execution execution(const benchmark::State& state) {
  return state.range(0) ? Execution::kParallel : Execution::kSerial;
}

void label(benchmark::State& state) {
  state.SetLabel(state.range(0) ? "parallel" : "serial");
}

void BM_BatchForwardBackward(benchmark::State& state) {
  const Workload& w = workload();
  GradientSet grads = w.params.make_gradient_set();
  for (auto _ : state) {
    benchmark::DoNotOptimize(batch_forward_backward(w.ctx, w.params, w.plan, &grads, execution(state)));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.plan.draws.size()));
  label(state);
}
BENCHMARK(BM_BatchForwardBackward)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_EncodeAllNodes(benchmark::State& state) {
  const Workload& w = workload();
  for (auto _ : state) benchmark::DoNotOptimize(encode_all_nodes(w.ctx, w.params, execution(state)));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.data.ahin.node_count()));
  label(state);
}
BENCHMARK(BM_EncodeAllNodes)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_BuildNeighborSets(benchmark::State& state) {
  const Workload& w = workload();
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_neighbor_sets(w.data, w.config.t_pos, w.config.t_neg, execution(state)));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.data.events.size()));
  label(state);
}
BENCHMARK(BM_BuildNeighborSets)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ScoreEvents(benchmark::State& state) {
  const Workload& w = workload();
  ScoreOptions o;
  o.execution = execution(state);
  o.neighbors = &*w.ctx.neighbors;
  for (auto _ : state) benchmark::DoNotOptimize(score_events(w.data, w.params, w.layout, o));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.data.events.size()));
  label(state);
}
BENCHMARK(BM_ScoreEvents)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace aehcl

BENCHMARK_MAIN();
