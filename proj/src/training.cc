#include "aehcl/training.h"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "aehcl/adam.h"
#include "aehcl/checkpoint.h"
#include "aehcl/grad_check.h"
#include "aehcl/rng.h"

namespace aehcl {
namespace {

LrDecayMode parse_decay_mode(const std::string& value) {
  if (value == "pairwise_group") return LrDecayMode::kPairwiseGroup;
  if (value == "pairwise_only") return LrDecayMode::kPairwiseOnly;
  if (value == "none") return LrDecayMode::kNone;
  throw ValidationError("lr_decay_mode: expected pairwise_group, pairwise_only or none, got '" +
                        value + "'");
}

std::string decay_mode_name(LrDecayMode mode) {
  switch (mode) {
    case LrDecayMode::kPairwiseGroup:
      return "pairwise_group";
    case LrDecayMode::kPairwiseOnly:
      return "pairwise_only";
    case LrDecayMode::kNone:
      return "none";
  }
  return "none";
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Learning-rate multipliers for the given epoch (1-based).
std::vector<double> lr_scales(const TrainConfig& cfg, const ModelLayout& layout,
                              std::size_t param_count, std::size_t epoch) {
  std::vector<double> scale(param_count, 1.0);
  const auto periods = static_cast<double>((epoch - 1) / cfg.lr_decay_every);
  const double factor = std::pow(cfg.lr_decay, periods);
  const ModuleWeights& w = cfg.weights;
  switch (cfg.lr_decay_mode) {
    case LrDecayMode::kPairwiseGroup:
      for (std::size_t i : layout.pairwise_group()) scale[i] = factor;
      break;
    case LrDecayMode::kPairwiseOnly:
      if (w.alpha > 0.0 && w.beta == 0.0 && w.gamma == 0.0) std::fill(scale.begin(), scale.end(), factor);
      break;
    case LrDecayMode::kNone:
      break;
  }
  return scale;
}

double run_grad_check(const ModelContext& ctx, ParameterStore& params, std::size_t coordinates,
                      std::uint64_t seed) {
  std::vector<std::size_t> events(std::min<std::size_t>(4, ctx.dataset->events.size()));
  std::iota(events.begin(), events.end(), 0);
  const BatchPlan plan = sample_batch_plan(ctx, events, seed, 0);
  LossFn loss = [&](ParameterStore& p, bool with_grad) {
    if (!with_grad) return batch_forward_backward(ctx, p, plan, nullptr, Execution::kSerial).total;
    GradientSet g = p.make_gradient_set();
    const double value = batch_forward_backward(ctx, p, plan, &g, Execution::kSerial).total;
    p.accumulate(g);
    return value;
  };
  GradCheckOptions options;
  options.max_coordinates = coordinates;
  options.seed = seed;
  const GradCheckResult result = grad_check(loss, params, options);
  params.zero_grad();
  return result.max_relative_error;
}

}  // namespace

ModuleWeights weight_preset(const std::string& name) {
  if (name == "aminer") return {1.0, 0.8, 0.2};
  if (name == "imdb") return {1.0, 0.1, 0.1};
  if (name == "meituan") return {0.5, 1.0, 0.3};
  throw ValidationError("unknown weight preset '" + name + "' (aminer, imdb, meituan)");
}

double total_loss(double pairwise, double multivariate, double inter, const ModuleWeights& w) {
  return w.alpha * pairwise + w.beta * multivariate + w.gamma * inter;
}

void TrainConfig::validate() const {
  const ModuleWeights& w = weights;
  if (w.alpha < 0.0 || w.beta < 0.0 || w.gamma < 0.0) {
    throw ValidationError("module weights must be non-negative");
  }
  if (w.alpha == 0.0 && w.beta == 0.0 && w.gamma == 0.0) {
    throw ValidationError("module weights must not all be zero");
  }
  if (!(temperature > 0.0)) throw ValidationError("temperature must be positive");
  if (!(learning_rate > 0.0)) throw ValidationError("lr must be positive");
  if (!(lr_decay > 0.0) || lr_decay > 1.0) throw ValidationError("lr_decay must lie in (0, 1]");
  if (lr_decay_every == 0) throw ValidationError("lr_decay_every must be positive");
  if (hidden == 0) throw ValidationError("hidden must be positive");
  if (batch_size == 0) throw ValidationError("batch_size must be positive");
  if (clusters < 2) throw ValidationError("clusters must be at least 2");
  if (t_pos < 0 || t_neg < 1) throw ValidationError("t_pos must be >= 0 and t_neg >= 1");
}

void TrainConfig::set(const std::string& key, const std::string& value) {
  if (key == "hidden") {
    hidden = parse_uint(key, value);
  } else if (key == "temperature") {
    temperature = parse_real(key, value);
  } else if (key == "negatives") {
    negatives = parse_uint(key, value);
  } else if (key == "alpha") {
    weights.alpha = parse_real(key, value);
  } else if (key == "beta") {
    weights.beta = parse_real(key, value);
  } else if (key == "gamma") {
    weights.gamma = parse_real(key, value);
  } else if (key == "weights") {
    const auto list = parse_real_list(key, value);
    if (list.size() != 3) throw ValidationError("weights: expected alpha,beta,gamma");
    weights = {list[0], list[1], list[2]};
  } else if (key == "preset") {
    weights = weight_preset(value);
  } else if (key == "t_pos") {
    t_pos = static_cast<int>(parse_int(key, value));
  } else if (key == "t_neg") {
    t_neg = static_cast<int>(parse_int(key, value));
  } else if (key == "clusters") {
    clusters = static_cast<int>(parse_int(key, value));
  } else if (key == "lr") {
    learning_rate = parse_real(key, value);
  } else if (key == "lr_decay") {
    lr_decay = parse_real(key, value);
  } else if (key == "lr_decay_every") {
    lr_decay_every = parse_uint(key, value);
  } else if (key == "lr_decay_mode") {
    lr_decay_mode = parse_decay_mode(value);
  } else if (key == "epochs") {
    epochs = parse_uint(key, value);
  } else if (key == "batch_size") {
    batch_size = parse_uint(key, value);
  } else if (key == "seed") {
    seed = parse_uint(key, value);
  } else if (key == "activation") {
    activation = parse_activation(value);
  } else if (key == "grad_check_coordinates") {
    grad_check_coordinates = parse_uint(key, value);
  } else {
    throw ValidationError("unknown training key '" + key + "'");
  }
}

void TrainConfig::apply(const KeyValues& values) {
  for (const auto& [key, value] : values) set(key, value);
}

std::string TrainConfig::to_text() const {
  std::ostringstream out;
  out << "hidden = " << hidden << "\n"
      << "temperature = " << format_real(temperature) << "\n"
      << "negatives = " << negatives << "\n"
      << "alpha = " << format_real(weights.alpha) << "\n"
      << "beta = " << format_real(weights.beta) << "\n"
      << "gamma = " << format_real(weights.gamma) << "\n"
      << "t_pos = " << t_pos << "\n"
      << "t_neg = " << t_neg << "\n"
      << "clusters = " << clusters << "\n"
      << "lr = " << format_real(learning_rate) << "\n"
      << "lr_decay = " << format_real(lr_decay) << "\n"
      << "lr_decay_every = " << lr_decay_every << "\n"
      << "lr_decay_mode = " << decay_mode_name(lr_decay_mode) << "\n"
      << "epochs = " << epochs << "\n"
      << "batch_size = " << batch_size << "\n"
      << "seed = " << seed << "\n"
      << "activation = " << activation_name(activation) << "\n"
      << "grad_check_coordinates = " << grad_check_coordinates << "\n";
  return out.str();
}

ModelContext make_model_context(const EventDataset& dataset, const TrainConfig& config,
                                const ModelLayout& layout, Execution execution,
                                const NeighborSets* precomputed_neighbors) {
  config.validate();
  ModelContext ctx;
  ctx.dataset = &dataset;
  ctx.layout = layout;
  ctx.config = config;
  if (config.weights.beta > 0.0) {
    ctx.clusters = cluster_nodes(dataset.ahin, config.clusters, Rng::derive(config.seed, "clusters"));
  }
  if (config.weights.gamma > 0.0) {
    if (precomputed_neighbors) {
      if (precomputed_neighbors->event_count() != dataset.events.size() ||
          precomputed_neighbors->t_pos() != config.t_pos ||
          precomputed_neighbors->t_neg() != config.t_neg) {
        throw ValidationError("neighbor sets do not match the dataset or thresholds");
      }
      ctx.neighbors = *precomputed_neighbors;
    } else {
      ctx.neighbors = build_neighbor_sets(dataset, config.t_pos, config.t_neg, execution);
    }
    if (ctx.neighbors->participant_count() == 0) {
      throw std::runtime_error("inter-event module inapplicable; set gamma=0");
    }
  }
  return ctx;
}

std::string report_to_jsonl(const TrainReport& report) {
  std::string out;
  for (const auto& e : report.epochs) {
    nlohmann::ordered_json line;
    line["epoch"] = e.epoch;
    line["total"] = e.total;
    line["pairwise"] = e.pairwise;
    line["multivariate"] = e.multivariate;
    line["inter"] = e.inter;
    line["pairwise_lr"] = e.pairwise_lr;
    line["seconds"] = e.seconds;
    out += line.dump() + "\n";
  }
  nlohmann::ordered_json summary;
  summary["summary"] = true;
  summary["epochs"] = report.epochs.size();
  summary["grad_check_error"] =
      report.grad_check_error ? nlohmann::ordered_json(*report.grad_check_error) : nullptr;
  summary["wall_seconds"] = report.wall_seconds;
  summary["checkpoint"] = report.checkpoint_path;
  summary["neighbor_sets_built"] = report.neighbor_sets_built;
  summary["inter_participants"] = report.inter_participants;
  out += summary.dump() + "\n";
  return out;
}

TrainResult train(const EventDataset& dataset, const TrainConfig& config,
                  const TrainOptions& options) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  TrainResult result;
  result.layout = ModelLayout::create(result.params, dataset.ahin.schema,
                                      dataset.ahin.feature_width(), config.hidden,
                                      config.activation, config.seed);
  ParameterStore& params = result.params;
  TrainReport& report = result.report;
  report.checkpoint_path = options.checkpoint_path;

  const ModelContext ctx = make_model_context(dataset, config, result.layout, options.execution,
                                              options.neighbors);
  report.neighbor_sets_built = ctx.neighbors.has_value();
  report.inter_participants = ctx.neighbors ? ctx.neighbors->participant_count() : 0;

  if (config.grad_check_coordinates > 0) {
    report.grad_check_error = run_grad_check(ctx, params, config.grad_check_coordinates,
                                             Rng::derive(config.seed, "grad_check"));
  }

  AdamState adam = AdamState::for_parameters(params, config.learning_rate);
  GradientSet grads = params.make_gradient_set();
  ParameterStore last_good = params;
  const std::size_t m = dataset.events.size();
  std::vector<std::size_t> order(m);
  std::uint64_t step = 0;

  auto abort = [&](const std::string& why) {
    params = last_good;
    if (!options.checkpoint_path.empty()) save_checkpoint(options.checkpoint_path, params);
    report.wall_seconds = seconds_since(start);
    throw TrainingAborted(why, report);
  };

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto epoch_start = std::chrono::steady_clock::now();
    adam.lr_scale = lr_scales(config, result.layout, params.size(), epoch);
    std::iota(order.begin(), order.end(), 0);
    Rng order_rng = Rng::stream(config.seed, "order", epoch);
    order_rng.shuffle(order.begin(), order.end());

    EpochStats stats;
    stats.epoch = epoch;
    stats.pairwise_lr = config.learning_rate *
                        (result.layout.weight.empty() ? 1.0
                                                      : adam.lr_scale[result.layout.pairwise_group().front()]);
    double weight_sum = 0.0;
    double inter_weight = 0.0;
    for (std::size_t begin = 0; begin < m; begin += config.batch_size) {
      const std::size_t end = std::min(m, begin + config.batch_size);
      const std::span<const std::size_t> batch(order.data() + begin, end - begin);
      const BatchPlan plan = sample_batch_plan(ctx, batch, config.seed, step++);
      const BatchLoss loss = batch_forward_backward(ctx, params, plan, &grads, options.execution);
      if (!std::isfinite(loss.total)) {
        abort("non-finite loss at epoch " + std::to_string(epoch));
      }
      const auto b = static_cast<double>(loss.events);
      stats.pairwise += loss.pairwise * b;
      stats.multivariate += loss.multivariate * b;
      stats.inter += loss.inter * static_cast<double>(loss.inter_events);
      weight_sum += b;
      inter_weight += static_cast<double>(loss.inter_events);

      params.zero_grad();
      params.accumulate(grads);
      try {
        adam_step(params, adam);
      } catch (const std::domain_error& e) {
        abort(std::string("non-finite gradient: ") + e.what());
      }
      last_good = params;
    }
    stats.pairwise /= weight_sum;
    stats.multivariate /= weight_sum;
    stats.inter = inter_weight > 0.0 ? stats.inter / inter_weight : 0.0;
    stats.total = total_loss(stats.pairwise, stats.multivariate, stats.inter, config.weights);
    stats.seconds = seconds_since(epoch_start);
    report.epochs.push_back(stats);
    if (options.on_epoch) options.on_epoch(stats);
  }

  if (!options.checkpoint_path.empty()) save_checkpoint(options.checkpoint_path, params);
  report.wall_seconds = seconds_since(start);
  return result;
}

}  // namespace aehcl
