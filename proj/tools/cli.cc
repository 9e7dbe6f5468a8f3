#include "cli.h"

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "aehcl/checkpoint.h"
#include "aehcl/detection.h"
#include "aehcl/injection.h"
#include "aehcl/training.h"

namespace aehcl::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

struct RunManifest {
  std::string command;
  std::vector<std::string> args;
  KeyValues config;
  std::map<std::string, std::uint64_t> seeds;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void write(const std::string& dir) const {
    Json j;
    j["command"] = command;
    j["args"] = args;
    Json cfg = Json::object();
    for (const auto& [k, v] : config) cfg[k] = v;
    j["config"] = cfg;
    Json s = Json::object();
    for (const auto& [k, v] : seeds) s[k] = v;
    j["seeds"] = s;
    auto files = [](const std::vector<std::string>& paths) {
      Json arr = Json::array();
      for (const auto& p : paths) arr.push_back({{"path", p}, {"sha256", sha256_file(p)}});
      return arr;
    };
    j["inputs"] = files(inputs);
    j["outputs"] = files(outputs);
    j["timings"] = {{"wall_seconds", std::chrono::duration<double>(
                                         std::chrono::steady_clock::now() - start)
                                         .count()}};
    std::ofstream out(fs::path(dir) / "manifest.json");
    out << j.dump(2) << "\n";
    if (!out) throw std::runtime_error("cannot write manifest in " + dir);
  }
};

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path);
}

std::string join(const fs::path& dir, const std::string& name) { return (dir / name).string(); }

std::vector<std::string> dataset_files(const std::string& dir) {
  std::vector<std::string> out{join(dir, kNodesFile), join(dir, kEventsFile)};
  if (fs::exists(join(dir, kLabelsFile))) out.push_back(join(dir, kLabelsFile));
  return out;
}

ModuleWeights parse_weights(const std::string& text) {
  const auto list = parse_real_list("weights", text);
  if (list.size() != 3) throw ValidationError("--weights expects a,b,g");
  return {list[0], list[1], list[2]};
}

void apply_threads(int threads) {
  if (threads < 0) throw ValidationError("--threads must be >= 0");
  if (threads > 0) set_thread_count(threads);
}

// Rounds grid points so 0:1:0.1 gives 0.3 rather than 0.30000000000000004.
double tidy(double x) { return std::round(x * 1e12) / 1e12; }

std::vector<double> parse_grid_values(const std::string& name, const std::string& text) {
  if (text.empty()) throw ValidationError("grid '" + name + "' has no values");
  const auto colon = text.find(':');
  if (colon == std::string::npos) return parse_real_list(name, text);
  const auto second = text.find(':', colon + 1);
  if (second == std::string::npos) throw ValidationError("grid range must be start:stop:step");
  const double start = parse_real(name, text.substr(0, colon));
  const double stop = parse_real(name, text.substr(colon + 1, second - colon - 1));
  const double step = parse_real(name, text.substr(second + 1));
  if (!(step > 0.0) || stop < start) throw ValidationError("grid range needs step > 0, stop >= start");
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(tidy(start + static_cast<double>(i) * step));
  return out;
}

struct GridAxis {
  std::string name;
  std::vector<double> values;
};

std::vector<GridAxis> parse_grid(const std::vector<std::string>& specs) {
  std::vector<GridAxis> axes;
  for (const auto& spec : specs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw ValidationError("grid entry must be name=values: '" + spec + "'");
    GridAxis axis{spec.substr(0, eq), {}};
    if (axis.name != "alpha" && axis.name != "beta" && axis.name != "gamma" && axis.name != "n") {
      throw ValidationError("grid parameter must be alpha, beta, gamma or n; got '" + axis.name + "'");
    }
    axis.values = parse_grid_values(axis.name, spec.substr(eq + 1));
    if (axis.values.empty()) throw ValidationError("grid '" + axis.name + "' has no values");
    axes.push_back(std::move(axis));
  }
  if (axes.empty()) throw ValidationError("empty sweep grid");
  return axes;
}

TrainConfig load_train_config(const std::string& path) {
  TrainConfig cfg;
  if (!path.empty()) cfg.apply(read_key_values(path));
  return cfg;
}

// Scoring options derived from a training config.
ScoreOptions score_options_for(const TrainConfig& cfg) {
  ScoreOptions o;
  o.weights = cfg.weights;
  o.seed = cfg.seed;
  o.negatives = cfg.negatives;
  o.temperature = cfg.temperature;
  o.clusters = cfg.clusters;
  o.t_pos = cfg.t_pos;
  o.t_neg = cfg.t_neg;
  return o;
}

std::optional<NeighborSets> neighbors_from_cache(const std::string& cache, const EventDataset& data,
                                                 int t_pos, int t_neg, bool needed) {
  if (!needed || cache.empty()) return std::nullopt;
  if (fs::exists(cache)) {
    NeighborSets sets = load_neighbor_sets(cache, data);
    if (sets.t_pos() == t_pos && sets.t_neg() == t_neg) return sets;
  }
  NeighborSets sets = build_neighbor_sets(data, t_pos, t_neg);
  save_neighbor_sets(cache, data, sets);
  return sets;
}

struct Options {
  std::string config, out, data, model, scores, preset, variant, weights, strategy, neighbor_cache;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs, k;
  std::optional<double> fraction;
  std::optional<double> top_fraction;
  std::size_t grad_check = 0;
  int threads = 0;
  bool serial = false;
  std::vector<std::string> grid;
};

int cmd_generate(const Options& o, RunManifest& m) {
  SynthConfig cfg = synth_preset(o.preset.empty() ? "standard" : o.preset);
  if (!o.config.empty()) {
    for (const auto& [k, v] : read_key_values(o.config)) set_synth_key(cfg, k, v);
    m.inputs.push_back(o.config);
  }
  if (o.seed) cfg.seed = *o.seed;
  const EventDataset data = generate_synthetic(cfg);
  m.outputs = write_dataset_dir(o.out, data);
  const std::string cfg_path = join(o.out, "synth.txt");
  write_text(cfg_path, synth_config_text(cfg));
  m.outputs.push_back(cfg_path);
  m.config = parse_key_values(synth_config_text(cfg));
  m.seeds["synth"] = cfg.seed;
  std::cout << "generated " << data.events.size() << " events, " << data.ahin.node_count()
            << " nodes -> " << o.out << "\n";
  return kExitOk;
}

int cmd_inject(const Options& o, RunManifest& m) {
  InjectionConfig cfg;
  if (!o.config.empty()) {
    for (const auto& [k, v] : read_key_values(o.config)) set_injection_key(cfg, k, v);
    m.inputs.push_back(o.config);
  }
  if (o.fraction) cfg.anomaly_fraction = *o.fraction;
  if (o.k) cfg.k_candidates = *o.k;
  if (!o.strategy.empty()) set_injection_key(cfg, "strategy", o.strategy);
  if (o.seed) cfg.seed = *o.seed;
  const EventDataset data = load_dataset_dir(o.data);
  for (const auto& f : dataset_files(o.data)) m.inputs.push_back(f);
  const InjectionResult result = inject_anomalies(data, cfg);
  m.outputs = write_dataset_dir(o.out, result.dataset);
  const std::string manifest_path = join(o.out, "injection.tsv");
  write_injection_manifest(manifest_path, result.dataset, result.manifest);
  m.outputs.push_back(manifest_path);
  const std::string cfg_path = join(o.out, "injection.txt");
  write_text(cfg_path, injection_config_text(cfg));
  m.outputs.push_back(cfg_path);
  m.config = parse_key_values(injection_config_text(cfg));
  m.seeds["injection"] = cfg.seed;
  std::cout << "injected " << result.manifest.size() << " anomalous events -> " << o.out << "\n";
  return kExitOk;
}

TrainConfig resolve_train_config(const Options& o, RunManifest& m) {
  TrainConfig cfg = load_train_config(o.config);
  if (!o.config.empty()) m.inputs.push_back(o.config);
  if (!o.preset.empty()) cfg.weights = weight_preset(o.preset);
  if (!o.weights.empty()) cfg.weights = parse_weights(o.weights);
  if (o.seed) cfg.seed = *o.seed;
  if (o.epochs) cfg.epochs = *o.epochs;
  if (o.grad_check) cfg.grad_check_coordinates = o.grad_check;
  cfg.validate();
  return cfg;
}

int cmd_train(const Options& o, RunManifest& m) {
  const TrainConfig cfg = resolve_train_config(o, m);
  const EventDataset data = load_dataset_dir(o.data);
  for (const auto& f : dataset_files(o.data)) m.inputs.push_back(f);
  fs::create_directories(o.out);
  const auto neighbors =
      neighbors_from_cache(o.neighbor_cache, data, cfg.t_pos, cfg.t_neg, cfg.weights.gamma > 0.0);

  TrainOptions options;
  options.execution = o.serial ? Execution::kSerial : Execution::kParallel;
  options.checkpoint_path = join(o.out, "checkpoint.bin");
  options.neighbors = neighbors ? &*neighbors : nullptr;
  options.on_epoch = [](const EpochStats& s) {
    std::printf("epoch %zu total %.6f pairwise %.6f multivariate %.6f inter %.6f (%.2fs)\n", s.epoch,
                s.total, s.pairwise, s.multivariate, s.inter, s.seconds);
    std::fflush(stdout);
  };
  const std::string report_path = join(o.out, "report.jsonl");
  const std::string config_path = join(o.out, "config.txt");
  write_text(config_path, cfg.to_text());
  m.config = parse_key_values(cfg.to_text());
  m.seeds["train"] = cfg.seed;
  try {
    const TrainResult result = train(data, cfg, options);
    write_text(report_path, report_to_jsonl(result.report));
    if (result.report.grad_check_error) {
      std::printf("grad check max relative error %.3g\n", *result.report.grad_check_error);
    }
  } catch (const TrainingAborted& e) {
    write_text(report_path, report_to_jsonl(e.report()));
    m.outputs = {options.checkpoint_path, config_path, report_path};
    m.write(o.out);
    throw;
  }
  m.outputs = {options.checkpoint_path, config_path, report_path};
  return kExitOk;
}

int cmd_score(const Options& o, RunManifest& m) {
  const std::string checkpoint = join(o.model, "checkpoint.bin");
  const std::string config_path = join(o.model, "config.txt");
  TrainConfig cfg = load_train_config(config_path);
  const EventDataset data = load_dataset_dir(o.data);
  for (const auto& f : dataset_files(o.data)) m.inputs.push_back(f);
  m.inputs.push_back(checkpoint);
  m.inputs.push_back(config_path);

  const ParameterStore params = load_checkpoint(checkpoint);
  const ModelLayout layout = ModelLayout::bind(params, data.ahin.schema, cfg.activation);
  ScoreOptions so = score_options_for(cfg);
  if (!o.preset.empty()) so.weights = weight_preset(o.preset);
  if (!o.weights.empty()) so.weights = parse_weights(o.weights);
  if (!o.variant.empty()) so.variant = parse_variant(o.variant);
  if (o.seed) so.seed = *o.seed;
  so.execution = o.serial ? Execution::kSerial : Execution::kParallel;
  const auto neighbors =
      neighbors_from_cache(o.neighbor_cache, data, so.t_pos, so.t_neg, so.weights.gamma > 0.0);
  so.neighbors = neighbors ? &*neighbors : nullptr;

  ScoreReport report = score_events(data, params, layout, so);
  report.checkpoint_id = sha256_file(checkpoint).substr(0, 16);
  fs::create_directories(o.out);
  const std::string path = join(o.out, "scores.tsv");
  write_score_report(path, report);
  m.outputs.push_back(path);
  m.config = {{"variant", variant_name(so.variant)},
              {"weights", format_real(so.weights.alpha) + "," + format_real(so.weights.beta) + "," +
                              format_real(so.weights.gamma)}};
  m.seeds["score"] = so.seed;
  std::cout << "scored " << report.events.size() << " events -> " << path << "\n";
  return kExitOk;
}

std::string metrics_text(const std::vector<double>& scores, const std::vector<std::uint8_t>& labels,
                         std::optional<double> top_fraction) {
  std::size_t positives = 0;
  for (auto l : labels) positives += l;
  const double ap = average_precision(scores, labels);
  const double auc = roc_auc(scores, labels);
  const ThresholdChoice f1 = f1_optimal_threshold(scores, labels);
  std::ostringstream out;
  out << "events = " << scores.size() << "\n"
      << "positives = " << positives << "\n"
      << "average_precision = " << format_real(ap) << "\n"
      << "roc_auc = " << format_real(auc) << "\n"
      << "f1_threshold = " << format_real(f1.threshold) << "\n"
      << "f1 = " << format_real(f1.f1) << "\n";
  if (top_fraction) {
    const auto hits = detect_top_fraction(scores, *top_fraction);
    std::size_t tp = 0;
    for (auto i : hits) tp += labels[i];
    out << "top_fraction = " << format_real(*top_fraction) << "\n"
        << "detected = " << hits.size() << "\n"
        << "detected_positives = " << tp << "\n";
  }
  return out.str();
}

int cmd_eval(const Options& o, RunManifest& m) {
  const EventDataset data = load_dataset_dir(o.data);
  if (!data.labels) throw ValidationError("dataset " + o.data + " has no labels");
  for (const auto& f : dataset_files(o.data)) m.inputs.push_back(f);
  const ScoreReport report = read_score_report(o.scores);
  m.inputs.push_back(o.scores);
  std::map<std::string, std::uint8_t> label_of;
  for (std::size_t i = 0; i < data.events.size(); ++i) label_of[data.events[i].id] = (*data.labels)[i];
  std::vector<double> scores;
  std::vector<std::uint8_t> labels;
  for (const auto& e : report.events) {
    const auto it = label_of.find(e.event_id);
    if (it == label_of.end()) throw ValidationError("scored event '" + e.event_id + "' not in dataset");
    scores.push_back(e.total);
    labels.push_back(it->second);
  }
  const std::string text = metrics_text(scores, labels, o.top_fraction);
  fs::create_directories(o.out);
  const std::string path = join(o.out, "metrics.txt");
  write_text(path, text);
  m.outputs.push_back(path);
  std::cout << text;
  return kExitOk;
}

int cmd_sweep(const Options& o, RunManifest& m) {
  const auto axes = parse_grid(o.grid);
  const TrainConfig base = resolve_train_config(o, m);
  const EventDataset data = load_dataset_dir(o.data);
  if (!data.labels) throw ValidationError("sweep needs a labeled dataset");
  for (const auto& f : dataset_files(o.data)) m.inputs.push_back(f);
  const ScoreVariant variant = o.variant.empty() ? ScoreVariant{} : parse_variant(o.variant);
  const Execution execution = o.serial ? Execution::kSerial : Execution::kParallel;

  std::optional<NeighborSets> neighbors;
  std::ostringstream table;
  table << "param\tvalue\tap\tauc\n";
  for (const auto& axis : axes) {
    for (double value : axis.values) {
      TrainConfig cfg = base;
      if (axis.name == "n") {
        if (value < 0.0 || value != std::floor(value)) throw ValidationError("n must be a whole number");
        cfg.negatives = static_cast<std::size_t>(value);
      } else {
        cfg.set(axis.name, format_real(value));
      }
      cfg.validate();
      if (cfg.weights.gamma > 0.0 && !neighbors) {
        neighbors = build_neighbor_sets(data, cfg.t_pos, cfg.t_neg, execution);
      }
      TrainOptions options;
      options.execution = execution;
      options.neighbors = neighbors ? &*neighbors : nullptr;
      const TrainResult result = train(data, cfg, options);
      ScoreOptions so = score_options_for(cfg);
      so.variant = variant;
      so.execution = execution;
      so.neighbors = options.neighbors;
      const auto totals = score_events(data, result.params, result.layout, so).totals();
      const double ap = average_precision(totals, *data.labels);
      const double auc = roc_auc(totals, *data.labels);
      table << axis.name << '\t' << format_real(value) << '\t' << format_real(ap) << '\t'
            << format_real(auc) << '\n';
      std::printf("%s=%s AP %.4f AUC %.4f\n", axis.name.c_str(), format_real(value).c_str(), ap, auc);
      std::fflush(stdout);
    }
  }
  fs::create_directories(o.out);
  const std::string path = join(o.out, "sweep.tsv");
  write_text(path, table.str());
  m.outputs.push_back(path);
  m.config = parse_key_values(base.to_text());
  m.config.emplace_back("variant", variant_name(variant));
  for (const auto& g : o.grid) m.config.emplace_back("grid", g);
  m.seeds["train"] = base.seed;
  return kExitOk;
}

}  // namespace

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot hash " + path);
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("sha256 init failed");
  }
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 15];
  }
  return out;
}

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Anomalous event detection on attributed heterogeneous networks"};
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Key-value config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "Seed (overrides the config file)");
    sub->add_option("--out", o.out, "Output directory")->required();
    sub->add_option("--threads", o.threads, "Worker threads (0 = runtime default)");
  };
  auto with_data = [&](CLI::App* sub) {
    sub->add_option("--data", o.data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  };
  auto with_train = [&](CLI::App* sub) {
    sub->add_option("--weights", o.weights, "Module weights alpha,beta,gamma");
    sub->add_option("--preset", o.preset, "Weight preset: aminer, imdb, meituan");
    sub->add_option("--epochs", o.epochs, "Training epochs");
    sub->add_flag("--serial", o.serial, "Use the serial reference kernels");
  };

  CLI::App* generate = app.add_subcommand("generate", "Generate a synthetic dataset");
  common(generate);
  generate->add_option("--preset", o.preset, "Synthetic preset: standard, aminer-like");

  CLI::App* inject = app.add_subcommand("inject", "Inject labeled anomalous events");
  common(inject);
  with_data(inject);
  inject->add_option("--fraction", o.fraction, "Anomalous fraction of events");
  inject->add_option("--k", o.k, "Candidates per replaced node");
  inject->add_option("--strategy", o.strategy, "farthest or uniform");

  CLI::App* train_cmd = app.add_subcommand("train", "Train a model");
  common(train_cmd);
  with_data(train_cmd);
  with_train(train_cmd);
  train_cmd->add_option("--grad-check", o.grad_check, "Gradient-check this many coordinates first");
  train_cmd->add_option("--neighbor-cache", o.neighbor_cache, "Neighbor-set cache file");

  CLI::App* score = app.add_subcommand("score", "Score events with a trained model");
  common(score);
  with_data(score);
  score->add_option("--model", o.model, "Training output directory")->required()->check(CLI::ExistingDirectory);
  score->add_option("--variant", o.variant, "pairwise[:bilinear], e.g. min, avg:neg");
  score->add_option("--weights", o.weights, "Module weights alpha,beta,gamma");
  score->add_option("--preset", o.preset, "Weight preset: aminer, imdb, meituan");
  score->add_option("--neighbor-cache", o.neighbor_cache, "Neighbor-set cache file");
  score->add_flag("--serial", o.serial, "Use the serial code path");

  CLI::App* eval = app.add_subcommand("eval", "Compute AP/AUC of a score file");
  common(eval);
  with_data(eval);
  eval->add_option("--scores", o.scores, "Score report")->required()->check(CLI::ExistingFile);
  eval->add_option("--top-fraction", o.top_fraction, "Also report detection at this top fraction");

  CLI::App* sweep = app.add_subcommand("sweep", "Sweep alpha, beta, gamma or n");
  common(sweep);
  with_data(sweep);
  with_train(sweep);
  sweep->add_option("--grid", o.grid, "name=v1,v2,... or name=start:stop:step")->take_all();
  sweep->add_option("--variant", o.variant, "Scoring variant");

  std::vector<const char*> argv{"aehcl"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  RunManifest m;
  m.args = args;
  try {
    apply_threads(o.threads);
    int code = kExitOk;
    if (generate->parsed()) {
      m.command = "generate";
      code = cmd_generate(o, m);
    } else if (inject->parsed()) {
      m.command = "inject";
      code = cmd_inject(o, m);
    } else if (train_cmd->parsed()) {
      m.command = "train";
      code = cmd_train(o, m);
    } else if (score->parsed()) {
      m.command = "score";
      code = cmd_score(o, m);
    } else if (eval->parsed()) {
      m.command = "eval";
      code = cmd_eval(o, m);
    } else if (sweep->parsed()) {
      m.command = "sweep";
      code = cmd_sweep(o, m);
    }
    m.write(o.out);
    return code;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

}  // namespace aehcl::cli
