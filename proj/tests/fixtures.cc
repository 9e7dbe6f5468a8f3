#include "fixtures.h"

#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <sstream>

namespace aehcl::testing {

EventDataset random_dataset(std::uint64_t seed, std::size_t events, std::size_t feature_width,
                            std::size_t context_types, std::size_t nodes_per_type) {
  Rng rng(seed);
  AhinBuilder builder(feature_width);
  const TypeId center = builder.add_type("q");
  std::vector<TypeId> types;
  for (std::size_t t = 0; t < context_types; ++t) types.push_back(builder.add_type("c" + std::to_string(t)));
  std::vector<double> row(feature_width);
  for (std::size_t i = 0; i < events; ++i) {
    for (double& x : row) x = rng.normal();
    builder.add_node("q" + std::to_string(i), center, row);
  }
  std::vector<std::vector<NodeId>> pools(context_types);
  NodeId next = static_cast<NodeId>(events);
  for (std::size_t t = 0; t < context_types; ++t) {
    for (std::size_t j = 0; j < nodes_per_type; ++j) {
      for (double& x : row) x = rng.normal();
      builder.add_node("c" + std::to_string(t) + "_" + std::to_string(j), types[t], row);
      pools[t].push_back(next++);
    }
  }
  EventDataset data;
  data.ahin = builder.build();
  data.ahin.schema.set_center(center);
  for (std::size_t i = 0; i < events; ++i) {
    Event e;
    e.id = "e" + std::to_string(i);
    e.center = static_cast<NodeId>(i);
    for (std::size_t t = 0; t < context_types; ++t) {
      auto pool = pools[t];
      rng.shuffle(pool.begin(), pool.end());
      const std::size_t take = 1 + rng.uniform_index(std::min<std::size_t>(3, pool.size()));
      e.context.insert(e.context.end(), pool.begin(), pool.begin() + take);
    }
    data.events.push_back(std::move(e));
  }
  validate_dataset(data);
  return data;
}

EventDataset separable_dataset(std::uint64_t seed, std::size_t events, std::size_t feature_width) {
  Rng rng(seed);
  AhinBuilder builder(feature_width);
  const TypeId center = builder.add_type("q");
  const TypeId a = builder.add_type("a");
  const TypeId b = builder.add_type("b");
  auto features = [&](int cluster) {
    std::vector<double> row(feature_width);
    for (std::size_t j = 0; j < feature_width; ++j) {
      const double mean = (static_cast<int>(j % 2) == cluster) ? 3.0 : -3.0;
      row[j] = mean + 0.3 * rng.normal();
    }
    return row;
  };
  for (std::size_t i = 0; i < events; ++i) builder.add_node("q" + std::to_string(i), center, features(i % 2));
  const std::size_t per_type = 12;
  std::vector<NodeId> a_nodes, b_nodes;
  NodeId next = static_cast<NodeId>(events);
  for (std::size_t j = 0; j < per_type; ++j) {
    builder.add_node("a" + std::to_string(j), a, features(j % 2));
    a_nodes.push_back(next++);
  }
  for (std::size_t j = 0; j < per_type; ++j) {
    builder.add_node("b" + std::to_string(j), b, features(j % 2));
    b_nodes.push_back(next++);
  }
  EventDataset data;
  data.ahin = builder.build();
  data.ahin.schema.set_center(center);
  for (std::size_t i = 0; i < events; ++i) {
    const std::size_t cluster = i % 2;
    Event e;
    e.id = "e" + std::to_string(i);
    e.center = static_cast<NodeId>(i);
    auto pick = [&](const std::vector<NodeId>& pool) {
      while (true) {
        const std::size_t j = 2 * rng.uniform_index(per_type / 2) + cluster;
        if (std::find(e.context.begin(), e.context.end(), pool[j]) == e.context.end()) return pool[j];
      }
    };
    e.context.push_back(pick(a_nodes));
    e.context.push_back(pick(a_nodes));
    e.context.push_back(pick(b_nodes));
    data.events.push_back(std::move(e));
  }
  validate_dataset(data);
  return data;
}

std::vector<double> random_vector(Rng& rng, std::size_t n, double scale) {
  std::vector<double> v(n);
  for (double& x : v) x = scale * rng.normal();
  return v;
}

Tensor random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double scale) {
  Tensor m(rows, cols);
  for (double& x : m.values()) x = scale * rng.normal();
  return m;
}

Rows as_rows(const std::vector<std::vector<double>>& v) { return Rows(v.begin(), v.end()); }

TempDir::TempDir() {
  static std::uint64_t counter = 0;
  const auto base = std::filesystem::temp_directory_path();
  Rng rng(Rng::derive(static_cast<std::uint64_t>(::getpid()), "tempdir", counter++));
  path_ = base / ("aehcl_test_" + std::to_string(rng.uniform_index(1u << 30)) + "_" +
                  std::to_string(counter));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace aehcl::testing
