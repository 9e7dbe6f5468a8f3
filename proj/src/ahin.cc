#include "aehcl/ahin.h"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unordered_set>

namespace aehcl {
namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

[[noreturn]] void fail(const std::string& path, std::size_t line, const std::string& what) {
  throw ValidationError(path + ":" + std::to_string(line) + ": " + what);
}

double parse_double(std::string_view token, const std::string& path, std::size_t line) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  // from_chars rejects a leading '+'.
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || token.empty()) {
    fail(path, line, "malformed real '" + std::string(token) + "'");
  }
  return value;
}

template <class Fn>
void for_each_record(const std::string& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open " + path);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    fn(std::string_view(line), number);
  }
}

std::string format_double(double v) {
  char buf[32];
  const auto result = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, result.ptr);
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace

TypeId Schema::add_type(const std::string& name, bool is_center) {
  if (by_name_.count(name)) throw ValidationError("duplicate node type '" + name + "'");
  types_.push_back({name, false});
  const auto id = static_cast<TypeId>(types_.size() - 1);
  by_name_.emplace(name, id);
  if (is_center) set_center(id);
  return id;
}

void Schema::set_center(TypeId type) {
  if (center_ >= 0 && center_ != type) {
    throw ValidationError("schema already has center type '" + types_[center_].name + "'");
  }
  center_ = type;
  types_.at(type).is_center = true;
}

std::optional<TypeId> Schema::find(const std::string& name) const {
  auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

TypeId Schema::index(const std::string& name) const {
  auto t = find(name);
  if (!t) throw ValidationError("unknown node type '" + name + "'");
  return *t;
}

TypeId Schema::center_type() const {
  if (center_ < 0) throw ValidationError("schema has no center type");
  return center_;
}

std::vector<TypeId> Schema::context_types() const {
  std::vector<TypeId> out;
  for (std::size_t t = 0; t < types_.size(); ++t) {
    if (static_cast<TypeId>(t) != center_) out.push_back(static_cast<TypeId>(t));
  }
  return out;
}

std::vector<NodeId> Ahin::nodes_of_type(TypeId t) const {
  std::vector<NodeId> out;
  for (std::size_t v = 0; v < node_types.size(); ++v) {
    if (node_types[v] == t) out.push_back(static_cast<NodeId>(v));
  }
  return out;
}

NodeId AhinBuilder::add_node(const std::string& external_id, TypeId type,
                             std::span<const double> features) {
  if (features.size() > width_) {
    throw ValidationError("node '" + external_id + "' has " + std::to_string(features.size()) +
                          " features; width is " + std::to_string(width_));
  }
  if (type < 0 || static_cast<std::size_t>(type) >= ahin_.schema.size()) {
    throw ValidationError("node '" + external_id + "' has an unregistered type");
  }
  const auto id = static_cast<NodeId>(ahin_.node_types.size());
  if (!ahin_.id_index.emplace(external_id, id).second) {
    throw ValidationError("duplicate node id '" + external_id + "'");
  }
  ahin_.external_ids.push_back(external_id);
  ahin_.node_types.push_back(type);
  rows_.insert(rows_.end(), features.begin(), features.end());
  rows_.resize(rows_.size() + (width_ - features.size()), 0.0);
  return id;
}

Ahin AhinBuilder::build() {
  Ahin out = std::move(ahin_);
  out.features = Tensor(out.node_types.size(), width_);
  std::copy(rows_.begin(), rows_.end(), out.features.data());
  ahin_ = Ahin{};
  rows_.clear();
  return out;
}

void validate_dataset(EventDataset& dataset) {
  Ahin& g = dataset.ahin;
  const std::size_t n = g.node_count();
  if (g.features.rows() != n) throw ValidationError("feature row count differs from node count");
  if (dataset.events.empty()) throw ValidationError("dataset has no events");

  auto check_node = [&](NodeId v, const Event& e) {
    if (v < 0 || static_cast<std::size_t>(v) >= n) {
      throw ValidationError("event '" + e.id + "': unknown node");
    }
  };
  if (!g.schema.has_center()) {
    check_node(dataset.events.front().center, dataset.events.front());
    g.schema.set_center(g.type_of(dataset.events.front().center));
  }
  const TypeId center_type = g.schema.center_type();

  std::unordered_set<NodeId> centers;
  std::unordered_set<std::string> ids;
  for (const Event& e : dataset.events) {
    check_node(e.center, e);
    if (g.type_of(e.center) != center_type) {
      throw ValidationError("event '" + e.id + "': center is not of the center type");
    }
    if (!centers.insert(e.center).second) {
      throw ValidationError("event '" + e.id + "': duplicate center '" +
                            g.external_ids[e.center] + "'");
    }
    if (!ids.insert(e.id).second) throw ValidationError("duplicate event id '" + e.id + "'");
    if (e.context.empty()) throw ValidationError("event '" + e.id + "': empty context");
    std::vector<NodeId> seen = e.context;
    for (NodeId v : seen) {
      check_node(v, e);
      if (g.type_of(v) == center_type) {
        throw ValidationError("event '" + e.id + "': context node of the center type");
      }
    }
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end()) {
      throw ValidationError("event '" + e.id + "': duplicate node in event");
    }
  }
  if (dataset.labels && dataset.labels->size() != dataset.events.size()) {
    throw ValidationError("label count differs from event count");
  }
}

EventDataset load_dataset(const std::string& nodes_path, const std::string& events_path,
                          const std::optional<std::string>& labels_path) {
  EventDataset dataset;
  Ahin& g = dataset.ahin;
  std::vector<double> rows;
  std::size_t width = 0;
  bool have_width = false;

  for_each_record(nodes_path, [&](std::string_view line, std::size_t number) {
    auto fields = split(line, '\t');
    if (fields.size() != 3) fail(nodes_path, number, "expected 3 tab-separated fields");
    const std::string id(fields[0]);
    const std::string type_name(fields[1]);
    if (id.empty() || type_name.empty()) fail(nodes_path, number, "empty node id or type");
    auto values = split(fields[2], ',');
    if (!have_width) {
      width = values.size();
      have_width = true;
    } else if (values.size() != width) {
      fail(nodes_path, number,
           "feature-width mismatch: " + std::to_string(values.size()) + " vs " +
               std::to_string(width));
    }
    auto type = g.schema.find(type_name);
    const TypeId t = type ? *type : g.schema.add_type(type_name);
    const auto dense = static_cast<NodeId>(g.node_types.size());
    if (!g.id_index.emplace(id, dense).second) {
      fail(nodes_path, number, "duplicate node id '" + id + "'");
    }
    g.external_ids.push_back(id);
    g.node_types.push_back(t);
    for (auto token : values) rows.push_back(parse_double(token, nodes_path, number));
  });
  g.features = Tensor(g.node_types.size(), width);
  std::copy(rows.begin(), rows.end(), g.features.data());

  auto resolve = [&](std::string_view token, std::size_t number) {
    auto it = g.id_index.find(std::string(token));
    if (it == g.id_index.end()) {
      fail(events_path, number, "unknown node '" + std::string(token) + "'");
    }
    return it->second;
  };
  std::unordered_set<NodeId> centers;
  for_each_record(events_path, [&](std::string_view line, std::size_t number) {
    auto fields = split(line, '\t');
    if (fields.size() != 3) fail(events_path, number, "expected 3 tab-separated fields");
    Event e;
    e.id = std::string(fields[0]);
    if (e.id.empty()) fail(events_path, number, "empty event id");
    e.center = resolve(fields[1], number);
    if (!centers.insert(e.center).second) {
      fail(events_path, number, "duplicate center '" + std::string(fields[1]) + "'");
    }
    if (fields[2].empty()) fail(events_path, number, "empty context");
    for (auto token : split(fields[2], ',')) e.context.push_back(resolve(token, number));
    dataset.events.push_back(std::move(e));
  });

  if (labels_path) {
    std::unordered_map<std::string, std::size_t> event_index;
    for (std::size_t i = 0; i < dataset.events.size(); ++i) {
      event_index.emplace(dataset.events[i].id, i);
    }
    std::vector<int> labels(dataset.events.size(), -1);
    for_each_record(*labels_path, [&](std::string_view line, std::size_t number) {
      auto fields = split(line, '\t');
      if (fields.size() != 2) fail(*labels_path, number, "expected 2 tab-separated fields");
      auto it = event_index.find(std::string(fields[0]));
      if (it == event_index.end()) {
        fail(*labels_path, number, "unknown event '" + std::string(fields[0]) + "'");
      }
      if (fields[1] != "0" && fields[1] != "1") fail(*labels_path, number, "label must be 0 or 1");
      if (labels[it->second] != -1) fail(*labels_path, number, "duplicate label");
      labels[it->second] = fields[1] == "1" ? 1 : 0;
    });
    std::vector<std::uint8_t> flags(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] < 0) {
        throw ValidationError(*labels_path + ": no label for event '" + dataset.events[i].id + "'");
      }
      flags[i] = static_cast<std::uint8_t>(labels[i]);
    }
    dataset.labels = std::move(flags);
  }

  validate_dataset(dataset);
  return dataset;
}

void write_nodes(const std::string& path, const Ahin& ahin) {
  std::string out;
  for (std::size_t v = 0; v < ahin.node_count(); ++v) {
    out += ahin.external_ids[v];
    out += '\t';
    out += ahin.schema.type(ahin.node_types[v]).name;
    out += '\t';
    auto row = ahin.features.row(v);
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out += ',';
      out += format_double(row[j]);
    }
    out += '\n';
  }
  write_file(path, out);
}

void write_events(const std::string& path, const EventDataset& dataset) {
  const Ahin& g = dataset.ahin;
  std::string out;
  for (const Event& e : dataset.events) {
    out += e.id;
    out += '\t';
    out += g.external_ids[e.center];
    out += '\t';
    for (std::size_t j = 0; j < e.context.size(); ++j) {
      if (j) out += ',';
      out += g.external_ids[e.context[j]];
    }
    out += '\n';
  }
  write_file(path, out);
}

void write_labels(const std::string& path, const EventDataset& dataset) {
  if (!dataset.labels) throw std::invalid_argument("dataset has no labels");
  std::string out;
  for (std::size_t i = 0; i < dataset.events.size(); ++i) {
    out += dataset.events[i].id;
    out += (*dataset.labels)[i] ? "\t1\n" : "\t0\n";
  }
  write_file(path, out);
}

EventDataset load_dataset_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path base(dir);
  std::optional<std::string> labels;
  if (fs::exists(base / kLabelsFile)) labels = (base / kLabelsFile).string();
  return load_dataset((base / kNodesFile).string(), (base / kEventsFile).string(), labels);
}

std::vector<std::string> write_dataset_dir(const std::string& dir, const EventDataset& dataset) {
  namespace fs = std::filesystem;
  const fs::path base(dir);
  fs::create_directories(base);
  std::vector<std::string> written{(base / kNodesFile).string(), (base / kEventsFile).string()};
  write_nodes(written[0], dataset.ahin);
  write_events(written[1], dataset);
  if (dataset.labels) {
    written.push_back((base / kLabelsFile).string());
    write_labels(written.back(), dataset);
  } else if (fs::exists(base / kLabelsFile)) {
    fs::remove(base / kLabelsFile);
  }
  return written;
}

namespace {

std::size_t count_shared(std::vector<NodeId> a, std::vector<NodeId> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t shared = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++shared;
      ++ia;
      ++ib;
    }
  }
  return shared;
}

}  // namespace

std::size_t metapath_count(const Event& a, const Event& b) {
  return count_shared(a.context, b.context);
}

std::size_t shared_node_count(const Event& a, const Event& b) {
  return count_shared(event_nodes(a), event_nodes(b));
}

std::vector<NodeId> event_nodes(const Event& e) {
  std::vector<NodeId> nodes;
  nodes.reserve(e.context.size() + 1);
  nodes.push_back(e.center);
  nodes.insert(nodes.end(), e.context.begin(), e.context.end());
  return nodes;
}

}  // namespace aehcl
