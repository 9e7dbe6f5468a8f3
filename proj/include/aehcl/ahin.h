#ifndef AEHCL_AHIN_H_
#define AEHCL_AHIN_H_

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "aehcl/tensor.h"

namespace aehcl {

// Input that violates a documented format or contract. The CLI maps it to the
// validation exit code.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using NodeId = std::int32_t;
using TypeId = std::int32_t;

struct NodeType {
  std::string name;
  bool is_center = false;
};

// Star schema: one center type linked to every context type.
class Schema {
 public:
  TypeId add_type(const std::string& name, bool is_center = false);
  void set_center(TypeId type);

  std::optional<TypeId> find(const std::string& name) const;
  TypeId index(const std::string& name) const;
  const NodeType& type(TypeId t) const { return types_.at(t); }
  std::size_t size() const { return types_.size(); }
  TypeId center_type() const;
  bool has_center() const { return center_ >= 0; }
  std::vector<TypeId> context_types() const;

 private:
  std::vector<NodeType> types_;
  std::unordered_map<std::string, TypeId> by_name_;
  TypeId center_ = -1;
};

// Attributed heterogeneous network. Nodes are dense ids 0..|V|-1 in file order;
// the external id strings are the persisted id table.
struct Ahin {
  Schema schema;
  std::vector<std::string> external_ids;
  std::vector<TypeId> node_types;
  Tensor features;  // |V| x k
  std::unordered_map<std::string, NodeId> id_index;

  std::size_t node_count() const { return node_types.size(); }
  std::size_t feature_width() const { return features.cols(); }
  TypeId type_of(NodeId v) const { return node_types[v]; }
  std::span<const double> feature(NodeId v) const { return features.row(v); }
  std::vector<NodeId> nodes_of_type(TypeId t) const;
};

// Incremental construction; narrower feature rows are zero-padded to the
// configured width, wider rows are rejected.
class AhinBuilder {
 public:
  explicit AhinBuilder(std::size_t feature_width) : width_(feature_width) {}

  TypeId add_type(const std::string& name) { return ahin_.schema.add_type(name); }
  NodeId add_node(const std::string& external_id, TypeId type, std::span<const double> features);
  Ahin build();

 private:
  std::size_t width_;
  Ahin ahin_;
  std::vector<double> rows_;
};

struct Event {
  std::string id;
  NodeId center = 0;
  std::vector<NodeId> context;
};

struct EventDataset {
  Ahin ahin;
  std::vector<Event> events;
  std::optional<std::vector<std::uint8_t>> labels;

  std::size_t event_count() const { return events.size(); }
};

// Checks every dataset invariant; throws ValidationError on the first failure.
// Sets the schema's center type from the event centers if it is not set yet.
void validate_dataset(EventDataset& dataset);

// nodes: `node_id<TAB>type_name<TAB>f_1,...,f_k`
// events: `event_id<TAB>center_node_id<TAB>ctx_1,ctx_2,...`
// labels: `event_id<TAB>{0|1}`
EventDataset load_dataset(const std::string& nodes_path, const std::string& events_path,
                          const std::optional<std::string>& labels_path = std::nullopt);

// Doubles are written in shortest round-trip form, so reloading is bit-exact.
void write_nodes(const std::string& path, const Ahin& ahin);
void write_events(const std::string& path, const EventDataset& dataset);
void write_labels(const std::string& path, const EventDataset& dataset);

// Standard file names inside a dataset directory.
inline constexpr const char* kNodesFile = "nodes.tsv";
inline constexpr const char* kEventsFile = "events.tsv";
inline constexpr const char* kLabelsFile = "labels.tsv";

EventDataset load_dataset_dir(const std::string& dir);
// Returns the paths written.
std::vector<std::string> write_dataset_dir(const std::string& dir, const EventDataset& dataset);

// Meta-path instances center_a - u - center_b, i.e. shared context nodes.
std::size_t metapath_count(const Event& a, const Event& b);
// Shared nodes over the full node sets (center included).
std::size_t shared_node_count(const Event& a, const Event& b);

// Center followed by context, the order used throughout the model.
std::vector<NodeId> event_nodes(const Event& e);

}  // namespace aehcl

#endif  // AEHCL_AHIN_H_
