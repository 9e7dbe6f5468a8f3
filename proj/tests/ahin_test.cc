#include <gtest/gtest.h>

#include "aehcl/ahin.h"
#include "aehcl/config.h"
#include "fixtures.h"

namespace aehcl {
namespace {

using testing::TempDir;
using testing::write_file;

void expect_error(const std::function<void()>& fn, const std::string& fragment) {
  try {
    fn();
    FAIL() << "expected an error containing '" << fragment << "'";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
  }
}

Event make_event(std::string id, NodeId center, std::vector<NodeId> context) {
  return Event{std::move(id), center, std::move(context)};
}

TEST(LoadDataset, MinimalFixture) {
  TempDir dir;
  write_file(dir.file("n.tsv"), "p1\tpaper\t1,2\na1\tauthor\t3,4\nv1\tvenue\t5,6\n");
  write_file(dir.file("e.tsv"), "ev1\tp1\ta1,v1\n");
  const EventDataset d = load_dataset(dir.file("n.tsv"), dir.file("e.tsv"));
  EXPECT_EQ(d.events.size(), 1u);
  EXPECT_EQ(d.ahin.node_count(), 3u);
  EXPECT_EQ(d.ahin.feature_width(), 2u);
  EXPECT_EQ(d.ahin.schema.type(d.ahin.schema.center_type()).name, "paper");
  EXPECT_EQ(d.ahin.feature(2)[1], 6.0);
  EXPECT_FALSE(d.labels.has_value());
}

TEST(LoadDataset, UnknownNode) {
  TempDir dir;
  write_file(dir.file("n.tsv"), "p1\tpaper\t1\na1\tauthor\t3\n");
  write_file(dir.file("e.tsv"), "ev1\tp1\ta1,99\n");
  expect_error([&] { load_dataset(dir.file("n.tsv"), dir.file("e.tsv")); }, "unknown node");
}

TEST(LoadDataset, DuplicateCenter) {
  TempDir dir;
  write_file(dir.file("n.tsv"), "p1\tpaper\t1\na1\tauthor\t3\na2\tauthor\t4\n");
  write_file(dir.file("e.tsv"), "ev1\tp1\ta1\nev2\tp1\ta2\n");
  expect_error([&] { load_dataset(dir.file("n.tsv"), dir.file("e.tsv")); }, "duplicate center");
}

TEST(LoadDataset, ErrorsReportLineNumbers) {
  TempDir dir;
  write_file(dir.file("n.tsv"), "p1\tpaper\t1,2\na1\tauthor\t3\n");
  write_file(dir.file("e.tsv"), "ev1\tp1\ta1\n");
  expect_error([&] { load_dataset(dir.file("n.tsv"), dir.file("e.tsv")); }, "n.tsv:2: feature-width mismatch");

  write_file(dir.file("n.tsv"), "p1\tpaper\t1\na1\tauthor\tx\n");
  expect_error([&] { load_dataset(dir.file("n.tsv"), dir.file("e.tsv")); }, "n.tsv:2");

  write_file(dir.file("n.tsv"), "p1\tpaper\t1\na1\tauthor\t2\n");
  write_file(dir.file("e.tsv"), "ev1\tp1\n");
  expect_error([&] { load_dataset(dir.file("n.tsv"), dir.file("e.tsv")); }, "e.tsv:1");
}

TEST(LoadDataset, EventRules) {
  TempDir dir;
  write_file(dir.file("n.tsv"), "p1\tpaper\t1\np2\tpaper\t1\na1\tauthor\t3\n");
  write_file(dir.file("e.tsv"), "ev1\tp1\ta1,a1\n");
  expect_error([&] { load_dataset(dir.file("n.tsv"), dir.file("e.tsv")); }, "duplicate node in event");
  write_file(dir.file("e.tsv"), "ev1\tp1\ta1\nev2\ta1\tp2\n");
  expect_error([&] { load_dataset(dir.file("n.tsv"), dir.file("e.tsv")); }, "center");
}

TEST(LoadDataset, Labels) {
  TempDir dir;
  write_file(dir.file("n.tsv"), "p1\tpaper\t1\np2\tpaper\t2\na1\tauthor\t3\n");
  write_file(dir.file("e.tsv"), "ev1\tp1\ta1\nev2\tp2\ta1\n");
  write_file(dir.file("l.tsv"), "ev2\t1\nev1\t0\n");
  const auto d = load_dataset(dir.file("n.tsv"), dir.file("e.tsv"), dir.file("l.tsv"));
  ASSERT_TRUE(d.labels);
  EXPECT_EQ(*d.labels, (std::vector<std::uint8_t>{0, 1}));
  write_file(dir.file("l.tsv"), "ev2\t1\n");
  expect_error([&] { load_dataset(dir.file("n.tsv"), dir.file("e.tsv"), dir.file("l.tsv")); },
               "no label");
}

TEST(Builder, ZeroPadsNarrowRowsAndRejectsWide) {
  AhinBuilder b(3);
  const TypeId t = b.add_type("x");
  const std::vector<double> narrow{1.0}, wide{1, 2, 3, 4};
  b.add_node("n0", t, narrow);
  EXPECT_THROW(b.add_node("n1", t, wide), ValidationError);
  EXPECT_THROW(b.add_node("n0", t, narrow), ValidationError);
  const Ahin g = b.build();
  EXPECT_EQ(g.feature(0)[0], 1.0);
  EXPECT_EQ(g.feature(0)[2], 0.0);
}

TEST(Schema, UniqueNamesAndSingleCenter) {
  Schema s;
  const TypeId a = s.add_type("a");
  s.add_type("b");
  EXPECT_THROW(s.add_type("a"), ValidationError);
  EXPECT_FALSE(s.has_center());
  s.set_center(a);
  EXPECT_EQ(s.center_type(), a);
  EXPECT_THROW(s.set_center(1), ValidationError);
  EXPECT_EQ(s.context_types(), std::vector<TypeId>{1});
}

TEST(MetapathCount, Examples) {
  // Node ids: centers 0, 1; context a..d = 10..13.
  EXPECT_EQ(metapath_count(make_event("x", 0, {10, 11, 12}), make_event("y", 1, {11, 12, 13})), 2u);
  EXPECT_EQ(metapath_count(make_event("x", 0, {10, 11}), make_event("y", 1, {12, 13})), 0u);
  EXPECT_EQ(metapath_count(make_event("x", 0, {10, 11, 12, 13}), make_event("y", 1, {13, 12, 11, 10})),
            4u);
}

TEST(SharedNodeCount, Examples) {
  const Event a = make_event("x", 0, {10, 11});
  const Event b = make_event("y", 1, {10, 12});
  EXPECT_EQ(shared_node_count(a, b), 1u);
  EXPECT_EQ(shared_node_count(a, b), metapath_count(a, b));
  EXPECT_EQ(shared_node_count(make_event("x", 0, {10}), make_event("y", 1, {11})), 0u);
}

TEST(Counting, SymmetricAndBounded) {
  const EventDataset d = testing::random_dataset(5, 30, 2, 3, 5);
  for (const auto& a : d.events) {
    for (const auto& b : d.events) {
      if (&a == &b) continue;
      EXPECT_EQ(metapath_count(a, b), metapath_count(b, a));
      EXPECT_EQ(shared_node_count(a, b), shared_node_count(b, a));
      EXPECT_LE(metapath_count(a, b), std::min(a.context.size(), b.context.size()));
    }
  }
}

TEST(EventNodes, CenterFirst) {
  const auto nodes = event_nodes(make_event("x", 4, {7, 2}));
  EXPECT_EQ(nodes, (std::vector<NodeId>{4, 7, 2}));
}

TEST(RoundTrip, WriteThenLoadIsExact) {
  TempDir dir;
  EventDataset d = testing::random_dataset(9, 12, 5);
  d.ahin.features(0, 0) = 0.1;
  d.ahin.features(1, 1) = -1e-310;  // subnormal
  d.ahin.features(2, 2) = 123456789.123456789;
  d.labels = std::vector<std::uint8_t>(12, 0);
  (*d.labels)[3] = 1;
  const auto written = write_dataset_dir(dir.path().string(), d);
  EXPECT_EQ(written.size(), 3u);
  const EventDataset back = load_dataset_dir(dir.path().string());
  EXPECT_EQ(back.ahin.external_ids, d.ahin.external_ids);
  EXPECT_EQ(back.ahin.node_types, d.ahin.node_types);
  EXPECT_EQ(back.ahin.features, d.ahin.features);
  ASSERT_EQ(back.events.size(), d.events.size());
  for (std::size_t i = 0; i < d.events.size(); ++i) {
    EXPECT_EQ(back.events[i].id, d.events[i].id);
    EXPECT_EQ(back.events[i].center, d.events[i].center);
    EXPECT_EQ(back.events[i].context, d.events[i].context);
  }
  EXPECT_EQ(back.labels, d.labels);
}

TEST(Config, KeyValuesAndScalars) {
  const auto kv = parse_key_values("# comment\n a = 1 \n\nb=x y # tail\n");
  ASSERT_EQ(kv.size(), 2u);
  EXPECT_EQ(kv[0], (std::pair<std::string, std::string>{"a", "1"}));
  EXPECT_EQ(kv[1].second, "x y");
  EXPECT_THROW(parse_key_values("novalue\n"), ValidationError);
  EXPECT_EQ(parse_real("k", "0.25"), 0.25);
  EXPECT_THROW(parse_real("k", "0.25x"), ValidationError);
  EXPECT_EQ(parse_uint("k", "12"), 12u);
  EXPECT_THROW(parse_uint("k", "-1"), ValidationError);
  EXPECT_EQ(parse_real_list("k", "1,0.8,0.2"), (std::vector<double>{1, 0.8, 0.2}));
  EXPECT_EQ(format_real(0.8), "0.8");
  EXPECT_EQ(parse_real("k", format_real(0.1 + 0.2)), 0.1 + 0.2);
}

}  // namespace
}  // namespace aehcl
