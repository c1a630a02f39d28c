// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MFN Authors.

#include <filesystem>
#include <set>
#include <sstream>

#include "doctest.h"
#include "mfn/data.hpp"
#include "mfn/error.hpp"
#include "mfn/serialization.hpp"
#include "test_util.hpp"

using namespace mfn;

namespace {

Dataset make_dataset(std::size_t n, std::size_t groups, Rng& rng) {
  Dataset d;
  for (std::size_t i = 0; i < n; ++i) {
    MultiViewSequence s;
    s.id = "s" + std::to_string(i);
    s.group = "g" + std::to_string(rng.below(groups));
    s.label = rng.uniform(-3, 3);
    const std::size_t steps = 1 + rng.below(4);
    s.views["l"] = testutil::random_tensor({steps, 2}, rng);
    s.views["a"] = testutil::random_tensor({steps, 3}, rng);
    d.push_back(std::move(s));
  }
  return d;
}

}  // namespace

TEST_CASE("two well-formed records") {
  std::istringstream in(
      R"({"id":"a","group":"spk1","label":1.5,"views":{"l":[[1,2],[3,4]],"v":[[0.5],[0.25]]}}
{"id":"b","group":"spk2","label":-2,"views":{"l":[[5,6]],"v":[[1]]}}
)");
  const Dataset d = read_dataset(in);
  REQUIRE(d.size() == 2);
  CHECK(d[0].id == "a");
  CHECK(d[0].group == "spk1");
  CHECK(d[0].label == 1.5);
  CHECK(d[0].length() == 2);
  CHECK(d[0].views.at("l").data == std::vector<double>{1, 2, 3, 4});
  CHECK(d[1].views.at("v").shape == std::vector<std::size_t>{1, 1});
}

TEST_CASE("ragged views raise an alignment error citing the id") {
  std::istringstream in(
      R"({"id":"bad7","group":"g","label":0,"views":{"l":[[1],[1],[1],[1],[1]],"v":[[1],[1],[1],[1]]}})");
  try {
    read_dataset(in);
    FAIL("expected AlignmentError");
  } catch (const AlignmentError& e) {
    CHECK(std::string(e.what()).find("bad7") != std::string::npos);
  }
}

TEST_CASE("empty input is an empty dataset") {
  std::istringstream empty("");
  CHECK(read_dataset(empty).empty());
  std::istringstream blank("\n  \n");
  CHECK(read_dataset(blank).empty());
}

TEST_CASE("malformed records") {
  std::istringstream not_json("{nope}\n");
  CHECK_THROWS_AS(read_dataset(not_json), ParseError);
  std::istringstream missing(R"({"id":"a","label":0,"views":{"l":[[1]]}})");
  CHECK_THROWS_AS(read_dataset(missing), ParseError);
  std::istringstream schema(
      R"({"id":"a","group":"g","label":0,"views":{"l":[[1]]}}
{"id":"b","group":"g","label":0,"views":{"l":[[1,2]]}})");
  CHECK_THROWS_AS(read_dataset(schema), SchemaError);
  std::istringstream dup(
      R"({"id":"a","group":"g","label":0,"views":{"l":[[1]]}}
{"id":"a","group":"g","label":0,"views":{"l":[[1]]}})");
  CHECK_THROWS_AS(read_dataset(dup), ParseError);
}

TEST_CASE("save and load round-trip exactly") {
  Rng rng(3);
  Dataset d = make_dataset(20, 5, rng);
  d[0].views["l"].data[0] = 0.1 + 0.2;  // not exactly representable in short decimal
  d[1].label = 1.0 / 3.0;
  const auto path = std::filesystem::temp_directory_path() / "mfn_test_dataset.jsonl";
  save_dataset(d, path);
  const Dataset back = load_dataset(path);
  std::filesystem::remove(path);
  REQUIRE(back.size() == d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(back[i].id == d[i].id);
    CHECK(back[i].group == d[i].group);
    CHECK(back[i].label == d[i].label);
    CHECK(back[i].views == d[i].views);
  }
  CHECK_THROWS_AS(load_dataset(path), Error);
}

TEST_CASE("ten singleton groups split 6/2/2") {
  Dataset d;
  Rng rng(1);
  for (int i = 0; i < 10; ++i) {
    MultiViewSequence s;
    s.id = "s" + std::to_string(i);
    s.group = "g" + std::to_string(i);
    s.views["x"] = Tensor::matrix(1, 1);
    d.push_back(s);
  }
  const DatasetSplit split = split_by_group(d, {0.6, 0.2, 0.2}, 5);
  CHECK(split.train.size() == 6);
  CHECK(split.valid.size() == 2);
  CHECK(split.test.size() == 2);
  const DatasetSplit again = split_by_group(d, {0.6, 0.2, 0.2}, 5);
  CHECK(split.train == again.train);
  CHECK(split.valid == again.valid);
  CHECK(split.test == again.test);
  CHECK(split.group_assignment == again.group_assignment);
  const DatasetSplit back = dataset_split_from_json(to_json(split));
  CHECK(back.train == split.train);
  CHECK(back.group_assignment == split.group_assignment);
}

TEST_CASE("split argument checks") {
  Rng rng(2);
  const Dataset d = make_dataset(10, 2, rng);
  std::set<std::string> groups;
  for (const auto& s : d) groups.insert(s.group);
  REQUIRE(groups.size() < 3);
  CHECK_THROWS_AS(split_by_group(d, {0.6, 0.2, 0.2}, 1), DomainError);
  const Dataset ok = make_dataset(30, 6, rng);
  CHECK_THROWS_AS(split_by_group(ok, {0.6, 0.3, 0.2}, 1), DomainError);
  CHECK_THROWS_AS(split_by_group(ok, {1.0, 0.0, 0.0}, 1), DomainError);
}

TEST_CASE("every group lands in exactly one split across random datasets") {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t groups = 3 + rng.below(12);
    Dataset d = make_dataset(groups + rng.below(60), groups, rng);
    std::set<std::string> present;
    for (const auto& s : d) present.insert(s.group);
    if (present.size() < 3) continue;
    const DatasetSplit split = split_by_group(d, {0.7, 0.15, 0.15}, trial);
    // Brute force: map every id to its part and check groups never straddle parts.
    std::map<std::string, std::set<int>> parts_of_group;
    std::map<std::string, std::string> group_of;
    for (const auto& s : d) group_of[s.id] = s.group;
    std::size_t total = 0;
    for (int part = 0; part < 3; ++part) {
      const auto& ids = split.ids(static_cast<SplitPart>(part));
      CHECK_FALSE(ids.empty());
      total += ids.size();
      for (const auto& id : ids) parts_of_group[group_of.at(id)].insert(part);
    }
    CHECK(total == d.size());
    for (const auto& [g, parts] : parts_of_group) {
      CHECK(parts.size() == 1);
      CHECK(static_cast<int>(split.group_assignment.at(g)) == *parts.begin());
    }
    CHECK(parts_of_group.size() == present.size());
  }
}

TEST_CASE("select keeps the requested order") {
  Rng rng(5);
  const Dataset d = make_dataset(5, 3, rng);
  const Dataset s = select(d, {"s3", "s1"});
  REQUIRE(s.size() == 2);
  CHECK(s[0].id == "s3");
  CHECK(s[1].id == "s1");
  CHECK_THROWS(select(d, {"nope"}));
}
