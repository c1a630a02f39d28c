// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MFN Authors.

#include "mfn/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <unordered_set>

#include "json.hpp"
#include "mfn/error.hpp"
#include "mfn/random.hpp"

namespace mfn {

using nlohmann::json;

std::size_t MultiViewSequence::length() const { return views.empty() ? 0 : views.begin()->second.rows(); }

std::vector<ViewSchema> schema_of(const MultiViewSequence& seq) {
  std::vector<ViewSchema> out;
  for (const auto& [name, m] : seq.views) out.push_back({name, m.cols()});
  return out;
}

void validate_sequence(const MultiViewSequence& seq) {
  if (seq.views.empty()) throw SchemaError("sequence '" + seq.id + "' has no views");
  std::size_t length = 0;
  for (const auto& [name, m] : seq.views) {
    if (m.rank() != 2 || m.size() != shape_product(m.shape)) {
      throw DimensionError("sequence '" + seq.id + "' view '" + name + "' is not a matrix");
    }
    if (m.rows() == 0) throw AlignmentError("sequence '" + seq.id + "' view '" + name + "' has no time steps");
    if (length == 0) length = m.rows();
    if (m.rows() != length) {
      throw AlignmentError("sequence '" + seq.id + "' view '" + name + "' has " + std::to_string(m.rows()) +
                           " steps, expected " + std::to_string(length));
    }
    if (!m.all_finite()) throw NumericError("sequence '" + seq.id + "' view '" + name + "' has non-finite values");
  }
  if (!std::isfinite(seq.label)) throw NumericError("sequence '" + seq.id + "' has a non-finite label");
}

namespace {

MultiViewSequence parse_record(const json& j, std::size_t line) {
  auto where = [&] { return "line " + std::to_string(line) + ": "; };
  if (!j.is_object()) throw ParseError(where() + "record is not a JSON object");
  for (const char* key : {"id", "group", "label", "views"}) {
    if (!j.contains(key)) throw ParseError(where() + "missing field '" + key + "'");
  }
  MultiViewSequence seq;
  if (!j["id"].is_string() || !j["group"].is_string()) throw ParseError(where() + "'id' and 'group' must be strings");
  seq.id = j["id"].get<std::string>();
  seq.group = j["group"].get<std::string>();
  if (!j["label"].is_number()) throw ParseError(where() + "'label' must be a number");
  seq.label = j["label"].get<double>();
  if (!j["views"].is_object() || j["views"].empty()) throw ParseError(where() + "'views' must be a non-empty object");
  for (const auto& [name, rows] : j["views"].items()) {
    if (!rows.is_array()) throw ParseError(where() + "view '" + name + "' is not an array of rows");
    const std::size_t t = rows.size();
    const std::size_t width = t ? rows[0].size() : 0;
    Tensor m = Tensor::matrix(t, width);
    for (std::size_t r = 0; r < t; ++r) {
      const json& row = rows[r];
      if (!row.is_array() || row.size() != width) {
        throw ParseError(where() + "view '" + name + "' row " + std::to_string(r) + " has inconsistent width");
      }
      for (std::size_t c = 0; c < width; ++c) {
        if (!row[c].is_number()) throw ParseError(where() + "view '" + name + "' holds a non-numeric value");
        m.at(r, c) = row[c].get<double>();
      }
    }
    seq.views.emplace(name, std::move(m));
  }
  return seq;
}

}  // namespace

Dataset read_dataset(std::istream& in) {
  Dataset data;
  std::vector<ViewSchema> schema;
  std::unordered_set<std::string> ids;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); })) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      throw ParseError("line " + std::to_string(line) + ": " + e.what());
    }
    MultiViewSequence seq = parse_record(j, line);
    try {
      validate_sequence(seq);
    } catch (const Error& e) {
      // Keep the error type, prefix the location.
      const std::string msg = "line " + std::to_string(line) + ": " + e.what();
      if (dynamic_cast<const AlignmentError*>(&e)) throw AlignmentError(msg);
      if (dynamic_cast<const NumericError*>(&e)) throw NumericError(msg);
      throw ParseError(msg);
    }
    const auto s = schema_of(seq);
    if (schema.empty()) {
      schema = s;
    } else if (s != schema) {
      std::string want;
      for (const auto& v : schema) want += " " + v.name + ":" + std::to_string(v.dim);
      throw SchemaError("line " + std::to_string(line) + ": sequence '" + seq.id +
                        "' does not match the dataset schema {" + want + " }");
    }
    if (!ids.insert(seq.id).second) {
      throw ParseError("line " + std::to_string(line) + ": duplicate sequence id '" + seq.id + "'");
    }
    data.push_back(std::move(seq));
  }
  return data;
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset '" + path.string() + "'");
  return read_dataset(in);
}

void write_dataset(const Dataset& data, std::ostream& out) {
  for (const auto& seq : data) {
    json j;
    j["id"] = seq.id;
    j["group"] = seq.group;
    j["label"] = seq.label;
    json views = json::object();
    for (const auto& [name, m] : seq.views) {
      json rows = json::array();
      for (std::size_t r = 0; r < m.rows(); ++r) {
        const auto row = m.row(r);
        rows.push_back(std::vector<double>(row.begin(), row.end()));
      }
      views[name] = std::move(rows);
    }
    j["views"] = std::move(views);
    out << j.dump() << '\n';
  }
}

void save_dataset(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write dataset '" + path.string() + "'");
  write_dataset(data, out);
}

std::string_view split_part_name(SplitPart part) {
  switch (part) {
    case SplitPart::kTrain: return "train";
    case SplitPart::kValid: return "valid";
    case SplitPart::kTest: return "test";
  }
  return "?";
}

const std::vector<std::string>& DatasetSplit::ids(SplitPart part) const {
  switch (part) {
    case SplitPart::kTrain: return train;
    case SplitPart::kValid: return valid;
    case SplitPart::kTest: return test;
  }
  return train;
}

DatasetSplit split_by_group(const Dataset& data, std::array<double, 3> ratios, std::uint64_t seed) {
  for (double r : ratios) {
    if (!(r > 0.0)) throw DomainError("split ratios must be positive");
  }
  if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9) throw DomainError("split ratios must sum to 1");

  // Groups in first-appearance order, so the shuffle input is deterministic.
  std::vector<std::string> groups;
  std::map<std::string, std::size_t> sizes;
  for (const auto& seq : data) {
    if (sizes[seq.group]++ == 0) groups.push_back(seq.group);
  }
  if (groups.size() < 3) {
    throw DomainError("group-disjoint split needs at least 3 groups, dataset has " + std::to_string(groups.size()));
  }
  Rng rng(seed);
  rng.shuffle(std::span<std::string>(groups));

  const double total = static_cast<double>(data.size());
  std::array<double, 3> filled{};
  std::array<bool, 3> used{};
  DatasetSplit split;
  split.ratios = ratios;
  split.seed = seed;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const std::size_t remaining = groups.size() - g;
    const std::size_t empty = static_cast<std::size_t>(std::count(used.begin(), used.end(), false));
    std::size_t best = 3;
    double best_deficit = 0.0;
    for (std::size_t s = 0; s < 3; ++s) {
      if (remaining <= empty && used[s]) continue;
      const double deficit = ratios[s] * total - filled[s];
      if (best == 3 || deficit > best_deficit) {
        best = s;
        best_deficit = deficit;
      }
    }
    filled[best] += static_cast<double>(sizes[groups[g]]);
    used[best] = true;
    split.group_assignment[groups[g]] = static_cast<SplitPart>(best);
  }
  for (const auto& seq : data) {
    switch (split.group_assignment.at(seq.group)) {
      case SplitPart::kTrain: split.train.push_back(seq.id); break;
      case SplitPart::kValid: split.valid.push_back(seq.id); break;
      case SplitPart::kTest: split.test.push_back(seq.id); break;
    }
  }
  return split;
}

Dataset select(const Dataset& data, const std::vector<std::string>& ids) {
  std::map<std::string, const MultiViewSequence*> by_id;
  for (const auto& seq : data) by_id.emplace(seq.id, &seq);
  Dataset out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw SchemaError("unknown sequence id '" + id + "'");
    out.push_back(*it->second);
  }
  return out;
}

}  // namespace mfn
