// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The MFN Authors.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "mfn/tensor.hpp"

namespace mfn {

/// One labeled sample: time-aligned view matrices [T x d_x], a label (real
/// value for regression, class index for classification) and the group
/// (speaker) it belongs to.
struct MultiViewSequence {
  std::string id;
  std::string group;
  double label = 0.0;
  std::map<std::string, Tensor> views;

  /// Shared T of all views. Assumes the sequence has been validated.
  std::size_t length() const;
};

using Dataset = std::vector<MultiViewSequence>;

struct ViewSchema {
  std::string name;
  std::size_t dim = 0;

  bool operator==(const ViewSchema&) const = default;
};

/// Views of a sequence in name order.
std::vector<ViewSchema> schema_of(const MultiViewSequence& seq);

/// Checks T >= 1 shared by every view, rank-2 matrices and finite values.
/// Throws AlignmentError / DimensionError / NumericError.
void validate_sequence(const MultiViewSequence& seq);

/// JSONL, one sequence per line:
///   {"id": ..., "group": ..., "label": ..., "views": {name: [[...], ...]}}
/// Blank lines are skipped. The first record fixes the schema; later records
/// must match it. Errors carry the 1-based line number.
Dataset read_dataset(std::istream& in);
Dataset load_dataset(const std::filesystem::path& path);

void write_dataset(const Dataset& data, std::ostream& out);
void save_dataset(const Dataset& data, const std::filesystem::path& path);

enum class SplitPart : std::uint8_t { kTrain = 0, kValid = 1, kTest = 2 };

std::string_view split_part_name(SplitPart part);

/// Group-disjoint train/valid/test partition of sequence ids.
struct DatasetSplit {
  std::vector<std::string> train;
  std::vector<std::string> valid;
  std::vector<std::string> test;
  std::map<std::string, SplitPart> group_assignment;
  std::array<double, 3> ratios{};
  std::uint64_t seed = 0;

  const std::vector<std::string>& ids(SplitPart part) const;
};

/// Shuffles the groups with `seed` and assigns each, in shuffled order, to
/// the split whose sequence count lags its target (ratio * total) the most.
/// Ties go to the earlier split. When the remaining groups are only just
/// enough to fill the still-empty splits, they are sent there, so all three
/// splits end up non-empty. Needs at least 3 groups.
DatasetSplit split_by_group(const Dataset& data, std::array<double, 3> ratios, std::uint64_t seed);

/// Sequences with the listed ids, in the order given. Unknown ids raise
/// SchemaError.
Dataset select(const Dataset& data, const std::vector<std::string>& ids);

}  // namespace mfn
