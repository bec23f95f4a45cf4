//
// Copyright 2026 The dperm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef DPERM_DATASET_IO_H_
#define DPERM_DATASET_IO_H_

#include <array>
#include <cstddef>
#include <istream>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "dperm/dataset.h"
#include "dperm/rng.h"

namespace dperm {

enum class ColumnKind { kCategorical, kNumeric };

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::kNumeric;
  // Allowed levels of a categorical column. Left empty, the levels are
  // inferred from the file (sorted).
  std::vector<std::string> levels;
};

// Parsed form of the schema JSON:
//   {"columns":[{"name":..,"kind":"categorical"|"numeric","levels":[..]}],
//    "label":{"column":..,"positive":".." | [..]},
//    "delimiter":",", "missing":"?"}
struct TableSchema {
  std::vector<ColumnSchema> columns;
  std::string label_column;
  std::vector<std::string> positive_labels;
  char delimiter = ',';
  std::string missing_marker = "?";

  std::size_t label_index() const;
};

TableSchema ParseSchema(std::string_view json);
TableSchema LoadSchema(const std::string& path);

struct RawTable {
  TableSchema schema;  // categorical levels filled in after loading
  std::vector<std::vector<std::string>> rows;
  std::vector<bool> missing;  // per row: some cell equals the missing marker
  std::size_t missing_rows = 0;
};

// Reads delimiter-separated text. Blank lines and lines starting with '|' or
// '#' are skipped; cells are whitespace-trimmed. Throws ParseError naming the
// line for a wrong column count, a non-numeric numeric cell, or a category
// outside the declared levels.
RawTable LoadTable(std::istream& in, const TableSchema& schema,
                   std::string_view source = "<stream>");
RawTable LoadTable(const std::string& path, const TableSchema& schema);
// Rows of several files appended in order.
RawTable LoadTables(const std::vector<std::string>& paths,
                    const TableSchema& schema);

struct PreprocessReport {
  std::size_t rows_in = 0;
  std::size_t rows_dropped_missing = 0;
  int output_dimension = 0;
  // Divisor applied to each output column (1 for all-zero columns).
  std::vector<double> column_max;
  std::size_t rows_rescaled = 0;
  std::size_t positives = 0;

  std::string ToJson(int indent = 2) const;
};

struct PreprocessOptions {
  // Rows (indices into the kept rows, after dropping missing ones) used to
  // compute column maxima. Empty means every row.
  std::vector<std::size_t> scale_rows;
};

// Drops rows with a missing cell, one-hot encodes categoricals, divides each
// column by its max |value|, and divides any row of norm > 1 by its norm.
std::pair<Dataset, PreprocessReport> Preprocess(
    const RawTable& table, const PreprocessOptions& options = {});

// Column-max then row-norm scaling applied in place; shared by Preprocess
// and the synthetic generator. Returns the number of rescaled rows.
std::size_t ScaleToUnitBall(RowMatrix& features,
                            std::vector<double>* column_max = nullptr);

// Seeded-permutation split into disjoint train/validation/test parts with
// sizes floor(n * fraction).
std::tuple<Dataset, Dataset, Dataset> SplitTrainValTest(
    const Dataset& data, const std::array<double, 3>& fractions,
    RngStream& rng);

enum class DatasetFormat { kText, kBinary };

// Text: header line "# dperm-dataset <n> <d>" then "label x_1 ... x_d" per
// line. Binary: magic "DPERMDS1", uint64 n, uint64 d, then n records of
// (label, x_1..x_d) as little-endian doubles.
void SaveDataset(const Dataset& data, const std::string& path,
                 DatasetFormat format);
Dataset LoadDataset(const std::string& path);

}  // namespace dperm

#endif  // DPERM_DATASET_IO_H_
