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

#include "dperm/dataset_io.h"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "json.hpp"

#include "dperm/errors.h"

namespace dperm {
namespace {

using nlohmann::json;

constexpr char kBinaryMagic[8] = {'D', 'P', 'E', 'R', 'M', 'D', 'S', '1'};
constexpr std::string_view kTextHeader = "# dperm-dataset";

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> SplitCells(std::string_view line, char delimiter) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delimiter, start);
    cells.emplace_back(Trim(line.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

bool ParseDouble(std::string_view text, double* out) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, *out);
  return ec == std::errc() && ptr == end && std::isfinite(*out);
}

std::string Where(std::string_view source, std::size_t line) {
  std::ostringstream out;
  out << source << ":" << line << ": ";
  return out.str();
}

// Divides columns by their max |value| over `fit_rows` (all rows if empty)
// and rows of norm > 1 by their norm, nudging down until the norm is <= 1.
std::size_t ScaleRows(RowMatrix& x, const std::vector<std::size_t>& fit_rows,
                      std::vector<double>* column_max) {
  Eigen::VectorXd divisor = Eigen::VectorXd::Zero(x.cols());
  if (fit_rows.empty()) {
    if (x.rows() > 0) divisor = x.cwiseAbs().colwise().maxCoeff().transpose();
  } else {
    for (std::size_t r : fit_rows) {
      if (r >= static_cast<std::size_t>(x.rows())) {
        throw InvalidArgument("scaling row index out of range");
      }
      divisor = divisor.cwiseMax(
          x.row(static_cast<Eigen::Index>(r)).cwiseAbs().transpose());
    }
  }
  for (Eigen::Index c = 0; c < divisor.size(); ++c) {
    if (divisor[c] == 0.0) divisor[c] = 1.0;
  }
  x = x * divisor.cwiseInverse().asDiagonal();
  if (column_max != nullptr) {
    column_max->assign(divisor.data(), divisor.data() + divisor.size());
  }

  std::size_t rescaled = 0;
  const double shrink = std::nextafter(1.0, 0.0);
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double norm = x.row(r).norm();
    if (norm <= 1.0) continue;
    x.row(r) /= norm;
    while (x.row(r).norm() > 1.0) x.row(r) *= shrink;
    ++rescaled;
  }
  return rescaled;
}

std::vector<std::size_t> Permutation(std::size_t n, RngStream& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    std::swap(order[i - 1], order[rng.UniformIndex(i)]);
  }
  return order;
}

}  // namespace

std::size_t TableSchema::label_index() const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == label_column) return i;
  }
  throw InvalidArgument("label column '" + label_column + "' not in schema");
}

TableSchema ParseSchema(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("schema JSON: ") + e.what());
  }
  try {
    TableSchema schema;
    std::set<std::string> names;
    for (const json& c : j.at("columns")) {
      ColumnSchema column;
      column.name = c.at("name").get<std::string>();
      const std::string kind = c.at("kind").get<std::string>();
      if (kind == "categorical") {
        column.kind = ColumnKind::kCategorical;
      } else if (kind == "numeric") {
        column.kind = ColumnKind::kNumeric;
      } else {
        throw ParseError("schema: column '" + column.name +
                         "' has unknown kind '" + kind + "'");
      }
      if (c.contains("levels")) {
        column.levels = c["levels"].get<std::vector<std::string>>();
        const std::set<std::string> unique(column.levels.begin(),
                                           column.levels.end());
        if (unique.size() != column.levels.size()) {
          throw ParseError("schema: column '" + column.name +
                           "' lists a level twice");
        }
      }
      if (!names.insert(column.name).second) {
        throw ParseError("schema: duplicate column '" + column.name + "'");
      }
      schema.columns.push_back(std::move(column));
    }
    const json& label = j.at("label");
    schema.label_column = label.at("column").get<std::string>();
    const json& positive = label.at("positive");
    if (positive.is_array()) {
      schema.positive_labels = positive.get<std::vector<std::string>>();
    } else {
      schema.positive_labels = {positive.get<std::string>()};
    }
    if (j.contains("delimiter")) {
      const std::string d = j["delimiter"].get<std::string>();
      if (d.size() != 1) throw ParseError("schema: delimiter must be one char");
      schema.delimiter = d[0];
    }
    if (j.contains("missing")) {
      schema.missing_marker = j["missing"].get<std::string>();
    }
    if (!names.contains(schema.label_column)) {
      throw ParseError("schema: label column '" + schema.label_column +
                       "' is not a column");
    }
    if (schema.positive_labels.empty()) {
      throw ParseError("schema: no positive label given");
    }
    return schema;
  } catch (const json::exception& e) {
    throw ParseError(std::string("schema JSON: ") + e.what());
  }
}

TableSchema LoadSchema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open schema file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseSchema(buffer.str());
}

RawTable LoadTable(std::istream& in, const TableSchema& schema,
                   std::string_view source) {
  const std::size_t label_index = schema.label_index();
  std::vector<std::set<std::string>> declared(schema.columns.size());
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    declared[c].insert(schema.columns[c].levels.begin(),
                       schema.columns[c].levels.end());
  }

  RawTable table;
  table.schema = schema;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string_view trimmed = Trim(line);
    if (trimmed.empty() || trimmed.front() == '|' || trimmed.front() == '#') {
      continue;
    }
    std::vector<std::string> cells = SplitCells(trimmed, schema.delimiter);
    if (cells.size() != schema.columns.size()) {
      std::ostringstream msg;
      msg << Where(source, line_number) << "expected " << schema.columns.size()
          << " columns, got " << cells.size();
      throw ParseError(msg.str());
    }
    bool missing = false;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const ColumnSchema& column = schema.columns[c];
      if (cells[c] == schema.missing_marker) {
        missing = true;
        continue;
      }
      if (c == label_index) continue;
      if (column.kind == ColumnKind::kNumeric) {
        double value = 0.0;
        if (!ParseDouble(cells[c], &value)) {
          throw ParseError(Where(source, line_number) + "column '" +
                           column.name + "': '" + cells[c] +
                           "' is not a number");
        }
      } else if (!declared[c].empty() && !declared[c].contains(cells[c])) {
        throw ParseError(Where(source, line_number) + "column '" + column.name +
                         "': unknown category '" + cells[c] + "'");
      }
    }
    table.rows.push_back(std::move(cells));
    table.missing.push_back(missing);
    if (missing) ++table.missing_rows;
  }

  // Infer levels for categorical columns the schema left open.
  for (std::size_t c = 0; c < table.schema.columns.size(); ++c) {
    ColumnSchema& column = table.schema.columns[c];
    if (c == label_index || column.kind != ColumnKind::kCategorical ||
        !column.levels.empty()) {
      continue;
    }
    std::set<std::string> seen;
    for (const auto& row : table.rows) {
      if (row[c] != schema.missing_marker) seen.insert(row[c]);
    }
    column.levels.assign(seen.begin(), seen.end());
  }
  return table;
}

RawTable LoadTable(const std::string& path, const TableSchema& schema) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open data file " + path);
  return LoadTable(in, schema, path);
}

RawTable LoadTables(const std::vector<std::string>& paths,
                    const TableSchema& schema) {
  if (paths.empty()) throw InvalidArgument("no data files given");
  RawTable merged = LoadTable(paths.front(), schema);
  for (std::size_t i = 1; i < paths.size(); ++i) {
    RawTable next = LoadTable(paths[i], schema);
    for (std::size_t c = 0; c < merged.schema.columns.size(); ++c) {
      auto& levels = merged.schema.columns[c].levels;
      if (schema.columns[c].levels.empty() && levels != next.schema.columns[c].levels) {
        std::set<std::string> all(levels.begin(), levels.end());
        all.insert(next.schema.columns[c].levels.begin(),
                   next.schema.columns[c].levels.end());
        levels.assign(all.begin(), all.end());
      }
    }
    for (std::size_t r = 0; r < next.rows.size(); ++r) {
      merged.rows.push_back(std::move(next.rows[r]));
      merged.missing.push_back(next.missing[r]);
    }
    merged.missing_rows += next.missing_rows;
  }
  return merged;
}

std::string PreprocessReport::ToJson(int indent) const {
  json j{{"rows_in", rows_in},
         {"rows_dropped_missing", rows_dropped_missing},
         {"output_dimension", output_dimension},
         {"column_max", column_max},
         {"rows_rescaled", rows_rescaled},
         {"positives", positives}};
  return j.dump(indent);
}

std::pair<Dataset, PreprocessReport> Preprocess(
    const RawTable& table, const PreprocessOptions& options) {
  const TableSchema& schema = table.schema;
  const std::size_t label_index = schema.label_index();

  // Output column offset of every input column.
  std::vector<int> offset(schema.columns.size(), -1);
  std::vector<std::map<std::string, int>> level_index(schema.columns.size());
  int dimension = 0;
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    if (c == label_index) continue;
    offset[c] = dimension;
    const ColumnSchema& column = schema.columns[c];
    if (column.kind == ColumnKind::kNumeric) {
      dimension += 1;
    } else {
      for (std::size_t l = 0; l < column.levels.size(); ++l) {
        level_index[c][column.levels[l]] = static_cast<int>(l);
      }
      dimension += static_cast<int>(column.levels.size());
    }
  }
  if (dimension == 0) throw PreconditionError("schema has no feature columns");

  PreprocessReport report;
  report.rows_in = table.rows.size();
  report.rows_dropped_missing = table.missing_rows;
  report.output_dimension = dimension;
  const std::size_t kept = table.rows.size() - table.missing_rows;
  if (kept == 0) {
    throw PreconditionError("no rows left after dropping missing values");
  }

  const std::set<std::string> positive(schema.positive_labels.begin(),
                                       schema.positive_labels.end());
  RowMatrix x = RowMatrix::Zero(static_cast<Eigen::Index>(kept), dimension);
  Eigen::VectorXd y(static_cast<Eigen::Index>(kept));
  Eigen::Index r = 0;
  for (std::size_t row = 0; row < table.rows.size(); ++row) {
    if (table.missing[row]) continue;
    const auto& cells = table.rows[row];
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c == label_index) continue;
      if (schema.columns[c].kind == ColumnKind::kNumeric) {
        double value = 0.0;
        if (!ParseDouble(cells[c], &value)) {
          throw ParseError("row " + std::to_string(row) + ": bad number '" +
                           cells[c] + "'");
        }
        x(r, offset[c]) = value;
      } else {
        const auto it = level_index[c].find(cells[c]);
        if (it == level_index[c].end()) {
          throw ParseError("row " + std::to_string(row) +
                           ": unknown category '" + cells[c] + "'");
        }
        x(r, offset[c] + it->second) = 1.0;
      }
    }
    y[r] = positive.contains(cells[label_index]) ? 1.0 : -1.0;
    ++r;
  }

  report.rows_rescaled = ScaleRows(x, options.scale_rows, &report.column_max);
  report.positives = static_cast<std::size_t>((y.array() > 0.0).count());
  return {Dataset(std::move(x), std::move(y)), std::move(report)};
}

std::size_t ScaleToUnitBall(RowMatrix& features,
                            std::vector<double>* column_max) {
  return ScaleRows(features, {}, column_max);
}

std::tuple<Dataset, Dataset, Dataset> SplitTrainValTest(
    const Dataset& data, const std::array<double, 3>& fractions,
    RngStream& rng) {
  double total = 0.0;
  for (double f : fractions) {
    if (!(f >= 0.0)) throw PreconditionError("split fractions must be >= 0");
    total += f;
  }
  if (total > 1.0 + 1e-12) {
    std::ostringstream msg;
    msg << "split fractions sum to " << total << " > 1";
    throw PreconditionError(msg.str());
  }
  std::array<std::size_t, 3> sizes{};
  for (int k = 0; k < 3; ++k) {
    sizes[k] = static_cast<std::size_t>(
        std::floor(static_cast<double>(data.size()) * fractions[k] + 1e-9));
    if (fractions[k] > 0.0 && sizes[k] == 0) {
      throw PreconditionError("too few rows for the requested split");
    }
  }
  if (sizes[0] == 0) throw PreconditionError("training split would be empty");

  const std::vector<std::size_t> order = Permutation(data.size(), rng);
  const std::span<const std::size_t> all(order);
  return {data.Subset(all.subspan(0, sizes[0])),
          data.Subset(all.subspan(sizes[0], sizes[1])),
          data.Subset(all.subspan(sizes[0] + sizes[1], sizes[2]))};
}

void SaveDataset(const Dataset& data, const std::string& path,
                 DatasetFormat format) {
  const RowMatrix& x = data.features();
  const Eigen::VectorXd& y = data.labels();
  if (format == DatasetFormat::kText) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << kTextHeader << ' ' << data.size() << ' ' << data.dimension() << '\n';
    out << std::setprecision(17);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      out << y[r];
      for (Eigen::Index c = 0; c < x.cols(); ++c) out << ' ' << x(r, c);
      out << '\n';
    }
    if (!out) throw IoError("write failed for " + path);
    return;
  }
  static_assert(std::endian::native == std::endian::little,
                "binary dataset format assumes a little-endian host");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out.write(kBinaryMagic, sizeof(kBinaryMagic));
  const std::uint64_t header[2] = {data.size(),
                                   static_cast<std::uint64_t>(data.dimension())};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double label = y[r];
    out.write(reinterpret_cast<const char*>(&label), sizeof(double));
    out.write(reinterpret_cast<const char*>(x.row(r).data()),
              static_cast<std::streamsize>(sizeof(double) * x.cols()));
  }
  if (!out) throw IoError("write failed for " + path);
}

Dataset LoadDataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset " + path);
  char magic[sizeof(kBinaryMagic)] = {};
  in.read(magic, sizeof(magic));
  if (in && std::memcmp(magic, kBinaryMagic, sizeof(magic)) == 0) {
    std::uint64_t header[2] = {};
    in.read(reinterpret_cast<char*>(header), sizeof(header));
    if (!in || header[1] == 0) throw ParseError(path + ": truncated header");
    const auto n = static_cast<Eigen::Index>(header[0]);
    const auto d = static_cast<Eigen::Index>(header[1]);
    RowMatrix x(n, d);
    Eigen::VectorXd y(n);
    for (Eigen::Index r = 0; r < n; ++r) {
      in.read(reinterpret_cast<char*>(&y[r]), sizeof(double));
      in.read(reinterpret_cast<char*>(x.row(r).data()),
              static_cast<std::streamsize>(sizeof(double) * d));
      if (!in) throw ParseError(path + ": truncated record " + std::to_string(r));
    }
    return Dataset(std::move(x), std::move(y));
  }

  in.clear();
  in.seekg(0);
  std::string line;
  std::getline(in, line);
  std::istringstream header(line);
  std::string hash, tag;
  std::size_t n = 0;
  int d = 0;
  header >> hash >> tag >> n >> d;
  if (hash + " " + tag != kTextHeader || d < 1) {
    throw ParseError(path + ": not a dperm dataset file");
  }
  RowMatrix x(static_cast<Eigen::Index>(n), d);
  Eigen::VectorXd y(static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) {
    if (!std::getline(in, line)) {
      throw ParseError(path + ": expected " + std::to_string(n) + " rows");
    }
    std::istringstream row(line);
    const auto i = static_cast<Eigen::Index>(r);
    row >> y[i];
    for (int c = 0; c < d; ++c) row >> x(i, c);
    if (!row) {
      throw ParseError(path + ":" + std::to_string(r + 2) + ": malformed row");
    }
  }
  return Dataset(std::move(x), std::move(y));
}

}  // namespace dperm
