// Copyright 2026 The idrisk Authors
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

#ifndef IDRISK_DATASET_H_
#define IDRISK_DATASET_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace idrisk {

// Raised for malformed inputs: bad CSV, schema violations, invalid configs.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class VariableKind { kContinuous, kCategorical };

const char* KindName(VariableKind kind);

struct VariableSpec {
  std::string name;
  VariableKind kind = VariableKind::kContinuous;
  // Ordered level labels. Empty for continuous variables.
  std::vector<std::string> levels;

  bool is_categorical() const { return kind == VariableKind::kCategorical; }
  bool operator==(const VariableSpec&) const = default;

  static VariableSpec Continuous(std::string name);
  static VariableSpec Categorical(std::string name,
                                  std::vector<std::string> levels);
};

// Ordered collection of variables. The order is the canonical column order.
class Schema {
 public:
  Schema() = default;
  // Throws DataError on duplicate names or malformed variable specs.
  explicit Schema(std::vector<VariableSpec> variables);

  std::size_t size() const { return variables_.size(); }
  const std::vector<VariableSpec>& variables() const { return variables_; }
  const VariableSpec& operator[](std::size_t i) const { return variables_[i]; }

  std::optional<std::size_t> Find(std::string_view name) const;
  // Throws DataError naming the variable if it is absent.
  std::size_t IndexOf(std::string_view name) const;
  bool Contains(std::string_view name) const { return Find(name).has_value(); }

  // Index of `label` among the levels of categorical variable `var`.
  std::optional<std::size_t> LevelIndex(std::size_t var,
                                        std::string_view label) const;

  bool operator==(const Schema& other) const {
    return variables_ == other.variables_;
  }

 private:
  std::vector<VariableSpec> variables_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Immutable-after-construction rectangular table stored column-major.
// Continuous cells hold the value; categorical cells hold the level index
// (exactly representable as a double).
class Dataset {
 public:
  Dataset() = default;
  // `columns` must hold schema.size() columns of equal length. Validates
  // finiteness of continuous cells and range of categorical indices.
  Dataset(Schema schema, std::vector<std::vector<double>> columns);

  const Schema& schema() const { return schema_; }
  std::size_t num_rows() const { return num_rows_; }
  std::size_t num_cols() const { return columns_.size(); }

  std::span<const double> column(std::size_t index) const {
    return columns_[index];
  }
  // Throws DataError for an unknown name.
  std::span<const double> column(std::string_view name) const;

  double at(std::size_t row, std::size_t col) const {
    return columns_[col][row];
  }
  // Label of a categorical cell.
  const std::string& label(std::size_t row, std::size_t col) const;

  // Materializes row `i` in schema order.
  std::vector<double> Row(std::size_t i) const;

  // Returns a copy with column `col` replaced.
  Dataset WithColumn(std::size_t col, std::vector<double> values) const;

  // Recodes categorical level indices so this dataset uses `target`'s level
  // ordering. Variable names and kinds must match; every label present here
  // must exist in `target`. Throws DataError otherwise.
  Dataset ConformTo(const Schema& target) const;

  bool operator==(const Dataset& other) const {
    return schema_ == other.schema_ && columns_ == other.columns_;
  }

 private:
  Schema schema_;
  std::vector<std::vector<double>> columns_;
  std::size_t num_rows_ = 0;
};

// Reads an RFC-4180 CSV file with a header row. Without a hint, columns whose
// every cell parses as a finite number become continuous; all others become
// categorical with levels in order of first appearance. With a hint, the
// header must list exactly the hinted variables (any order) and each cell is
// validated against its variable. Empty cells are rejected.
Dataset LoadCsv(const std::filesystem::path& path,
                const std::optional<Schema>& schema_hint = std::nullopt);

struct CsvReadOptions {
  // Full schema to validate against; takes precedence over `categorical`.
  std::optional<Schema> schema;
  // Columns forced to categorical during inference even if numeric-looking
  // (coded factors such as Urban = 1/2).
  std::vector<std::string> categorical;
};

Dataset LoadCsv(const std::filesystem::path& path,
                const CsvReadOptions& options);

// Same as LoadCsv but parses from memory. `source` names the input in errors.
Dataset ParseCsv(std::string_view text,
                 const std::optional<Schema>& schema_hint = std::nullopt,
                 std::string_view source = "<memory>");
Dataset ParseCsv(std::string_view text, const CsvReadOptions& options,
                 std::string_view source = "<memory>");

// Writes `ds` as CSV. Continuous values use the shortest representation that
// round-trips exactly.
void WriteCsv(const Dataset& ds, const std::filesystem::path& path);
std::string FormatCsv(const Dataset& ds);

// Formats a double with the shortest round-trip representation.
std::string FormatDouble(double value);

}  // namespace idrisk

#endif  // IDRISK_DATASET_H_
