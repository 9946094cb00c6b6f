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

#include "idrisk/dataset.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <utility>

namespace idrisk {

const char* KindName(VariableKind kind) {
  return kind == VariableKind::kContinuous ? "continuous" : "categorical";
}

VariableSpec VariableSpec::Continuous(std::string name) {
  return VariableSpec{std::move(name), VariableKind::kContinuous, {}};
}

VariableSpec VariableSpec::Categorical(std::string name,
                                       std::vector<std::string> levels) {
  return VariableSpec{std::move(name), VariableKind::kCategorical,
                      std::move(levels)};
}

Schema::Schema(std::vector<VariableSpec> variables)
    : variables_(std::move(variables)) {
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    const VariableSpec& v = variables_[i];
    if (v.name.empty()) {
      throw DataError("schema: variable " + std::to_string(i) +
                      " has an empty name");
    }
    if (!index_.emplace(v.name, i).second) {
      throw DataError("schema: duplicate variable name '" + v.name + "'");
    }
    if (v.is_categorical()) {
      if (v.levels.empty()) {
        throw DataError("schema: categorical variable '" + v.name +
                        "' has no levels");
      }
      std::vector<std::string> sorted = v.levels;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw DataError("schema: categorical variable '" + v.name +
                        "' has duplicate levels");
      }
    } else if (!v.levels.empty()) {
      throw DataError("schema: continuous variable '" + v.name +
                      "' must not declare levels");
    }
  }
}

std::optional<std::size_t> Schema::Find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Schema::IndexOf(std::string_view name) const {
  auto found = Find(name);
  if (!found) {
    throw DataError("unknown variable '" + std::string(name) + "'");
  }
  return *found;
}

std::optional<std::size_t> Schema::LevelIndex(std::size_t var,
                                              std::string_view label) const {
  const auto& levels = variables_[var].levels;
  auto it = std::find(levels.begin(), levels.end(), label);
  if (it == levels.end()) return std::nullopt;
  return static_cast<std::size_t>(it - levels.begin());
}

Dataset::Dataset(Schema schema, std::vector<std::vector<double>> columns)
    : schema_(std::move(schema)), columns_(std::move(columns)) {
  if (columns_.size() != schema_.size()) {
    throw DataError("dataset: expected " + std::to_string(schema_.size()) +
                    " columns, got " + std::to_string(columns_.size()));
  }
  num_rows_ = columns_.empty() ? 0 : columns_.front().size();
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    const VariableSpec& spec = schema_[c];
    if (columns_[c].size() != num_rows_) {
      throw DataError("dataset: column '" + spec.name + "' has " +
                      std::to_string(columns_[c].size()) + " rows, expected " +
                      std::to_string(num_rows_));
    }
    for (std::size_t r = 0; r < num_rows_; ++r) {
      const double v = columns_[c][r];
      if (!std::isfinite(v)) {
        throw DataError("dataset: non-finite value in '" + spec.name +
                        "' at row " + std::to_string(r + 1));
      }
      if (spec.is_categorical() &&
          (v < 0 || v != std::floor(v) ||
           v >= static_cast<double>(spec.levels.size()))) {
        throw DataError("dataset: invalid level index in '" + spec.name +
                        "' at row " + std::to_string(r + 1));
      }
    }
  }
}

std::span<const double> Dataset::column(std::string_view name) const {
  return columns_[schema_.IndexOf(name)];
}

const std::string& Dataset::label(std::size_t row, std::size_t col) const {
  return schema_[col].levels[static_cast<std::size_t>(columns_[col][row])];
}

std::vector<double> Dataset::Row(std::size_t i) const {
  std::vector<double> row(columns_.size());
  for (std::size_t c = 0; c < columns_.size(); ++c) row[c] = columns_[c][i];
  return row;
}

Dataset Dataset::WithColumn(std::size_t col, std::vector<double> values) const {
  std::vector<std::vector<double>> columns = columns_;
  columns.at(col) = std::move(values);
  return Dataset(schema_, std::move(columns));
}

Dataset Dataset::ConformTo(const Schema& target) const {
  if (schema_ == target) return *this;
  if (schema_.size() != target.size()) {
    throw DataError("schema mismatch: " + std::to_string(schema_.size()) +
                    " vs " + std::to_string(target.size()) + " variables");
  }
  std::vector<std::vector<double>> columns(target.size());
  for (std::size_t t = 0; t < target.size(); ++t) {
    const VariableSpec& want = target[t];
    auto src = schema_.Find(want.name);
    if (!src) {
      throw DataError("schema mismatch: variable '" + want.name +
                      "' missing");
    }
    const VariableSpec& have = schema_[*src];
    if (have.kind != want.kind) {
      throw DataError("schema mismatch: variable '" + want.name + "' is " +
                      KindName(have.kind) + ", expected " +
                      KindName(want.kind));
    }
    const auto& in = columns_[*src];
    if (!want.is_categorical()) {
      columns[t] = in;
      continue;
    }
    std::vector<double> remap(have.levels.size(), -1.0);
    for (std::size_t l = 0; l < have.levels.size(); ++l) {
      if (auto idx = target.LevelIndex(t, have.levels[l])) {
        remap[l] = static_cast<double>(*idx);
      }
    }
    auto& out = columns[t];
    out.resize(in.size());
    for (std::size_t r = 0; r < in.size(); ++r) {
      const double mapped = remap[static_cast<std::size_t>(in[r])];
      if (mapped < 0) {
        throw DataError("schema mismatch: level '" + label(r, *src) +
                        "' of '" + want.name + "' is not a level of the "
                        "reference data");
      }
      out[r] = mapped;
    }
  }
  return Dataset(target, std::move(columns));
}

namespace {

// Splits RFC-4180 text into records of fields. Tracks line numbers for errors.
struct CsvRecord {
  std::vector<std::string> fields;
  std::size_t line = 0;
};

std::vector<CsvRecord> SplitCsv(std::string_view text,
                                std::string_view source) {
  std::vector<CsvRecord> records;
  CsvRecord current;
  std::string field;
  std::size_t line = 1;
  current.line = line;
  bool in_quotes = false;
  bool field_started = false;
  bool record_has_content = false;

  auto end_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    if (record_has_content || !current.fields.empty()) {
      end_field();
      records.push_back(std::move(current));
    }
    current = CsvRecord{};
    current.line = line;
    record_has_content = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (in_quotes) {
      if (ch == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      continue;
    }
    switch (ch) {
      case '"':
        if (field_started && !field.empty()) {
          throw DataError(std::string(source) + ":" + std::to_string(line) +
                          ": stray quote inside unquoted field");
        }
        in_quotes = true;
        field_started = true;
        record_has_content = true;
        break;
      case ',':
        end_field();
        record_has_content = true;
        break;
      case '\r':
        if (i + 1 < text.size() && text[i + 1] == '\n') break;
        [[fallthrough]];
      case '\n':
        end_record();
        ++line;
        current.line = line;
        break;
      default:
        field.push_back(ch);
        field_started = true;
        record_has_content = true;
    }
  }
  if (in_quotes) {
    throw DataError(std::string(source) + ": unterminated quoted field");
  }
  end_record();
  return records;
}

std::optional<double> ParseNumber(std::string_view cell) {
  // Allow surrounding spaces and a leading '+', which from_chars rejects.
  while (!cell.empty() && cell.front() == ' ') cell.remove_prefix(1);
  while (!cell.empty() && cell.back() == ' ') cell.remove_suffix(1);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  if (cell.empty()) return std::nullopt;
  double value = 0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(),
                                   value);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    return std::nullopt;
  }
  if (!std::isfinite(value)) return std::nullopt;
  return value;
}

std::string Where(std::string_view source, const CsvRecord& rec,
                  const std::string& column) {
  return std::string(source) + ":" + std::to_string(rec.line) + ": column '" +
         column + "'";
}

}  // namespace

Dataset ParseCsv(std::string_view text, const std::optional<Schema>& hint,
                 std::string_view source) {
  CsvReadOptions options;
  options.schema = hint;
  return ParseCsv(text, options, source);
}

Dataset ParseCsv(std::string_view text, const CsvReadOptions& options,
                 std::string_view source) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") {
    text.remove_prefix(3);
  }
  std::vector<CsvRecord> records = SplitCsv(text, source);
  if (records.empty()) {
    throw DataError(std::string(source) + ": missing header row");
  }
  const std::vector<std::string> header = records.front().fields;
  const std::size_t width = header.size();
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].fields.size() != width) {
      throw DataError(std::string(source) + ":" +
                      std::to_string(records[r].line) + ": ragged row with " +
                      std::to_string(records[r].fields.size()) +
                      " fields, header has " + std::to_string(width));
    }
    for (std::size_t c = 0; c < width; ++c) {
      if (records[r].fields[c].empty()) {
        throw DataError(Where(source, records[r], header[c]) +
                        ": missing value");
      }
    }
  }
  const std::size_t n = records.size() - 1;

  // Resolve the schema and where each header column lands in it.
  Schema schema;
  std::vector<std::size_t> target(width);
  if (options.schema) {
    schema = *options.schema;
    if (width != schema.size()) {
      throw DataError(std::string(source) + ": header has " +
                      std::to_string(width) + " columns, schema has " +
                      std::to_string(schema.size()));
    }
    std::vector<bool> seen(width, false);
    for (std::size_t c = 0; c < width; ++c) {
      auto idx = schema.Find(header[c]);
      if (!idx) {
        throw DataError(std::string(source) + ": header column '" +
                        header[c] + "' not in schema");
      }
      if (seen[*idx]) {
        throw DataError(std::string(source) + ": duplicate header column '" +
                        header[c] + "'");
      }
      seen[*idx] = true;
      target[c] = *idx;
    }
  } else {
    for (const auto& name : options.categorical) {
      if (std::find(header.begin(), header.end(), name) == header.end()) {
        throw DataError(std::string(source) + ": categorical column '" +
                        name + "' not in header");
      }
    }
    std::vector<VariableSpec> specs;
    specs.reserve(width);
    for (std::size_t c = 0; c < width; ++c) {
      const bool forced =
          std::find(options.categorical.begin(), options.categorical.end(),
                    header[c]) != options.categorical.end();
      bool numeric = !forced;
      for (std::size_t r = 1; numeric && r < records.size(); ++r) {
        numeric = ParseNumber(records[r].fields[c]).has_value();
      }
      if (numeric) {
        specs.push_back(VariableSpec::Continuous(header[c]));
        continue;
      }
      std::vector<std::string> levels;
      for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& cell = records[r].fields[c];
        if (std::find(levels.begin(), levels.end(), cell) == levels.end()) {
          levels.push_back(cell);
        }
      }
      if (levels.empty()) {
        // A categorical column with no rows still needs a level to be valid;
        // only reachable for forced-categorical columns of an empty file.
        levels.push_back("");
      }
      specs.push_back(VariableSpec::Categorical(header[c], std::move(levels)));
    }
    schema = Schema(std::move(specs));
    for (std::size_t c = 0; c < width; ++c) target[c] = c;
  }

  std::vector<std::vector<double>> columns(width, std::vector<double>(n));
  for (std::size_t c = 0; c < width; ++c) {
    const std::size_t dst = target[c];
    const VariableSpec& spec = schema[dst];
    for (std::size_t r = 1; r < records.size(); ++r) {
      const std::string& cell = records[r].fields[c];
      if (spec.is_categorical()) {
        auto idx = schema.LevelIndex(dst, cell);
        if (!idx) {
          throw DataError(Where(source, records[r], spec.name) + ": value '" +
                          cell + "' is not a declared level");
        }
        columns[dst][r - 1] = static_cast<double>(*idx);
      } else {
        auto value = ParseNumber(cell);
        if (!value) {
          throw DataError(Where(source, records[r], spec.name) + ": '" + cell +
                          "' is not a finite number");
        }
        columns[dst][r - 1] = *value;
      }
    }
  }
  return Dataset(std::move(schema), std::move(columns));
}

Dataset LoadCsv(const std::filesystem::path& path,
                const std::optional<Schema>& hint) {
  CsvReadOptions options;
  options.schema = hint;
  return LoadCsv(path, options);
}

Dataset LoadCsv(const std::filesystem::path& path,
                const CsvReadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ParseCsv(buffer.str(), options, path.string());
}

std::string FormatDouble(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

namespace {

void AppendField(std::string& out, std::string_view field) {
  const bool needs_quotes =
      field.find_first_of(",\"\r\n") != std::string_view::npos ||
      (!field.empty() && (field.front() == ' ' || field.back() == ' '));
  if (!needs_quotes) {
    out.append(field);
    return;
  }
  out.push_back('"');
  for (char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
}

}  // namespace

std::string FormatCsv(const Dataset& ds) {
  std::string out;
  const Schema& schema = ds.schema();
  for (std::size_t c = 0; c < schema.size(); ++c) {
    if (c) out.push_back(',');
    AppendField(out, schema[c].name);
  }
  out.push_back('\n');
  for (std::size_t r = 0; r < ds.num_rows(); ++r) {
    for (std::size_t c = 0; c < schema.size(); ++c) {
      if (c) out.push_back(',');
      if (schema[c].is_categorical()) {
        AppendField(out, ds.label(r, c));
      } else {
        out.append(FormatDouble(ds.at(r, c)));
      }
    }
    out.push_back('\n');
  }
  return out;
}

void WriteCsv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << FormatCsv(ds);
  if (!out) throw DataError("error writing '" + path.string() + "'");
}

}  // namespace idrisk
