// Copyright 2026 The dpsynth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpsynth/csv.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dpsynth/error.h"

namespace dpsynth::tabular {

CsvTable ParseCsv(std::string_view text) {
  if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::vector<Row> records;
  std::vector<std::size_t> lines;
  Row current;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  bool quoted_field = false;
  std::size_t line = 1;
  std::size_t record_line = 1;

  auto end_field = [&] {
    current.push_back(std::move(field));
    field.clear();
    field_started = false;
    quoted_field = false;
  };
  auto end_record = [&] {
    end_field();
    // Skip blank lines.
    if (!(current.size() == 1 && current[0].empty())) {
      records.push_back(std::move(current));
      lines.push_back(record_line);
    }
    current.clear();
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
    if (ch == '"') {
      if (field_started && !quoted_field && !field.empty()) {
        throw DataError("line " + std::to_string(line) +
                        ": stray quote inside unquoted field");
      }
      in_quotes = true;
      quoted_field = true;
      field_started = true;
    } else if (ch == ',') {
      end_field();
    } else if (ch == '\r') {
      // Tolerate CRLF.
    } else if (ch == '\n') {
      end_record();
      ++line;
      record_line = line;
    } else {
      if (quoted_field && !in_quotes) {
        throw DataError("line " + std::to_string(line) +
                        ": characters after closing quote");
      }
      field.push_back(ch);
      field_started = true;
    }
  }
  if (in_quotes) {
    throw DataError("line " + std::to_string(record_line) +
                    ": unterminated quoted field");
  }
  if (field_started || !current.empty()) end_record();

  if (records.empty()) throw DataError("line 1: missing header row");
  CsvTable table;
  table.header = std::move(records[0]);
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size()) {
      throw DataError("line " + std::to_string(lines[r]) + ": expected " +
                      std::to_string(table.header.size()) + " fields, got " +
                      std::to_string(records[r].size()));
    }
    table.rows.push_back(std::move(records[r]));
    table.lines.push_back(lines[r]);
  }
  return table;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CsvTable ReadCsv(const std::string& path) {
  const std::string text = ReadFile(path);
  try {
    return ParseCsv(text);
  } catch (const DataError& e) {
    throw DataError(path + ": " + e.what());
  }
}

namespace {

void AppendField(std::string& out, const std::string& f) {
  const bool needs_quotes =
      f.find_first_of(",\"\r\n") != std::string::npos ||
      (!f.empty() && (f.front() == ' ' || f.back() == ' '));
  if (!needs_quotes) {
    out += f;
    return;
  }
  out.push_back('"');
  for (char c : f) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

void AppendRow(std::string& out, const Row& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i > 0) out.push_back(',');
    AppendField(out, row[i]);
  }
  out.push_back('\n');
}

}  // namespace

std::string FormatCsv(const Row& header, const std::vector<Row>& rows) {
  std::string out;
  AppendRow(out, header);
  for (const Row& r : rows) AppendRow(out, r);
  return out;
}

void WriteFileAtomic(const std::string& path, std::string_view contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write file: " + tmp);
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw DataError("write failed: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw DataError("cannot rename " + tmp + " to " + path + ": " + ec.message());
}

void WriteCsv(const std::string& path, const Row& header,
              const std::vector<Row>& rows) {
  WriteFileAtomic(path, FormatCsv(header, rows));
}

}  // namespace dpsynth::tabular
