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

#ifndef DPSYNTH_CSV_H_
#define DPSYNTH_CSV_H_

#include <string>
#include <string_view>
#include <vector>

namespace dpsynth::tabular {

using Row = std::vector<std::string>;

struct CsvTable {
  Row header;
  std::vector<Row> rows;
  // 1-based source line of each row, for error messages.
  std::vector<std::size_t> lines;
};

// RFC-4180 parsing: quoted fields may contain commas, doubled quotes and
// line breaks. The header row is mandatory and every row must match its
// arity. A UTF-8 byte order mark is skipped. Errors carry the line number.
CsvTable ParseCsv(std::string_view text);
CsvTable ReadCsv(const std::string& path);

std::string FormatCsv(const Row& header, const std::vector<Row>& rows);
void WriteCsv(const std::string& path, const Row& header,
              const std::vector<Row>& rows);

// Writes via a temporary file and rename.
void WriteFileAtomic(const std::string& path, std::string_view contents);
std::string ReadFile(const std::string& path);

}  // namespace dpsynth::tabular

#endif  // DPSYNTH_CSV_H_
