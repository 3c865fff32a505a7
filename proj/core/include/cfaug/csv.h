/*
 * Copyright 2026 The cfaug Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef CFAUG_CSV_H_
#define CFAUG_CSV_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace cfaug {

// Header-first CSV table. Fields containing commas, quotes or newlines are
// quoted on output and unquoted on input.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column; throws InvalidArgument if absent.
  std::size_t Column(std::string_view name) const;
  void AddRow(std::vector<std::string> row);
};

CsvTable ParseCsv(std::string_view text);
CsvTable ReadCsv(const std::filesystem::path& path);
std::string FormatCsv(const CsvTable& table);
// Creates missing parent directories.
void WriteCsv(const std::filesystem::path& path, const CsvTable& table);

// Shortest text that parses back to the same double ("nan" for NaN).
std::string FormatDouble(double value);
double ParseDouble(std::string_view text);

}  // namespace cfaug

#endif  // CFAUG_CSV_H_
