// Copyright 2026 The ExtEd Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "exted/embeddings.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>

#include "exted/errors.hpp"

namespace exted {

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& ch : out) {
    if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
  }
  return out;
}

std::vector<std::string_view> split_whitespace(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    std::size_t end = pos;
    while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end]))) ++end;
    if (end > pos) fields.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return fields;
}

bool parse_double(std::string_view text, double& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && std::isfinite(out);
}

}  // namespace

void EmbeddingTable::insert(std::string token, std::vector<double> values) {
  if (values.size() != dim_) {
    throw DimensionError("embedding for '" + token + "' has " + std::to_string(values.size()) +
                         " values, table dim is " + std::to_string(dim_));
  }
  vectors_.insert_or_assign(std::move(token), std::move(values));
}

std::optional<std::span<const double>> EmbeddingTable::lookup(std::string_view token) const {
  auto it = vectors_.find(std::string(token));
  if (it == vectors_.end()) return std::nullopt;
  return std::span<const double>(it->second);
}

EmbeddingLoad load_embeddings(const std::filesystem::path& path, std::size_t dim) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read embedding file " + path.string());

  EmbeddingLoad result{EmbeddingTable(dim), 0};
  std::size_t non_blank = 0;
  std::string line;
  std::vector<double> values;
  while (std::getline(in, line)) {
    auto fields = split_whitespace(line);
    if (fields.empty()) continue;
    ++non_blank;
    if (fields.size() != dim + 1) {
      ++result.skipped_lines;
      continue;
    }
    values.assign(dim, 0.0);
    bool ok = true;
    for (std::size_t k = 0; k < dim && ok; ++k) ok = parse_double(fields[k + 1], values[k]);
    if (!ok) {
      ++result.skipped_lines;
      continue;
    }
    result.table.insert(std::string(fields[0]), values);
  }
  if (in.bad()) throw IoError("error reading embedding file " + path.string());
  if (2 * result.skipped_lines > non_blank) {
    throw FormatError("embedding file " + path.string() + ": " +
                      std::to_string(result.skipped_lines) + " of " +
                      std::to_string(non_blank) + " lines malformed for dim " +
                      std::to_string(dim));
  }
  return result;
}

StopwordList::StopwordList(std::span<const std::string> words) {
  for (const auto& w : words) words_.insert(lowercase(w));
}

bool StopwordList::contains(std::string_view token) const {
  return words_.contains(lowercase(token));
}

StopwordList StopwordList::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read stopword file " + path.string());
  std::vector<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    auto fields = split_whitespace(line);
    if (fields.empty() || fields[0].front() == '#') continue;
    words.emplace_back(fields[0]);
  }
  return StopwordList(words);
}

}  // namespace exted
