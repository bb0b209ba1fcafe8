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

#ifndef EXTED_EMBEDDINGS_HPP_
#define EXTED_EMBEDDINGS_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace exted {

inline constexpr std::size_t kDefaultEmbeddingDim = 100;

// Pretrained word vectors (GloVe text format).
class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dim = kDefaultEmbeddingDim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }

  // Throws DimensionError when values.size() != dim(). Replaces an existing
  // entry for the same token.
  void insert(std::string token, std::vector<double> values);

  // The stored vector, or nullopt when the token has no embedding.
  std::optional<std::span<const double>> lookup(std::string_view token) const;

 private:
  std::size_t dim_;
  std::unordered_map<std::string, std::vector<double>> vectors_;
};

struct EmbeddingLoad {
  EmbeddingTable table;
  std::size_t skipped_lines = 0;  // wrong arity or unparseable numbers
};

// Reads "token v1 ... vD" lines. Blank lines are ignored. Throws IoError if
// the file cannot be read and FormatError when more than half of the
// non-blank lines are malformed.
EmbeddingLoad load_embeddings(const std::filesystem::path& path, std::size_t dim);

class StopwordList {
 public:
  StopwordList() = default;
  explicit StopwordList(std::span<const std::string> words);

  // Case-insensitive: the query is lowercased before lookup.
  bool contains(std::string_view token) const;
  std::size_t size() const { return words_.size(); }

  // One word per line; blank lines and lines starting with '#' ignored.
  static StopwordList load(const std::filesystem::path& path);

 private:
  std::unordered_set<std::string> words_;
};

}  // namespace exted

#endif  // EXTED_EMBEDDINGS_HPP_
