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

#ifndef EXTED_VOCAB_HPP_
#define EXTED_VOCAB_HPP_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace exted {

struct DialoguePair;

using TokenId = std::size_t;
using Tokens = std::vector<std::string>;

// Lowercases ASCII letters, splits on whitespace, and splits leading and
// trailing ASCII punctuation off each word, one token per character.
// Interior punctuation ("don't", "u.s") stays inside the word.
Tokens tokenize(std::string_view text);

// Space-joins tokens.
std::string detokenize(std::span<const std::string> tokens);

class Vocabulary {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kSos = 1;
  static constexpr TokenId kEos = 2;
  static constexpr TokenId kUnk = 3;
  static constexpr std::size_t kReserved = 4;

  static constexpr std::string_view kPadToken = "<pad>";
  static constexpr std::string_view kSosToken = "<s>";
  static constexpr std::string_view kEosToken = "</s>";
  static constexpr std::string_view kUnkToken = "<unk>";

  // Only the reserved entries.
  Vocabulary();
  // Reserved entries followed by `tokens` in order. Duplicates or reserved
  // strings in `tokens` are rejected with InputError.
  explicit Vocabulary(std::span<const std::string> tokens);

  std::size_t size() const { return id_to_token_.size(); }
  // UNK for unknown tokens.
  TokenId encode(std::string_view token) const;
  std::vector<TokenId> encode(std::span<const std::string> tokens) const;
  // Throws IndexError for ids >= size().
  const std::string& decode(TokenId id) const;
  Tokens decode(std::span<const TokenId> ids) const;
  bool contains(std::string_view token) const;

  // Non-reserved tokens in id order.
  Tokens regular_tokens() const;

  // One token per line, id order, reserved entries omitted.
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.id_to_token_ == b.id_to_token_;
  }

 private:
  void add(std::string token);

  std::unordered_map<std::string, TokenId> token_to_id_;
  std::vector<std::string> id_to_token_;
};

// Counts tokens over all sequences, keeps tokens seen at least `min_count`
// times, orders them by descending frequency then lexicographically, and
// truncates so the vocabulary (reserved entries included) has at most
// `max_size` entries. Requires max_size >= 5.
Vocabulary build_vocab(std::span<const Tokens> sequences, std::size_t max_size,
                       std::size_t min_count);
// Uses both the context and the response of every pair.
Vocabulary build_vocab(std::span<const DialoguePair> corpus, std::size_t max_size,
                       std::size_t min_count);

}  // namespace exted

#endif  // EXTED_VOCAB_HPP_
