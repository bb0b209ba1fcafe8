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

#include "exted/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

#include "exted/corpus.hpp"
#include "exted/errors.hpp"

namespace exted {

namespace {

bool is_space(char ch) { return std::isspace(static_cast<unsigned char>(ch)) != 0; }
bool is_punct(char ch) { return std::ispunct(static_cast<unsigned char>(ch)) != 0; }

char to_lower_ascii(char ch) {
  return (ch >= 'A' && ch <= 'Z') ? static_cast<char>(ch - 'A' + 'a') : ch;
}

bool is_reserved(std::string_view token) {
  return token == Vocabulary::kPadToken || token == Vocabulary::kSosToken ||
         token == Vocabulary::kEosToken || token == Vocabulary::kUnkToken;
}

}  // namespace

Tokens tokenize(std::string_view text) {
  Tokens out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && is_space(text[pos])) ++pos;
    std::size_t end = pos;
    while (end < text.size() && !is_space(text[end])) ++end;
    if (end == pos) break;

    std::string_view word = text.substr(pos, end - pos);
    pos = end;

    std::size_t lead = 0;
    while (lead < word.size() && is_punct(word[lead])) ++lead;
    std::size_t trail = word.size();
    while (trail > lead && is_punct(word[trail - 1])) --trail;

    for (std::size_t k = 0; k < lead; ++k) out.emplace_back(1, word[k]);
    if (trail > lead) {
      std::string core(word.substr(lead, trail - lead));
      std::transform(core.begin(), core.end(), core.begin(), to_lower_ascii);
      out.push_back(std::move(core));
    }
    for (std::size_t k = trail; k < word.size(); ++k) out.emplace_back(1, word[k]);
  }
  return out;
}

std::string detokenize(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i > 0) out += ' ';
    out += tokens[i];
  }
  return out;
}

Vocabulary::Vocabulary() {
  add(std::string(kPadToken));
  add(std::string(kSosToken));
  add(std::string(kEosToken));
  add(std::string(kUnkToken));
}

Vocabulary::Vocabulary(std::span<const std::string> tokens) : Vocabulary() {
  for (const std::string& t : tokens) {
    if (t.empty() || is_reserved(t) || token_to_id_.contains(t)) {
      throw InputError("vocabulary: invalid or duplicate token '" + t + "'");
    }
    add(t);
  }
}

void Vocabulary::add(std::string token) {
  token_to_id_.emplace(token, id_to_token_.size());
  id_to_token_.push_back(std::move(token));
}

TokenId Vocabulary::encode(std::string_view token) const {
  auto it = token_to_id_.find(std::string(token));
  return it == token_to_id_.end() ? kUnk : it->second;
}

std::vector<TokenId> Vocabulary::encode(std::span<const std::string> tokens) const {
  std::vector<TokenId> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(encode(t));
  return ids;
}

const std::string& Vocabulary::decode(TokenId id) const {
  if (id >= id_to_token_.size()) {
    throw IndexError("vocabulary: id " + std::to_string(id) + " out of range (size " +
                     std::to_string(id_to_token_.size()) + ")");
  }
  return id_to_token_[id];
}

Tokens Vocabulary::decode(std::span<const TokenId> ids) const {
  Tokens out;
  out.reserve(ids.size());
  for (TokenId id : ids) out.push_back(decode(id));
  return out;
}

bool Vocabulary::contains(std::string_view token) const {
  return token_to_id_.contains(std::string(token));
}

Tokens Vocabulary::regular_tokens() const {
  return Tokens(id_to_token_.begin() + kReserved, id_to_token_.end());
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write vocabulary file " + path.string());
  for (std::size_t i = kReserved; i < id_to_token_.size(); ++i) out << id_to_token_[i] << '\n';
  if (!out) throw IoError("failed writing vocabulary file " + path.string());
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read vocabulary file " + path.string());
  Tokens tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) tokens.push_back(line);
  }
  return Vocabulary(tokens);
}

Vocabulary build_vocab(std::span<const Tokens> sequences, std::size_t max_size,
                       std::size_t min_count) {
  if (max_size < 5) throw InputError("build_vocab: max_size must be >= 5");
  std::map<std::string, std::size_t> counts;
  for (const Tokens& seq : sequences) {
    for (const std::string& t : seq) {
      if (!t.empty() && !is_reserved(t)) ++counts[t];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> ranked;
  for (auto& [token, n] : counts) {
    if (n >= min_count) ranked.emplace_back(token, n);
  }
  // std::map iteration is already lexicographic; stable_sort keeps that as
  // the tie-break.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  const std::size_t keep = std::min(ranked.size(), max_size - Vocabulary::kReserved);
  Tokens tokens;
  tokens.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) tokens.push_back(ranked[i].first);
  return Vocabulary(tokens);
}

Vocabulary build_vocab(std::span<const DialoguePair> corpus, std::size_t max_size,
                       std::size_t min_count) {
  std::vector<Tokens> sequences;
  sequences.reserve(2 * corpus.size());
  for (const auto& pair : corpus) {
    sequences.push_back(pair.context);
    sequences.push_back(pair.response);
  }
  return build_vocab(std::span<const Tokens>(sequences), max_size, min_count);
}

}  // namespace exted
