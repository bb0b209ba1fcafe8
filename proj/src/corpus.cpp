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

#include "exted/corpus.hpp"

#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "exted/errors.hpp"

namespace exted {

using nlohmann::json;

CorpusLoad load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read corpus " + path.string());
  CorpusLoad result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    DialoguePair pair;
    try {
      json obj = json::parse(line);
      pair.id = obj.at("id").get<std::string>();
      pair.context = tokenize(obj.at("context").get<std::string>());
      pair.response = tokenize(obj.at("response").get<std::string>());
    } catch (const json::exception& e) {
      throw FormatError(where + ": malformed corpus line: " + e.what());
    }
    if (pair.context.empty() || pair.response.empty()) {
      ++result.dropped;
      continue;
    }
    result.pairs.push_back(std::move(pair));
  }
  return result;
}

PrecomputedEc precompute_ec(std::span<const DialoguePair> corpus, const KnowledgeSource& source,
                            const EmbeddingTable& embeddings, const StopwordList& stopwords,
                            bool scale, std::uint64_t seed) {
  std::unordered_set<std::string> seen;
  for (const auto& pair : corpus) {
    if (!seen.insert(pair.id).second) {
      throw InputError("precompute_ec: duplicate pair id '" + pair.id + "'");
    }
  }

  PrecomputedEc out;
  out.records.reserve(corpus.size());
  Rng rng(seed);
  for (const auto& pair : corpus) {
    ExternalContextVector ec = external_context_vector(pair.context, source, embeddings,
                                                       stopwords);
    if (ec.is_zero()) ++out.zero_vectors;
    if (scale) ec = scale_external_context(ec, rng);
    out.records.push_back({pair.id, std::move(ec)});
  }
  if (out.records.size() >= 2) {
    std::vector<ExternalContextVector> vectors;
    vectors.reserve(out.records.size());
    for (const auto& r : out.records) vectors.push_back(r.ec);
    out.diagnostics = knowledge_diagnostics(std::span<const ExternalContextVector>(vectors));
  }
  return out;
}

std::size_t attach_ec(std::span<DialoguePair> corpus, std::span<const EcRecord> records) {
  std::unordered_map<std::string, const ExternalContextVector*> by_id;
  for (const auto& r : records) by_id.emplace(r.id, &r.ec);
  std::size_t missing = 0;
  for (auto& pair : corpus) {
    auto it = by_id.find(pair.id);
    if (it == by_id.end()) {
      ++missing;
      continue;
    }
    pair.ec = *it->second;
  }
  return missing;
}

std::uint64_t stable_hash(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

bool is_validation_id(std::string_view id) { return stable_hash(id) % 10 == 0; }

}  // namespace exted
