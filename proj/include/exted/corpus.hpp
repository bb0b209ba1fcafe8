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

#ifndef EXTED_CORPUS_HPP_
#define EXTED_CORPUS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "exted/embeddings.hpp"
#include "exted/knowledge.hpp"
#include "exted/vocab.hpp"

namespace exted {

struct DialoguePair {
  std::string id;
  Tokens context;
  Tokens response;
  std::optional<ExternalContextVector> ec;
};

struct CorpusLoad {
  std::vector<DialoguePair> pairs;
  std::size_t dropped = 0;  // empty context or response after tokenization
};

// JSON-lines {"id", "context", "response"}. Throws IoError when unreadable
// and FormatError (with the line number) for malformed lines.
CorpusLoad load_corpus(const std::filesystem::path& path);

struct PrecomputedEc {
  std::vector<EcRecord> records;  // corpus order
  std::size_t zero_vectors = 0;
  std::optional<DiagnosticsReport> diagnostics;  // absent for < 2 pairs
};

// Builds one external context record per pair. With `scale`, nonzero
// vectors are scaled in corpus order by a generator seeded with `seed`.
// Throws InputError on duplicate pair ids.
PrecomputedEc precompute_ec(std::span<const DialoguePair> corpus, const KnowledgeSource& source,
                            const EmbeddingTable& embeddings, const StopwordList& stopwords,
                            bool scale, std::uint64_t seed);

// Sets pair.ec from the matching record. Returns the number of pairs that
// had no record.
std::size_t attach_ec(std::span<DialoguePair> corpus, std::span<const EcRecord> records);

// 64-bit FNV-1a; stable across platforms, used for the validation split.
std::uint64_t stable_hash(std::string_view text);

// Pairs whose id hash is 0 mod 10 go to validation.
bool is_validation_id(std::string_view id);

}  // namespace exted

#endif  // EXTED_CORPUS_HPP_
