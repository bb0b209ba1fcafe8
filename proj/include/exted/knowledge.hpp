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

// Offline knowledge sources and the external context vector built from them.
//
// A dialogue context is turned into one fixed-length vector by looking up
// every non-stopword context token in a knowledge source, embedding each
// retrieved token with the pretrained table, and averaging. Tokens without
// an embedding are skipped and do not count toward the average.

#ifndef EXTED_KNOWLEDGE_HPP_
#define EXTED_KNOWLEDGE_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "exted/embeddings.hpp"
#include "exted/rng.hpp"
#include "exted/vocab.hpp"

namespace exted {

class KnowledgeSource {
 public:
  virtual ~KnowledgeSource() = default;
  // Knowledge tokens for one context token, in source order; empty if none.
  virtual Tokens query(std::string_view token) const = 0;
};

// title -> tokenized summary. Titles are stored lowercased.
class WikiSummarySource : public KnowledgeSource {
 public:
  WikiSummarySource() = default;

  // Later entries for an already present title are ignored.
  void add(std::string_view title, std::string_view summary);
  std::size_t size() const { return summaries_.size(); }
  Tokens query(std::string_view token) const override;

 private:
  std::map<std::string, Tokens, std::less<>> summaries_;
};

// entity -> concatenated tokenized values of every (entity, relation, value)
// triple, in file order. Entities are stored lowercased; every relation
// counts.
class NellSource : public KnowledgeSource {
 public:
  NellSource() = default;

  void add_triple(std::string_view entity, std::string_view relation, std::string_view value);
  std::size_t entity_count() const { return values_.size(); }
  Tokens query(std::string_view token) const override;

 private:
  std::map<std::string, Tokens, std::less<>> values_;
};

struct WikiLoad {
  WikiSummarySource source;
  std::size_t skipped_lines = 0;  // objects without string title/summary
};

// JSON-lines, {"title": ..., "summary": ...} per line. Lines that are not
// valid JSON raise FormatError naming the line number.
WikiLoad load_wiki_snapshot(const std::filesystem::path& path);

struct NellLoad {
  NellSource source;
  std::size_t skipped_lines = 0;  // lines without exactly three columns
};

// Tab-separated entity, relation, value.
NellLoad load_nell_snapshot(const std::filesystem::path& path);

inline Tokens wiki_summary_query(const WikiSummarySource& source, std::string_view token) {
  return source.query(token);
}

inline Tokens nell_values_for_entity(const NellSource& source, std::string_view token) {
  return source.query(token);
}

struct ExternalContextVector {
  std::vector<double> values;
  std::size_t n_ext_tokens = 0;
  bool scaled = false;
  double scale_factor = 1.0;

  std::size_t dim() const { return values.size(); }
  bool is_zero() const { return n_ext_tokens == 0; }

  friend bool operator==(const ExternalContextVector&, const ExternalContextVector&) = default;
};

// The averaged knowledge embedding for `context`.
//
// Non-stopword context tokens are visited in sorted order (duplicates kept)
// and each one's retrieved tokens in source order, so the floating-point
// sum does not depend on the order of the context. With nothing embedded
// the result is the zero vector with n_ext_tokens == 0.
ExternalContextVector external_context_vector(std::span<const std::string> context,
                                              const KnowledgeSource& source,
                                              const EmbeddingTable& embeddings,
                                              const StopwordList& stopwords);

// One N(4, 1) draw, redrawn until strictly positive.
double draw_scale_factor(Rng& rng);

// Multiplies every component by draw_scale_factor(rng). Zero vectors are
// returned unchanged without consuming the generator. Throws ContractError
// on an already scaled vector.
ExternalContextVector scale_external_context(const ExternalContextVector& ec, Rng& rng);

struct DiagnosticsReport {
  std::size_t n_vectors = 0;
  double mean_distance = 0.0;      // mean Euclidean distance to the centroid
  double distance_variance = 0.0;  // population variance of those distances
};

// Throws InputError for fewer than two vectors, DimensionError for ragged
// input.
DiagnosticsReport knowledge_diagnostics(std::span<const ExternalContextVector> vectors);
DiagnosticsReport knowledge_diagnostics(std::span<const std::vector<double>> vectors);

struct EcRecord {
  std::string id;
  ExternalContextVector ec;
};

// JSON-lines {"id", "n_ext_tokens", "scale_factor", "ec"}; doubles are written
// in shortest round-trip form.
void write_ec_file(const std::filesystem::path& path, std::span<const EcRecord> records);
std::string ec_record_to_json_line(const EcRecord& record);
std::vector<EcRecord> read_ec_file(const std::filesystem::path& path);

}  // namespace exted

#endif  // EXTED_KNOWLEDGE_HPP_
