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

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "exted/corpus.hpp"
#include "exted/embeddings.hpp"
#include "exted/errors.hpp"
#include "exted/rng.hpp"
#include "exted/vocab.hpp"
#include "test_util.hpp"

namespace exted {
namespace {

using testing::fixture;
using testing::temp_path;

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

TEST(TokenizeTest, Examples) {
  EXPECT_EQ(tokenize("The cat sat."), (Tokens{"the", "cat", "sat", "."}));
  EXPECT_EQ(tokenize(""), Tokens{});
  EXPECT_EQ(tokenize("Hello, WORLD"), (Tokens{"hello", ",", "world"}));
}

TEST(TokenizeTest, PunctuationRuns) {
  EXPECT_EQ(tokenize("\"Wait...\" he said"),
            (Tokens{"\"", "wait", ".", ".", ".", "\"", "he", "said"}));
  EXPECT_EQ(tokenize("don't   stop"), (Tokens{"don't", "stop"}));
  EXPECT_EQ(tokenize("  \t\n "), Tokens{});
}

TEST(TokenizeTest, IdempotentOnJoinedOutput) {
  Rng rng(4);
  const std::string alphabet = "abcXYZ.,!?'\" -\t";
  for (int trial = 0; trial < 500; ++trial) {
    std::string text;
    const std::size_t len = rng.below(40);
    for (std::size_t i = 0; i < len; ++i) text += alphabet[rng.below(alphabet.size())];
    Tokens once = tokenize(text);
    EXPECT_EQ(tokenize(detokenize(once)), once) << "input: " << text;
  }
}

TEST(VocabularyTest, ReservedIds) {
  Vocabulary v;
  EXPECT_EQ(v.size(), 4u);
  EXPECT_EQ(v.decode(Vocabulary::kPad), "<pad>");
  EXPECT_EQ(v.decode(Vocabulary::kSos), "<s>");
  EXPECT_EQ(v.decode(Vocabulary::kEos), "</s>");
  EXPECT_EQ(v.decode(Vocabulary::kUnk), "<unk>");
  EXPECT_EQ(v.encode("anything"), Vocabulary::kUnk);
  EXPECT_THROW(v.decode(4), IndexError);
}

TEST(VocabularyTest, EncodeDecodeRoundTrip) {
  const Tokens words{"x", "y", "zeta", "."};
  Vocabulary v(words);
  for (TokenId id = 0; id < v.size(); ++id) EXPECT_EQ(v.encode(v.decode(id)), id);
}

TEST(VocabularyTest, RejectsDuplicatesAndReserved) {
  EXPECT_THROW(Vocabulary(Tokens{"a", "a"}), InputError);
  EXPECT_THROW(Vocabulary(Tokens{"</s>"}), InputError);
}

TEST(VocabularyTest, SaveLoadRoundTrip) {
  Vocabulary v(Tokens{"alpha", "beta", ","});
  auto path = temp_path("vocab_roundtrip.txt");
  v.save(path);
  EXPECT_EQ(Vocabulary::load(path), v);
}

TEST(BuildVocabTest, MinCountFilters) {
  const std::vector<Tokens> seqs{{"a", "b", "a"}, {"a"}};
  Vocabulary v = build_vocab(std::span<const Tokens>(seqs), 100, 2);
  EXPECT_EQ(v.regular_tokens(), Tokens{"a"});
}

TEST(BuildVocabTest, MaxSizeKeepsMostFrequent) {
  const std::vector<Tokens> seqs{{"b", "a", "a", "c", "c", "c"}};
  Vocabulary v = build_vocab(std::span<const Tokens>(seqs), 5, 1);
  EXPECT_EQ(v.size(), 5u);
  EXPECT_EQ(v.regular_tokens(), Tokens{"c"});
  EXPECT_THROW(build_vocab(std::span<const Tokens>(seqs), 4, 1), InputError);
}

TEST(BuildVocabTest, HandCountedFrequencyOrder) {
  // Counts: the 4, cat 2, dog 2, . 3, sat 1, ran 1.
  std::vector<DialoguePair> corpus(2);
  corpus[0].context = tokenize("The cat sat.");
  corpus[0].response = tokenize("The dog ran.");
  corpus[1].context = tokenize("the cat.");
  corpus[1].response = tokenize("the dog");
  Vocabulary v = build_vocab(std::span<const DialoguePair>(corpus), 100, 1);
  EXPECT_EQ(v.regular_tokens(), (Tokens{"the", ".", "cat", "dog", "ran", "sat"}));
  Vocabulary capped = build_vocab(std::span<const DialoguePair>(corpus), 7, 1);
  EXPECT_EQ(capped.regular_tokens(), (Tokens{"the", ".", "cat"}));
}

TEST(BuildVocabTest, DeterministicUnderSequenceOrder) {
  std::vector<Tokens> seqs{{"q", "r"}, {"r", "s", "q"}, {"t"}};
  Vocabulary a = build_vocab(std::span<const Tokens>(seqs), 50, 1);
  std::swap(seqs[0], seqs[2]);
  Vocabulary b = build_vocab(std::span<const Tokens>(seqs), 50, 1);
  EXPECT_EQ(a, b);
}

TEST(EmbeddingsTest, SingleLine) {
  auto path = temp_path("emb_single.txt");
  write_file(path, "cat 0.1 0.2\n");
  EmbeddingLoad load = load_embeddings(path, 2);
  ASSERT_EQ(load.table.size(), 1u);
  auto v = load.table.lookup("cat");
  ASSERT_TRUE(v.has_value());
  EXPECT_EQ((*v)[0], 0.1);
  EXPECT_EQ((*v)[1], 0.2);
  EXPECT_FALSE(load.table.lookup("dog").has_value());
}

TEST(EmbeddingsTest, WrongArityIsSkipped) {
  auto path = temp_path("emb_arity.txt");
  write_file(path, "cat 0.1 0.2\ndog 0.1 0.2 0.3\nfish 1 2\n");
  EmbeddingLoad load = load_embeddings(path, 2);
  EXPECT_EQ(load.skipped_lines, 1u);
  EXPECT_EQ(load.table.size(), 2u);
}

TEST(EmbeddingsTest, MostlyMalformedIsFormatError) {
  auto path = temp_path("emb_bad.txt");
  write_file(path, "cat 0.1\ndog x y\nfish 1 2 3\n");
  EXPECT_THROW(load_embeddings(path, 2), FormatError);
}

TEST(EmbeddingsTest, MissingFileIsIoError) {
  EXPECT_THROW(load_embeddings(temp_path("does_not_exist.txt"), 2), IoError);
}

// Independent line scan of the fixture: a line is well formed when it has
// exactly dim + 1 fields and every value parses completely.
TEST(EmbeddingsTest, FixtureMatchesLineScan) {
  const std::size_t dim = 4;
  std::ifstream in(fixture("embeddings_100.txt"));
  std::string line;
  std::map<std::string, std::vector<double>> expected;
  std::size_t lines = 0, bad = 0;
  while (std::getline(in, line)) {
    ++lines;
    std::istringstream fields(line);
    std::string token, field;
    fields >> token;
    std::vector<double> values;
    bool ok = true;
    while (fields >> field) {
      char* end = nullptr;
      const double v = std::strtod(field.c_str(), &end);
      if (*end != '\0') ok = false;
      values.push_back(v);
    }
    if (!ok || values.size() != dim) {
      ++bad;
      continue;
    }
    expected[token] = values;
  }
  ASSERT_EQ(lines, 100u);

  EmbeddingLoad load = load_embeddings(fixture("embeddings_100.txt"), dim);
  EXPECT_EQ(load.table.size(), expected.size());
  EXPECT_EQ(load.skipped_lines, bad);
  for (const auto& [token, values] : expected) {
    auto got = load.table.lookup(token);
    ASSERT_TRUE(got.has_value()) << token;
    EXPECT_EQ(std::vector<double>(got->begin(), got->end()), values);
  }
}

TEST(EmbeddingsTest, InsertChecksDimension) {
  EmbeddingTable t(3);
  EXPECT_THROW(t.insert("a", {1.0, 2.0}), DimensionError);
}

TEST(StopwordsTest, CaseInsensitive) {
  StopwordList s(Tokens{"the", "a"});
  EXPECT_TRUE(s.contains("THE"));
  EXPECT_TRUE(s.contains("a"));
  EXPECT_FALSE(s.contains("cat"));
}

TEST(StopwordsTest, ShippedListLoads) {
  StopwordList s = StopwordList::load(std::filesystem::path(EXTED_DATA_DIR) / "stopwords.txt");
  EXPECT_GE(s.size(), 150u);
  EXPECT_TRUE(s.contains("the"));
  EXPECT_FALSE(s.contains("#"));
}

}  // namespace
}  // namespace exted
