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

#include "exted/knowledge.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "exted/errors.hpp"

namespace exted {

using nlohmann::json;

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& ch : out) {
    if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
  }
  return out;
}

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> cols;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      cols.push_back(line.substr(start));
      break;
    }
    cols.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return cols;
}

}  // namespace

void WikiSummarySource::add(std::string_view title, std::string_view summary) {
  summaries_.try_emplace(lowercase(title), tokenize(summary));
}

Tokens WikiSummarySource::query(std::string_view token) const {
  auto it = summaries_.find(lowercase(token));
  return it == summaries_.end() ? Tokens{} : it->second;
}

void NellSource::add_triple(std::string_view entity, std::string_view /*relation*/,
                            std::string_view value) {
  Tokens& values = values_[lowercase(entity)];
  for (auto& t : tokenize(value)) values.push_back(std::move(t));
}

Tokens NellSource::query(std::string_view token) const {
  auto it = values_.find(lowercase(token));
  return it == values_.end() ? Tokens{} : it->second;
}

WikiLoad load_wiki_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read wiki snapshot " + path.string());
  WikiLoad result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) +
                        ": invalid JSON: " + e.what());
    }
    if (!obj.is_object() || !obj.contains("title") || !obj.contains("summary") ||
        !obj["title"].is_string() || !obj["summary"].is_string()) {
      ++result.skipped_lines;
      continue;
    }
    result.source.add(obj["title"].get<std::string>(), obj["summary"].get<std::string>());
  }
  return result;
}

NellLoad load_nell_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read NELL snapshot " + path.string());
  NellLoad result;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cols = split_tabs(line);
    if (cols.size() != 3) {
      ++result.skipped_lines;
      continue;
    }
    result.source.add_triple(cols[0], cols[1], cols[2]);
  }
  return result;
}

ExternalContextVector external_context_vector(std::span<const std::string> context,
                                              const KnowledgeSource& source,
                                              const EmbeddingTable& embeddings,
                                              const StopwordList& stopwords) {
  std::vector<std::string> content;
  for (const auto& t : context) {
    if (!stopwords.contains(t)) content.push_back(lowercase(t));
  }
  std::sort(content.begin(), content.end());

  ExternalContextVector ec;
  ec.values.assign(embeddings.dim(), 0.0);
  for (const auto& token : content) {
    for (const auto& knowledge_token : source.query(token)) {
      auto vec = embeddings.lookup(knowledge_token);
      if (!vec) continue;
      for (std::size_t k = 0; k < ec.values.size(); ++k) ec.values[k] += (*vec)[k];
      ++ec.n_ext_tokens;
    }
  }
  if (ec.n_ext_tokens == 0) return ec;
  const double n = static_cast<double>(ec.n_ext_tokens);
  for (double& v : ec.values) v /= n;
  return ec;
}

double draw_scale_factor(Rng& rng) {
  double s = gaussian_sample(rng, 4.0, 1.0);
  while (!(s > 0.0)) s = gaussian_sample(rng, 4.0, 1.0);
  return s;
}

ExternalContextVector scale_external_context(const ExternalContextVector& ec, Rng& rng) {
  if (ec.scaled) throw ContractError("scale_external_context: vector is already scaled");
  if (ec.is_zero()) return ec;
  ExternalContextVector out = ec;
  out.scale_factor = draw_scale_factor(rng);
  out.scaled = true;
  for (double& v : out.values) v *= out.scale_factor;
  return out;
}

DiagnosticsReport knowledge_diagnostics(std::span<const std::vector<double>> vectors) {
  if (vectors.size() < 2) {
    throw InputError("knowledge_diagnostics: need at least 2 vectors, got " +
                     std::to_string(vectors.size()));
  }
  const std::size_t dim = vectors.front().size();
  std::vector<double> centroid(dim, 0.0);
  for (const auto& v : vectors) {
    if (v.size() != dim) {
      throw DimensionError("knowledge_diagnostics: vectors of dim " + std::to_string(dim) +
                           " and " + std::to_string(v.size()));
    }
    for (std::size_t k = 0; k < dim; ++k) centroid[k] += v[k];
  }
  const double n = static_cast<double>(vectors.size());
  for (double& c : centroid) c /= n;

  std::vector<double> distances;
  distances.reserve(vectors.size());
  for (const auto& v : vectors) {
    double sq = 0.0;
    for (std::size_t k = 0; k < dim; ++k) sq += (v[k] - centroid[k]) * (v[k] - centroid[k]);
    distances.push_back(std::sqrt(sq));
  }

  DiagnosticsReport report;
  report.n_vectors = vectors.size();
  for (double d : distances) report.mean_distance += d;
  report.mean_distance /= n;
  for (double d : distances) {
    report.distance_variance += (d - report.mean_distance) * (d - report.mean_distance);
  }
  report.distance_variance /= n;
  return report;
}

DiagnosticsReport knowledge_diagnostics(std::span<const ExternalContextVector> vectors) {
  std::vector<std::vector<double>> raw;
  raw.reserve(vectors.size());
  for (const auto& ec : vectors) raw.push_back(ec.values);
  return knowledge_diagnostics(std::span<const std::vector<double>>(raw));
}

std::string ec_record_to_json_line(const EcRecord& record) {
  json obj = json::object();
  obj["id"] = record.id;
  obj["n_ext_tokens"] = record.ec.n_ext_tokens;
  obj["scale_factor"] = record.ec.scale_factor;
  obj["ec"] = record.ec.values;
  // Keys are emitted in sorted order by nlohmann::json, so output is stable.
  return obj.dump();
}

void write_ec_file(const std::filesystem::path& path, std::span<const EcRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write ec file " + path.string());
  for (const auto& r : records) out << ec_record_to_json_line(r) << '\n';
  if (!out) throw IoError("failed writing ec file " + path.string());
}

std::vector<EcRecord> read_ec_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read ec file " + path.string());
  std::vector<EcRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    try {
      json obj = json::parse(line);
      EcRecord r;
      r.id = obj.at("id").get<std::string>();
      r.ec.n_ext_tokens = obj.at("n_ext_tokens").get<std::size_t>();
      r.ec.scale_factor = obj.at("scale_factor").get<double>();
      r.ec.values = obj.at("ec").get<std::vector<double>>();
      r.ec.scaled = r.ec.n_ext_tokens > 0 && r.ec.scale_factor != 1.0;
      records.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw FormatError(where + ": malformed ec record: " + e.what());
    }
  }
  return records;
}

}  // namespace exted
