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

#include "exted/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "exted/errors.hpp"

namespace exted {

using nlohmann::json;

nlohmann::json model_config_to_json(const ModelConfig& cfg) {
  return json{{"vocab_size", cfg.vocab_size},
              {"embed_dim", cfg.embed_dim},
              {"hidden_size", cfg.hidden_size},
              {"ec_dim", cfg.ec_dim},
              {"lambda2", cfg.lambda2},
              {"lambda3", cfg.lambda3},
              {"mode", std::string(to_string(cfg.mode))},
              {"train_ec_feed", std::string(to_string(cfg.train_ec_feed))},
              {"eval_ec_mode", std::string(to_string(cfg.eval_ec_mode))}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  static const std::set<std::string> known = {"vocab_size", "embed_dim",  "hidden_size",
                                              "ec_dim",     "lambda2",    "lambda3",
                                              "mode",       "train_ec_feed", "eval_ec_mode"};
  if (!j.is_object()) throw InputError("model config must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw InputError("unknown model config key '" + key + "'");
  }
  ModelConfig cfg;
  try {
    if (j.contains("vocab_size")) cfg.vocab_size = j["vocab_size"].get<std::size_t>();
    if (j.contains("embed_dim")) cfg.embed_dim = j["embed_dim"].get<std::size_t>();
    if (j.contains("hidden_size")) cfg.hidden_size = j["hidden_size"].get<std::size_t>();
    if (j.contains("ec_dim")) cfg.ec_dim = j["ec_dim"].get<std::size_t>();
    if (j.contains("lambda2")) cfg.lambda2 = j["lambda2"].get<double>();
    if (j.contains("lambda3")) cfg.lambda3 = j["lambda3"].get<double>();
    if (j.contains("mode")) cfg.mode = parse_mode(j["mode"].get<std::string>());
    if (j.contains("train_ec_feed")) {
      cfg.train_ec_feed = parse_ec_feed(j["train_ec_feed"].get<std::string>());
    }
    if (j.contains("eval_ec_mode")) {
      cfg.eval_ec_mode = parse_eval_ec_mode(j["eval_ec_mode"].get<std::string>());
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("invalid model config value: ") + e.what());
  }
  if (cfg.lambda2 < 0.0 || cfg.lambda3 < 0.0) throw InputError("lambda2/lambda3 must be >= 0");
  if (cfg.vocab_size == 0 || cfg.embed_dim == 0 || cfg.hidden_size == 0) {
    throw InputError("vocab_size, embed_dim and hidden_size must be positive");
  }
  return cfg;
}

namespace {

class Writer {
 public:
  void bytes(const void* data, std::size_t n) {
    out_.append(static_cast<const char*>(data), n);
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void str(const std::string& s) {
    u64(s.size());
    out_ += s;
  }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& in) : in_(in) {}

  std::size_t offset() const { return pos_; }
  bool at_end() const { return pos_ == in_.size(); }

  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError("checkpoint: " + what + " at offset " + std::to_string(pos_));
  }
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) fail("truncated data (need " + std::to_string(n) + " bytes)");
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
    }
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
    }
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::string str() {
    const std::uint64_t n = u64();
    if (n > in_.size() - pos_) fail("string length " + std::to_string(n) + " exceeds file");
    return bytes(static_cast<std::size_t>(n));
  }

 private:
  const std::string& in_;
  std::size_t pos_ = 0;
};

void write_tensors(Writer& w, const ExtEdParams& p) {
  p.for_each([&](const char*, const Matrix& m) {
    for (double v : m.values()) w.f64(v);
  });
}

void read_tensors(Reader& r, ExtEdParams& p) {
  p.for_each([&](const char*, Matrix& m) {
    r.need(m.size() * 8);
    for (double& v : m.values()) v = r.f64();
  });
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  ckpt.params.check_shapes(ckpt.config);
  if (ckpt.vocab.size() != ckpt.config.vocab_size) {
    throw DimensionError("checkpoint: vocabulary size " + std::to_string(ckpt.vocab.size()) +
                         " != config vocab_size " + std::to_string(ckpt.config.vocab_size));
  }
  json header = {{"config", model_config_to_json(ckpt.config)},
                 {"vocab", ckpt.vocab.regular_tokens()},
                 {"adam",
                  {{"lr", ckpt.adam.lr},
                   {"beta1", ckpt.adam.beta1},
                   {"beta2", ckpt.adam.beta2},
                   {"eps", ckpt.adam.eps}}},
                 {"epochs_completed", ckpt.epochs_completed}};
  Writer w;
  w.bytes(kCheckpointMagic, 4);
  w.u32(kCheckpointVersion);
  w.str(header.dump());
  std::uint32_t count = 0;
  ckpt.params.for_each([&](const char*, const Matrix&) { ++count; });
  w.u32(count);
  ckpt.params.for_each([&](const char*, const Matrix& m) {
    w.u64(m.rows());
    w.u64(m.cols());
  });
  write_tensors(w, ckpt.params);
  write_tensors(w, ckpt.opt.m);
  write_tensors(w, ckpt.opt.v);
  w.u64(ckpt.opt.step);
  w.u64(ckpt.rng.seed());
  w.str(ckpt.rng.serialize());
  return w.take();
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  Reader r(bytes);
  if (r.bytes(4) != std::string(kCheckpointMagic, 4)) {
    throw FormatError("checkpoint: bad magic at offset 0");
  }
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) r.fail("unsupported version " + std::to_string(version));

  Checkpoint ckpt;
  const std::size_t header_at = r.offset();
  json header;
  try {
    header = json::parse(r.str());
    ckpt.config = model_config_from_json(header.at("config"));
    ckpt.vocab = Vocabulary(header.at("vocab").get<std::vector<std::string>>());
    const json& adam = header.at("adam");
    ckpt.adam = {adam.at("lr").get<double>(), adam.at("beta1").get<double>(),
                 adam.at("beta2").get<double>(), adam.at("eps").get<double>()};
    ckpt.epochs_completed = header.at("epochs_completed").get<std::uint64_t>();
  } catch (const FormatError&) {
    throw;
  } catch (const std::exception& e) {
    throw FormatError("checkpoint: invalid header at offset " + std::to_string(header_at) +
                      ": " + e.what());
  }
  if (ckpt.vocab.size() != ckpt.config.vocab_size) {
    r.fail("vocabulary has " + std::to_string(ckpt.vocab.size()) + " entries, config says " +
           std::to_string(ckpt.config.vocab_size));
  }

  ckpt.params = ExtEdParams::zeros(ckpt.config);
  const std::uint32_t count = r.u32();
  std::uint32_t expected_count = 0;
  ckpt.params.for_each([&](const char*, const Matrix&) { ++expected_count; });
  if (count != expected_count) {
    r.fail("tensor count " + std::to_string(count) + ", expected " +
           std::to_string(expected_count));
  }
  ckpt.params.for_each([&](const char* name, const Matrix& m) {
    const std::uint64_t rows = r.u64();
    const std::uint64_t cols = r.u64();
    if (rows != m.rows() || cols != m.cols()) {
      r.fail(std::string("shape of ") + name + " is " + std::to_string(rows) + "x" +
             std::to_string(cols) + ", config requires " + m.shape_string());
    }
  });
  ckpt.opt = AdamState::zeros_like(ckpt.config);
  read_tensors(r, ckpt.params);
  read_tensors(r, ckpt.opt.m);
  read_tensors(r, ckpt.opt.v);
  ckpt.opt.step = r.u64();
  const std::uint64_t seed = r.u64();
  const std::size_t rng_at = r.offset();
  const std::string rng_state = r.str();
  try {
    ckpt.rng = Rng::deserialize(seed, rng_state);
  } catch (const FormatError&) {
    throw FormatError("checkpoint: malformed rng state at offset " + std::to_string(rng_at));
  }
  if (!r.at_end()) r.fail("trailing bytes");
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const std::string bytes = serialize_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return deserialize_checkpoint(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const ModelConfig& expected) {
  Checkpoint ckpt = load_checkpoint(path);
  const ModelConfig& got = ckpt.config;
  if (got.vocab_size != expected.vocab_size || got.embed_dim != expected.embed_dim ||
      got.hidden_size != expected.hidden_size || got.slot_dim() != expected.slot_dim()) {
    throw DimensionError(
        "checkpoint " + path.string() + " shape mismatch: stored V=" +
        std::to_string(got.vocab_size) + " E=" + std::to_string(got.embed_dim) +
        " H=" + std::to_string(got.hidden_size) + " D=" + std::to_string(got.slot_dim()) +
        ", requested V=" + std::to_string(expected.vocab_size) + " E=" +
        std::to_string(expected.embed_dim) + " H=" + std::to_string(expected.hidden_size) +
        " D=" + std::to_string(expected.slot_dim()));
  }
  return ckpt;
}

}  // namespace exted
