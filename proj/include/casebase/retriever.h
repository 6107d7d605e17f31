// Copyright 2026 The Casebase Authors.
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

#ifndef CASEBASE_RETRIEVER_H_
#define CASEBASE_RETRIEVER_H_

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "casebase/entity_linker.h"
#include "casebase/logical_form.h"

namespace casebase {

struct EncoderConfig {
  int hash_bits = 15;
  int dim = 64;
  double temperature = 0.1;
  double p_mask = 0.5;
  // Masking at inference is off by default; the flag exists for ablation.
  bool mask_at_inference = false;
  uint64_t seed = 1;
};

using Vector = std::vector<double>;

// Hashed unigram+bigram mean embedding followed by L2 normalization.
class Encoder {
 public:
  explicit Encoder(const EncoderConfig &config = {});
  Encoder(const Encoder &other);
  Encoder &operator=(const Encoder &other);

  const EncoderConfig &config() const { return config_; }
  size_t num_buckets() const { return size_t{1} << config_.hash_bits; }
  int dim() const { return config_.dim; }

  // Feature ids of the token sequence after replacing the tokens of each
  // mention with masked[i] set by a single [BLANK] token.
  std::vector<uint32_t> Features(std::string_view question,
                                 std::span<const Mention> mentions,
                                 const std::vector<bool> &masked) const;
  // Draws the mask with probability p_mask per mention.
  std::vector<uint32_t> TrainingFeatures(std::string_view question,
                                         std::span<const Mention> mentions,
                                         std::mt19937_64 &rng) const;

  Vector EncodeFeatures(std::span<const uint32_t> features) const;
  // Inference-time encoding.
  Vector Encode(std::string_view question, std::span<const Mention> mentions) const;

  double *row(uint32_t feature) { return &params_[size_t{feature} * config_.dim]; }
  const double *row(uint32_t feature) const {
    return &params_[size_t{feature} * config_.dim];
  }
  std::vector<double> &params() { return params_; }
  const std::vector<double> &params() const { return params_; }

  // Hash of configuration and parameters; call RefreshVersion() after
  // changing parameters.
  uint64_t version() const { return version_; }
  void RefreshVersion();

  // Number of Encode/EncodeFeatures calls so far.
  uint64_t encode_count() const { return encode_count_.load(); }

  void Save(const std::filesystem::path &path) const;
  static Encoder Load(const std::filesystem::path &path);

 private:
  EncoderConfig config_;
  std::vector<double> params_;
  uint64_t version_ = 0;
  mutable std::atomic<uint64_t> encode_count_{0};
};

// F1 overlap between the relation sets of two LFs.
double RelationF1(const std::set<std::string> &a, const std::set<std::string> &b);
double RelationF1(const LogicalForm &a, const LogicalForm &b);

struct TrainItem {
  std::string question;
  std::vector<Mention> mentions;
  std::set<std::string> relations;
};

struct TrainConfig {
  int batch_size = 32;
  int epochs = 8;
  double learning_rate = 2.0;
  uint64_t seed = 7;
};

struct TrainReport {
  std::vector<double> epoch_loss;  // mean over steps
  int steps = 0;
};

using SparseGradient = std::unordered_map<uint32_t, std::vector<double>>;

// Weighted in-batch NLL. weights[i][j] are raw relation-F1 values; the
// diagonal is ignored and each row is normalized to sum 1. Rows without a
// positive are skipped. Returns the mean over active rows and accumulates
// dL/dparams into *gradient when non-null.
double BatchLoss(const Encoder &encoder,
                 const std::vector<std::vector<uint32_t>> &features,
                 const std::vector<std::vector<double>> &weights,
                 SparseGradient *gradient);

// Throws Error(kFailedPrecondition, "untrainable dataset") when no pair of
// items shares a relation.
TrainReport TrainRetriever(Encoder &encoder, std::span<const TrainItem> items,
                           const TrainConfig &config);

}  // namespace casebase

#endif  // CASEBASE_RETRIEVER_H_
