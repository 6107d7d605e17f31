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

#include "casebase/retriever.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include "casebase/binary_io.h"
#include "casebase/error.h"
#include "casebase/text.h"

namespace casebase {
namespace {

constexpr char kEncoderMagic[8] = {'C', 'B', 'E', 'N', 'C', 'v', '1', '\n'};
constexpr char kBlank[] = "[blank]";

}  // namespace

Encoder::Encoder(const EncoderConfig &config) : config_(config) {
  if (config.hash_bits < 1 || config.hash_bits > 24 || config.dim < 1) {
    throw Error(ErrorCode::kInvalidArgument, "bad encoder dimensions");
  }
  if (!(config.temperature > 0) || config.p_mask < 0 || config.p_mask > 1) {
    throw Error(ErrorCode::kInvalidArgument, "bad encoder temperature or p_mask");
  }
  params_.resize(num_buckets() * config.dim);
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(config.dim));
  for (double &p : params_) p = normal(rng);
  RefreshVersion();
}

Encoder::Encoder(const Encoder &other)
    : config_(other.config_),
      params_(other.params_),
      version_(other.version_),
      encode_count_(other.encode_count_.load()) {}

Encoder &Encoder::operator=(const Encoder &other) {
  config_ = other.config_;
  params_ = other.params_;
  version_ = other.version_;
  encode_count_ = other.encode_count_.load();
  return *this;
}

std::vector<uint32_t> Encoder::Features(std::string_view question,
                                        std::span<const Mention> mentions,
                                        const std::vector<bool> &masked) const {
  std::vector<Token> tokens = Tokenize(question);
  std::vector<std::string> sequence;
  std::vector<bool> emitted(mentions.size(), false);
  for (const Token &t : tokens) {
    int owner = -1;
    for (size_t m = 0; m < mentions.size(); ++m) {
      if (t.begin < mentions[m].end && mentions[m].begin < t.end) {
        owner = static_cast<int>(m);
        break;
      }
    }
    if (owner >= 0 && masked[owner]) {
      if (!emitted[owner]) sequence.push_back(kBlank);
      emitted[owner] = true;
      continue;
    }
    sequence.push_back(t.text);
  }
  // Bucket 0 is reserved for the [EMPTY] feature.
  const uint64_t buckets = num_buckets() - 1;
  std::vector<uint32_t> features;
  if (sequence.empty()) return {0};
  for (size_t i = 0; i < sequence.size(); ++i) {
    features.push_back(1 + static_cast<uint32_t>(Fnv1a("u " + sequence[i]) % buckets));
    if (i + 1 < sequence.size()) {
      features.push_back(1 + static_cast<uint32_t>(
                                 Fnv1a("b " + sequence[i] + " " + sequence[i + 1]) %
                                 buckets));
    }
  }
  return features;
}

std::vector<uint32_t> Encoder::TrainingFeatures(std::string_view question,
                                                std::span<const Mention> mentions,
                                                std::mt19937_64 &rng) const {
  std::bernoulli_distribution coin(config_.p_mask);
  std::vector<bool> masked(mentions.size());
  for (size_t i = 0; i < masked.size(); ++i) masked[i] = coin(rng);
  return Features(question, mentions, masked);
}

Vector Encoder::EncodeFeatures(std::span<const uint32_t> features) const {
  ++encode_count_;
  const int d = config_.dim;
  Vector v(d, 0.0);
  for (uint32_t f : features) {
    const double *r = row(f);
    for (int k = 0; k < d; ++k) v[k] += r[k];
  }
  double norm = 0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm == 0 || !std::isfinite(norm)) {
    std::fill(v.begin(), v.end(), 0.0);
    v[0] = 1.0;
    return v;
  }
  for (double &x : v) x /= norm;
  return v;
}

Vector Encoder::Encode(std::string_view question,
                       std::span<const Mention> mentions) const {
  std::vector<bool> masked(mentions.size(), config_.mask_at_inference);
  return EncodeFeatures(Features(question, mentions, masked));
}

void Encoder::RefreshVersion() {
  uint64_t h = Fnv1a("encoder");
  auto mix = [&h](const void *data, size_t size) {
    h = Fnv1a(std::string_view(static_cast<const char *>(data), size), h);
  };
  mix(&config_.hash_bits, sizeof(config_.hash_bits));
  mix(&config_.dim, sizeof(config_.dim));
  mix(&config_.temperature, sizeof(config_.temperature));
  mix(&config_.p_mask, sizeof(config_.p_mask));
  uint8_t flag = config_.mask_at_inference ? 1 : 0;
  mix(&flag, 1);
  mix(&config_.seed, sizeof(config_.seed));
  mix(params_.data(), params_.size() * sizeof(double));
  version_ = h;
}

void Encoder::Save(const std::filesystem::path &path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kUnavailable, "cannot write " + path.string());
  BinaryWriter w(out);
  w.PutBytes(kEncoderMagic, sizeof(kEncoderMagic));
  w.Put<int32_t>(config_.hash_bits);
  w.Put<int32_t>(config_.dim);
  w.Put<double>(config_.temperature);
  w.Put<double>(config_.p_mask);
  w.Put<uint8_t>(config_.mask_at_inference ? 1 : 0);
  w.Put<uint64_t>(config_.seed);
  w.PutBytes(params_.data(), params_.size() * sizeof(double));
}

Encoder Encoder::Load(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open " + path.string());
  BinaryReader r(in);
  char magic[sizeof(kEncoderMagic)];
  r.GetBytes(magic, sizeof(magic), "magic");
  if (!std::equal(magic, magic + sizeof(magic), kEncoderMagic)) {
    throw Error(ErrorCode::kDataLoss, "not an encoder checkpoint at offset 0");
  }
  EncoderConfig config;
  config.hash_bits = r.Get<int32_t>("hash_bits");
  config.dim = r.Get<int32_t>("dim");
  config.temperature = r.Get<double>("temperature");
  config.p_mask = r.Get<double>("p_mask");
  config.mask_at_inference = r.Get<uint8_t>("mask flag") != 0;
  config.seed = r.Get<uint64_t>("seed");
  Encoder encoder(config);
  r.GetBytes(encoder.params_.data(), encoder.params_.size() * sizeof(double),
             "parameters");
  for (double p : encoder.params_) {
    if (!std::isfinite(p)) throw Error(ErrorCode::kDataLoss, "non-finite parameter");
  }
  encoder.RefreshVersion();
  return encoder;
}

double RelationF1(const std::set<std::string> &a, const std::set<std::string> &b) {
  if (a.empty() || b.empty()) return 0.0;
  size_t common = 0;
  for (const std::string &r : a) common += b.count(r);
  if (common == 0) return 0.0;
  double p = static_cast<double>(common) / a.size();
  double r = static_cast<double>(common) / b.size();
  return 2 * p * r / (p + r);
}

double RelationF1(const LogicalForm &a, const LogicalForm &b) {
  return RelationF1(RelationsOf(a), RelationsOf(b));
}

double BatchLoss(const Encoder &encoder,
                 const std::vector<std::vector<uint32_t>> &features,
                 const std::vector<std::vector<double>> &weights,
                 SparseGradient *gradient) {
  const size_t n = features.size();
  const int d = encoder.dim();
  const double tau = encoder.config().temperature;
  std::vector<Vector> v(n, Vector(d, 0.0));
  std::vector<Vector> u(n);
  std::vector<double> norm(n);
  for (size_t i = 0; i < n; ++i) {
    for (uint32_t f : features[i]) {
      const double *r = encoder.row(f);
      for (int k = 0; k < d; ++k) v[i][k] += r[k];
    }
    for (double &x : v[i]) x /= static_cast<double>(features[i].size());
    double s = 0;
    for (double x : v[i]) s += x * x;
    norm[i] = std::sqrt(s);
    u[i] = v[i];
    for (double &x : u[i]) x /= norm[i];
  }
  auto dot = [d](const Vector &a, const Vector &b) {
    double s = 0;
    for (int k = 0; k < d; ++k) s += a[k] * b[k];
    return s;
  };

  // Rows first, then divide by the number of active rows.
  std::vector<std::vector<double>> g(n, std::vector<double>(n, 0.0));
  double total = 0;
  int active = 0;
  for (size_t i = 0; i < n; ++i) {
    double wsum = 0;
    for (size_t j = 0; j < n; ++j) {
      if (j != i) wsum += weights[i][j];
    }
    if (wsum <= 0) continue;
    ++active;
    std::vector<double> logits(n);
    for (size_t j = 0; j < n; ++j) logits[j] = dot(u[i], u[j]) / tau;
    double mx = *std::max_element(logits.begin(), logits.end());
    double z = 0;
    for (double l : logits) z += std::exp(l - mx);
    double log_z = mx + std::log(z);
    for (size_t j = 0; j < n; ++j) {
      double p = std::exp(logits[j] - log_z);
      double w = j == i ? 0.0 : weights[i][j] / wsum;
      total -= w * (logits[j] - log_z);
      g[i][j] = p - w;
    }
  }
  if (active == 0) return 0.0;
  if (gradient == nullptr) return total / active;

  std::vector<Vector> du(n, Vector(d, 0.0));
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) {
      double c = g[i][j] / (active * tau);
      if (c == 0) continue;
      for (int k = 0; k < d; ++k) {
        du[i][k] += c * u[j][k];
        du[j][k] += c * u[i][k];
      }
    }
  }
  for (size_t i = 0; i < n; ++i) {
    double along = dot(u[i], du[i]);
    Vector dv(d);
    for (int k = 0; k < d; ++k) {
      dv[k] = (du[i][k] - u[i][k] * along) / norm[i];
    }
    double share = 1.0 / static_cast<double>(features[i].size());
    for (uint32_t f : features[i]) {
      auto &row = (*gradient)[f];
      row.resize(d, 0.0);
      for (int k = 0; k < d; ++k) row[k] += dv[k] * share;
    }
  }
  return total / active;
}

TrainReport TrainRetriever(Encoder &encoder, std::span<const TrainItem> items,
                           const TrainConfig &config) {
  if (config.batch_size < 2 || config.epochs < 1 || !(config.learning_rate > 0)) {
    throw Error(ErrorCode::kInvalidArgument, "bad retriever training config");
  }
  std::map<std::string, std::vector<size_t>> by_relation;
  for (size_t i = 0; i < items.size(); ++i) {
    for (const std::string &r : items[i].relations) by_relation[r].push_back(i);
  }
  // Relations of each item that some other item shares.
  std::vector<std::vector<const std::vector<size_t> *>> shared(items.size());
  std::vector<size_t> anchors;
  for (size_t i = 0; i < items.size(); ++i) {
    for (const std::string &r : items[i].relations) {
      const auto &group = by_relation[r];
      if (group.size() >= 2) shared[i].push_back(&group);
    }
    if (!shared[i].empty()) anchors.push_back(i);
  }
  if (anchors.empty()) {
    throw Error(ErrorCode::kFailedPrecondition, "untrainable dataset");
  }

  std::mt19937_64 rng(config.seed);
  const size_t pairs = std::max(1, config.batch_size / 2);
  const size_t steps_per_epoch = (anchors.size() + pairs - 1) / pairs;
  const double total_steps = static_cast<double>(steps_per_epoch * config.epochs);
  TrainReport report;
  const int d = encoder.dim();
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(anchors.begin(), anchors.end(), rng);
    double epoch_loss = 0;
    for (size_t start = 0; start < anchors.size(); start += pairs) {
      std::vector<size_t> batch;
      for (size_t a = start; a < std::min(anchors.size(), start + pairs); ++a) {
        size_t anchor = anchors[a];
        const auto &groups = shared[anchor];
        const auto &group = *groups[rng() % groups.size()];
        size_t positive = anchor;
        while (positive == anchor) positive = group[rng() % group.size()];
        batch.push_back(anchor);
        batch.push_back(positive);
      }
      std::vector<std::vector<uint32_t>> features;
      for (size_t i : batch) {
        features.push_back(
            encoder.TrainingFeatures(items[i].question, items[i].mentions, rng));
      }
      std::vector<std::vector<double>> weights(batch.size(),
                                               std::vector<double>(batch.size()));
      for (size_t i = 0; i < batch.size(); ++i) {
        for (size_t j = 0; j < batch.size(); ++j) {
          weights[i][j] = RelationF1(items[batch[i]].relations, items[batch[j]].relations);
        }
      }
      SparseGradient gradient;
      epoch_loss += BatchLoss(encoder, features, weights, &gradient);
      double lr = config.learning_rate * (1.0 - report.steps / total_steps);
      // Apply in feature order so results do not depend on hash-map layout.
      std::vector<uint32_t> keys;
      for (const auto &[f, _] : gradient) keys.push_back(f);
      std::sort(keys.begin(), keys.end());
      for (uint32_t f : keys) {
        const auto &gr = gradient[f];
        double *r = encoder.row(f);
        for (int k = 0; k < d; ++k) r[k] -= lr * gr[k];
      }
      ++report.steps;
    }
    report.epoch_loss.push_back(epoch_loss / static_cast<double>(steps_per_epoch));
  }
  encoder.RefreshVersion();
  return report;
}

}  // namespace casebase
