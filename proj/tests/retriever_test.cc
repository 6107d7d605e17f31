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

#include <cmath>
#include <random>

#include "casebase/case_memory.h"
#include "casebase/error.h"
#include "gtest/gtest.h"

namespace casebase {
namespace {

double Dot(const Vector &a, const Vector &b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Mention MentionOf(const std::string &question, const std::string &surface,
                  const std::string &entity) {
  size_t at = question.find(surface);
  return {at, at + surface.size(), surface, entity, MentionSource::kGold};
}

TEST(EncoderTest, SelfSimilarityAndNorm) {
  Encoder enc;
  std::mt19937_64 rng(1);
  const std::string alphabet = "abc xyz?'!.";
  for (int i = 0; i < 200; ++i) {
    std::string q;
    for (int n = rng() % 30; n > 0; --n) q += alphabet[rng() % alphabet.size()];
    Vector v = enc.Encode(q, {});
    EXPECT_NEAR(Dot(v, v), 1.0, 1e-6) << q;
    EXPECT_NEAR(Dot(v, enc.Encode(q, {})), 1.0, 1e-12);
  }
}

TEST(EncoderTest, EmptyQuestionUsesReservedFeature) {
  Encoder enc;
  EXPECT_EQ(enc.Features("?!", {}, {}), std::vector<uint32_t>{0});
  Vector v = enc.Encode("", {});
  EXPECT_NEAR(Dot(v, v), 1.0, 1e-6);
}

TEST(EncoderTest, MaskingRemovesTheOnlyDifference) {
  std::string a = "Who is Justin Bieber's brother?";
  std::string b = "Who is Rihanna's brother?";
  std::vector<Mention> ma{MentionOf(a, "Justin Bieber", "m.06w2sn5")};
  std::vector<Mention> mb{MentionOf(b, "Rihanna", "m.06wxw")};
  std::mt19937_64 rng(3);
  EncoderConfig always;
  always.p_mask = 1.0;
  Encoder masked(always);
  EXPECT_EQ(masked.TrainingFeatures(a, ma, rng), masked.TrainingFeatures(b, mb, rng));
  EXPECT_EQ(masked.EncodeFeatures(masked.TrainingFeatures(a, ma, rng)),
            masked.EncodeFeatures(masked.TrainingFeatures(b, mb, rng)));
  EncoderConfig never;
  never.p_mask = 0.0;
  Encoder plain(never);
  EXPECT_NE(plain.EncodeFeatures(plain.TrainingFeatures(a, ma, rng)),
            plain.EncodeFeatures(plain.TrainingFeatures(b, mb, rng)));
  // Inference never masks by default.
  EXPECT_NE(masked.Encode(a, ma), masked.Encode(b, mb));
}

TEST(RelationF1Test, Formula) {
  std::set<std::string> r1{"r1"}, r12{"r1", "r2"}, r3{"r3"};
  EXPECT_DOUBLE_EQ(RelationF1(r12, r12), 1.0);
  EXPECT_DOUBLE_EQ(RelationF1(r1, r3), 0.0);
  EXPECT_DOUBLE_EQ(RelationF1(r12, r1), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(RelationF1(r1, {}), 0.0);
}

// Central finite differences over every parameter the batch touches.
TEST(BatchLossTest, GradientMatchesFiniteDifferences) {
  EncoderConfig config;
  config.hash_bits = 6;
  config.dim = 8;
  config.temperature = 0.5;
  config.seed = 9;
  Encoder enc(config);
  std::vector<std::vector<uint32_t>> features = {
      {1, 2, 3}, {2, 4, 5, 5}, {6, 7}, {1, 8, 9, 10, 3}};
  std::vector<std::vector<double>> weights = {
      {0, 1, 0.5, 0}, {1, 0, 0, 2.0 / 3}, {0.5, 0, 0, 0}, {0, 2.0 / 3, 0, 0}};
  SparseGradient grad;
  BatchLoss(enc, features, weights, &grad);
  const double h = 1e-6;
  double diff2 = 0, norm2 = 0;
  for (const auto &[f, g] : grad) {
    for (int k = 0; k < config.dim; ++k) {
      double saved = enc.row(f)[k];
      enc.row(f)[k] = saved + h;
      double up = BatchLoss(enc, features, weights, nullptr);
      enc.row(f)[k] = saved - h;
      double down = BatchLoss(enc, features, weights, nullptr);
      enc.row(f)[k] = saved;
      double numeric = (up - down) / (2 * h);
      diff2 += (numeric - g[k]) * (numeric - g[k]);
      norm2 += numeric * numeric;
    }
  }
  ASSERT_GT(norm2, 0);
  EXPECT_LT(std::sqrt(diff2 / norm2), 1e-4);
}

TEST(BatchLossTest, ZeroWeightsContributeNothing) {
  Encoder enc;
  std::vector<std::vector<uint32_t>> features = {{1, 2}, {3}};
  std::vector<std::vector<double>> weights = {{0, 0}, {0, 0}};
  SparseGradient grad;
  EXPECT_EQ(BatchLoss(enc, features, weights, &grad), 0.0);
  EXPECT_TRUE(grad.empty());
}

std::vector<TrainItem> Paraphrases() {
  std::string a = "Who is Justin Bieber's brother?";
  std::string b = "Name the sibling of Rihanna.";
  return {{a, {MentionOf(a, "Justin Bieber", "e1")}, {"people.person.sibling_s"}},
          {b, {MentionOf(b, "Rihanna", "e2")}, {"people.person.sibling_s"}}};
}

TEST(TrainRetrieverTest, TwoParaphrasesLossStrictlyDecreases) {
  EncoderConfig config;
  config.p_mask = 0.0;
  Encoder enc(config);
  TrainConfig train;
  train.epochs = 50;
  train.learning_rate = 0.5;
  auto items = Paraphrases();
  TrainReport report = TrainRetriever(enc, items, train);
  ASSERT_EQ(report.epoch_loss.size(), 50);
  for (size_t i = 1; i < report.epoch_loss.size(); ++i) {
    EXPECT_LT(report.epoch_loss[i], report.epoch_loss[i - 1]) << "epoch " << i;
  }
}

TEST(TrainRetrieverTest, Deterministic) {
  auto items = Paraphrases();
  items.push_back({"what is the capital of France", {}, {"location.country.capital"}});
  items.push_back({"capital city of Peru?", {}, {"location.country.capital"}});
  Encoder a, b;
  TrainConfig train;
  train.epochs = 3;
  TrainRetriever(a, items, train);
  TrainRetriever(b, items, train);
  EXPECT_EQ(a.params(), b.params());
  EXPECT_EQ(a.version(), b.version());
  EXPECT_NE(a.version(), Encoder().version());
}

TEST(TrainRetrieverTest, NoPositivesIsUntrainable) {
  std::vector<TrainItem> items = {{"a", {}, {"r1"}}, {"b", {}, {"r2"}}};
  Encoder enc;
  try {
    TrainRetriever(enc, items, {});
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(std::string(e.what()), "untrainable dataset");
  }
}

TEST(EncoderTest, CheckpointRoundTrip) {
  EncoderConfig config;
  config.hash_bits = 8;
  config.dim = 4;
  config.p_mask = 0.25;
  Encoder enc(config);
  auto path = std::filesystem::temp_directory_path() / "casebase_encoder_test.bin";
  enc.Save(path);
  Encoder loaded = Encoder::Load(path);
  EXPECT_EQ(loaded.params(), enc.params());
  EXPECT_EQ(loaded.version(), enc.version());
  EXPECT_EQ(loaded.config().p_mask, 0.25);
  std::filesystem::resize_file(path, 100);
  EXPECT_THROW(Encoder::Load(path), Error);
  std::filesystem::remove(path);
}

// Synthetic analog of the paraphrase ordering: after training, two sibling
// questions about different people are closer than two questions about the
// same person with different relations.
TEST(TrainRetrieverTest, ParaphraseOutranksSameEntityAfterTraining) {
  const std::vector<std::string> people = {
      "Ada Lovelace",  "Alan Turing", "Grace Hopper", "Edsger Dijkstra",
      "Barbara Liskov", "Donald Knuth", "Niklaus Wirth", "Frances Allen"};
  const std::vector<std::pair<std::string, std::string>> templates = {
      {"who is the sibling of {E}?", "people.person.sibling_s"},
      {"who is {E}'s brother?", "people.person.sibling_s"},
      {"where was {E} born?", "people.person.place_of_birth"},
      {"what city is the birthplace of {E}?", "people.person.place_of_birth"},
      {"what is the profession of {E}?", "people.person.profession"},
      {"what job does {E} have?", "people.person.profession"}};
  std::vector<TrainItem> items;
  for (size_t p = 0; p < people.size(); ++p) {
    for (const auto &[t, rel] : templates) {
      std::string q = t;
      size_t at = q.find("{E}");
      q.replace(at, 3, people[p]);
      items.push_back({q, {{at, at + people[p].size(), people[p], "e", MentionSource::kGold}},
                       {rel}});
    }
  }
  Encoder enc;
  TrainConfig train;
  train.epochs = 30;
  TrainRetriever(enc, items, train);
  std::string bieber = "who is Justin Bieber's brother?";
  std::string rihanna = "who is Rihanna's brother?";
  std::string other = "where was Justin Bieber born?";
  Vector q = enc.Encode(bieber, std::vector<Mention>{MentionOf(bieber, "Justin Bieber", "a")});
  Vector para = enc.Encode(rihanna, std::vector<Mention>{MentionOf(rihanna, "Rihanna", "b")});
  Vector same = enc.Encode(other, std::vector<Mention>{MentionOf(other, "Justin Bieber", "a")});
  EXPECT_GT(Dot(q, para), Dot(q, same));
}

}  // namespace
}  // namespace casebase
