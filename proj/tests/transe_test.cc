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


#include "casebase/transe.h"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "casebase/error.h"
#include "casebase/worldgen.h"

namespace casebase {
namespace {

TransEConfig Config(int dim, uint64_t seed = 1) {
  TransEConfig c;
  c.dim = dim;
  c.seed = seed;
  return c;
}

std::string Bytes(const TransE &model, const std::string &name) {
  auto path = std::filesystem::temp_directory_path() / name;
  model.Save(path);
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

KnowledgeBase SmallKb() {
  return KnowledgeBase::FromTriples({{"a", "r.x.p", "b"},
                                     {"b", "r.x.p", "c"},
                                     {"a", "r.x.q", "c"},
                                     {"c", "r.x.q", "d"},
                                     {"d", "r.x.p", "a"},
                                     {"a", "r.x.year", "1999", TermKind::kNumber}});
}

TEST(TransETest, InactiveHingeLeavesParametersAlone) {
  TransE model({"h", "t", "far"}, {"r"}, Config(4));
  std::fill(model.relation(0).begin(), model.relation(0).end(), 0.0);
  auto set = [&](size_t i, std::vector<double> v) {
    std::copy(v.begin(), v.end(), model.entity(i).begin());
  };
  set(0, {1, 0, 0, 0});
  set(1, {1, 0, 0, 0});
  set(2, {-1, 0, 0, 0});
  std::string before = Bytes(model, "transe_before.bin");
  IndexedTriple pos{0, 0, 1}, neg{0, 0, 2};
  TransEGradient gradient;
  EXPECT_EQ(model.HingeLoss(pos, neg, &gradient), 0.0);
  EXPECT_TRUE(gradient.entity.empty());
  EXPECT_TRUE(gradient.relation.empty());
  EXPECT_EQ(model.Step(pos, neg, 0.5), 0.0);
  EXPECT_EQ(Bytes(model, "transe_after.bin"), before);
}

TEST(TransETest, GradientMatchesFiniteDifferences) {
  KnowledgeBase kb = KnowledgeBase::FromTriples({{"a", "r1", "b"},
                                                 {"b", "r2", "c"},
                                                 {"c", "r1", "d"},
                                                 {"d", "r2", "e"},
                                                 {"e", "r1", "a"}});
  TransEConfig config = Config(8, 3);
  config.margin = 4.0;  // keeps every hinge active
  std::vector<std::string> entities{"a", "b", "c", "d", "e"}, relations{"r1", "r2"};
  TransE model(entities, relations, config);
  std::mt19937_64 rng(5);
  const double eps = 1e-6;
  double worst = 0;
  for (int trial = 0; trial < 5; ++trial) {
    IndexedTriple pos{static_cast<size_t>(trial), static_cast<size_t>(trial % 2),
                      static_cast<size_t>((trial + 1) % 5)};
    IndexedTriple neg = pos;
    neg.tail = (pos.tail + 1 + rng() % 4) % 5;
    if (trial % 2) std::swap(neg.head, neg.tail);
    TransEGradient gradient;
    ASSERT_GT(model.HingeLoss(pos, neg, &gradient), 0.0);
    auto check = [&](std::span<double> params, const std::vector<double> *analytic) {
      for (size_t i = 0; i < params.size(); ++i) {
        double saved = params[i];
        params[i] = saved + eps;
        double up = model.HingeLoss(pos, neg, nullptr);
        params[i] = saved - eps;
        double down = model.HingeLoss(pos, neg, nullptr);
        params[i] = saved;
        double numeric = (up - down) / (2 * eps);
        double a = analytic ? (*analytic)[i] : 0.0;
        double err = std::abs(a - numeric) / std::max(1e-3, std::abs(a) + std::abs(numeric));
        worst = std::max(worst, err);
      }
    };
    for (size_t e = 0; e < 5; ++e) {
      auto it = gradient.entity.find(e);
      check(model.entity(e), it == gradient.entity.end() ? nullptr : &it->second);
    }
    for (size_t r = 0; r < 2; ++r) {
      auto it = gradient.relation.find(r);
      check(model.relation(r), it == gradient.relation.end() ? nullptr : &it->second);
    }
  }
  EXPECT_LT(worst, 1e-4);
}

TEST(TransETest, TrainingKeepsUnitEntitiesAndLowersLoss) {
  World world = GenerateWorld(DefaultWorldConfig(17, 300));
  TransEReport report;
  TransEConfig config = Config(50);
  config.epochs = 30;
  TransE model = TrainTransE(world.incomplete, config, &report);
  ASSERT_EQ(report.epoch_loss.size(), 30u);
  EXPECT_LE(report.epoch_loss.back(), report.epoch_loss.front());
  for (size_t i = 0; i < model.num_entities(); ++i) {
    double norm = 0;
    for (double x : model.entity(i)) {
      ASSERT_TRUE(std::isfinite(x));
      norm += x * x;
    }
    EXPECT_NEAR(std::sqrt(norm), 1.0, 1e-6);
  }
}

TEST(TransETest, LiteralTriplesAreExcluded) {
  TransEReport report;
  TransE model = TrainTransE(SmallKb(), Config(8), &report);
  EXPECT_EQ(report.triples, 5u);
  EXPECT_EQ(model.num_entities(), 4u);
  EXPECT_FALSE(model.EntityIndex("1999"));
  EXPECT_THROW(TrainTransE(KnowledgeBase::FromTriples(
                               {{"a", "r.x.year", "1999", TermKind::kNumber}}),
                           Config(8)),
               Error);
}

TEST(TransETest, DeterministicAndCheckpointRoundTrips) {
  TransE a = TrainTransE(SmallKb(), Config(8, 9));
  TransE b = TrainTransE(SmallKb(), Config(8, 9));
  EXPECT_EQ(Bytes(a, "transe_a.bin"), Bytes(b, "transe_b.bin"));
  auto path = std::filesystem::temp_directory_path() / "transe_a.bin";
  TransE loaded = TransE::Load(path);
  EXPECT_EQ(Bytes(loaded, "transe_c.bin"), Bytes(a, "transe_a.bin"));
  EXPECT_EQ(loaded.RelationCosine("r.x.p", "r.x.q"), a.RelationCosine("r.x.p", "r.x.q"));
  std::string bytes = Bytes(a, "transe_a.bin");
  {
    std::ofstream out(path, std::ios::binary);
    out << bytes.substr(0, bytes.size() - 3);
  }
  try {
    TransE::Load(path);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kDataLoss);
  }
}

TEST(TransETest, PlantedDuplicatesAreNearestNeighbors) {
  World world = GenerateWorld(DefaultWorldConfig(17, 1000));
  TransE model = TrainTransE(world.full, TransEConfig{});
  auto in_top3 = [&](const std::string &a, const std::string &b) {
    std::vector<std::pair<double, std::string>> ranked;
    for (size_t i = 0; i < model.num_relations(); ++i) {
      const std::string &other = model.relation_name(i);
      if (other != a) ranked.push_back({-*model.RelationCosine(a, other), other});
    }
    std::sort(ranked.begin(), ranked.end());
    for (size_t i = 0; i < 3 && i < ranked.size(); ++i) {
      if (ranked[i].second == b) return true;
    }
    return false;
  };
  auto norm = [&](const std::string &r) {
    double n = 0;
    for (double x : model.relation(*model.RelationIndex(r))) n += x * x;
    return std::sqrt(n);
  };
  double mean_norm = 0;
  for (size_t i = 0; i < model.num_relations(); ++i) {
    mean_norm += norm(model.relation_name(i)) / model.num_relations();
  }
  int hits = 0, total = 0;
  for (const auto &[r, dup] : world.synonyms) {
    ASSERT_TRUE(model.RelationIndex(r)) << r;
    ASSERT_TRUE(model.RelationIndex(dup)) << dup;
    if (world.Schema(r)->mode == FanoutMode::kSymmetricGroups) {
      // h + r = t and t + r = h force r toward zero, leaving its direction
      // to initialization noise; cosine carries no signal here.
      EXPECT_LT(norm(r), 0.5 * mean_norm) << r;
      continue;
    }
    ++total;
    hits += in_top3(r, dup) && in_top3(dup, r);
  }
  ASSERT_GE(total, 4);
  EXPECT_GE(hits, 0.9 * total);
}

}  // namespace
}  // namespace casebase
