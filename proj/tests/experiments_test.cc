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


#include "casebase/experiments.h"

#include <gtest/gtest.h>

#include "casebase/error.h"

namespace casebase {
namespace {

class ExperimentsTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    world_ = new World(GenerateWorld(DefaultWorldConfig(11, 500)));
    TransEConfig config;
    config.epochs = 20;
    transe_ = new std::shared_ptr<const TransE>(
        std::make_shared<const TransE>(TrainTransE(world_->incomplete, config)));
  }
  static void TearDownTestSuite() {
    delete transe_;
    delete world_;
  }

  static Dataset Make(SplitSpec::Kind kind) {
    SplitSpec split;
    split.kind = kind;
    split.n_train = 500;
    split.n_valid = 20;
    split.n_test = 120;
    if (kind == SplitSpec::Kind::kHeldoutRelation) {
      split.heldout_relations = {"people.person.education"};
    }
    return GenerateDataset(*world_, split, 4);
  }

  static ExperimentInputs Inputs(const Dataset &data) {
    ExperimentInputs in;
    in.world = world_;
    in.dataset = &data;
    in.encoder = std::make_shared<const Encoder>();
    in.transe = *transe_;
    in.threads = 2;
    return in;
  }

  static World *world_;
  static std::shared_ptr<const TransE> *transe_;
};

World *ExperimentsTest::world_ = nullptr;
std::shared_ptr<const TransE> *ExperimentsTest::transe_ = nullptr;

TEST_F(ExperimentsTest, SplitKindMismatchIsRejected) {
  Dataset standard = Make(SplitSpec::Kind::kStandard);
  for (auto kind : {ExperimentKind::kHeldoutInjection, ExperimentKind::kNovelCombination}) {
    try {
      RunExperiment(kind, Inputs(standard));
      FAIL() << ExperimentKindName(kind);
    } catch (const Error &e) {
      EXPECT_EQ(e.code(), ErrorCode::kFailedPrecondition);
      EXPECT_NE(std::string(e.what()).find("standard"), std::string::npos);
    }
  }
  EXPECT_THROW(ParseExperimentKind("t5"), Error);
  EXPECT_EQ(ParseExperimentKind("k_ablation"), ExperimentKind::kKAblation);
}

TEST_F(ExperimentsTest, KAblationHasFourRowsWithMonotoneRecall) {
  Dataset data = Make(SplitSpec::Kind::kStandard);
  ExperimentInputs in = Inputs(data);
  in.flags.generator.use_global_vocab = true;
  ExperimentReport r = RunExperiment(ExperimentKind::kKAblation, in);
  const auto &rows = r.report.at("rows");
  ASSERT_EQ(rows.size(), 4u);
  std::vector<size_t> ks;
  for (size_t i = 0; i < rows.size(); ++i) {
    ks.push_back(rows[i].at("k").get<size_t>());
    if (i > 0) {
      EXPECT_GE(rows[i].at("recall_at_k").get<double>(),
                rows[i - 1].at("recall_at_k").get<double>());
    }
  }
  EXPECT_EQ(ks, (std::vector<size_t>{0, 1, 10, 20}));
  EXPECT_TRUE(r.report.at("recall_monotone").get<bool>());
  EXPECT_EQ(r.log.size(), 4 * data.test.size());
}

TEST_F(ExperimentsTest, HeldoutInjectionLeavesUntouchedQuestionsIdentical) {
  Dataset data = Make(SplitSpec::Kind::kHeldoutRelation);
  ExperimentInputs in = Inputs(data);
  in.flags.revise = ReviseMode::kOff;
  in.cases_per_relation = 4;
  ExperimentReport r = RunExperiment(ExperimentKind::kHeldoutInjection, in);
  const auto &j = r.report;
  ASSERT_GT(j.at("n_heldout_questions").get<int>(), 0);
  EXPECT_EQ(j.at("before").at("heldout").at("exact_match").get<double>(), 0.0);
  EXPECT_EQ(j.at("injected").size(), 4u);
  for (const auto &c : j.at("injected")) {
    EXPECT_EQ(c.at("id").get<std::string>().rfind("inj-", 0), 0u);
    EXPECT_NE(c.at("sparql").get<std::string>().find("people.person.education"),
              std::string::npos);
  }
  EXPECT_EQ(j.at("initial_unaffected_identical"), j.at("initial_unaffected"));
  EXPECT_GT(j.at("after").at("heldout").at("exact_match").get<double>(), 0.0);
  EXPECT_EQ(j.at("gradient_steps").get<int>(), 0);
}

TEST_F(ExperimentsTest, NovelCombinationCountsCoverTheTestSet) {
  Dataset data = Make(SplitSpec::Kind::kNovelCombination);
  ExperimentReport r = RunExperiment(ExperimentKind::kNovelCombination, Inputs(data));
  size_t n = 0, k20 = 0;
  for (const auto &row : r.report.at("counts")) {
    n += row.at("n").get<size_t>();
    k20 += row.at("correct_k20").get<size_t>();
    EXPECT_LE(row.at("correct_k0").get<size_t>(), row.at("n").get<size_t>());
  }
  EXPECT_EQ(n, data.test.size());
  double em = r.report.at("runs").at("k=20").at("exact_match").get<double>();
  EXPECT_NEAR(em, static_cast<double>(k20) / n, 1e-12);
}

TEST_F(ExperimentsTest, CorruptedBenchmarkSwapsToAbsentSynonyms) {
  Dataset data = Make(SplitSpec::Kind::kStandard);
  auto bench = CorruptLogicalForms(*world_, world_->incomplete, data.test, 2);
  ASSERT_FALSE(bench.empty());
  std::map<std::string, std::string> partner;
  for (const auto &[a, b] : world_->synonyms) {
    partner[a] = b;
    partner[b] = a;
  }
  for (const auto &c : bench) {
    ASSERT_GE(c.swapped_slots.size(), 1u);
    ASSERT_LE(c.swapped_slots.size(), 2u);
    EXPECT_EQ(SkeletonOf(c.corrupted), SkeletonOf(c.source->lf));
    for (size_t i = 0; i < c.corrupted.patterns.size(); ++i) {
      const std::string &was = c.source->lf.patterns[i].relation;
      const std::string &now = c.corrupted.patterns[i].relation;
      bool swapped = std::count(c.swapped_slots.begin(), c.swapped_slots.end(), i) > 0;
      EXPECT_EQ(now, swapped ? partner.at(was) : was);
    }
    EXPECT_TRUE(Execute(c.corrupted, world_->incomplete).empty());
    EXPECT_EQ(Execute(c.source->lf, world_->incomplete), c.source->answers);
  }
  SurfaceSimilarity surface(world_->incomplete);
  EXPECT_EQ(MeasureRecovery(bench, world_->incomplete, nullptr, {}).recovered, 0u);
  RecoveryStats s = MeasureRecovery(bench, world_->incomplete, &surface, {});
  EXPECT_EQ(s.total, bench.size());
  EXPECT_GT(s.recovered, 0u);
}

TEST_F(ExperimentsTest, ReviseAblationReportsEveryBackend) {
  Dataset data = Make(SplitSpec::Kind::kStandard);
  ExperimentReport r = RunExperiment(ExperimentKind::kReviseAblation, Inputs(data));
  for (const char *mode : {"off", "surface", "transe"}) {
    EXPECT_TRUE(r.report.at("runs").contains(mode));
    EXPECT_TRUE(r.report.at("corrupted_benchmark").contains(mode));
  }
  const auto &b = r.report.at("corrupted_benchmark");
  EXPECT_GE(b.at("transe").at("recovered").get<int>(),
            b.at("transe_greedy").at("recovered").get<int>());
  for (const auto &[mode, run] : r.report.at("runs").items()) {
    EXPECT_EQ(run.at("structure_preserved"), run.at("revisions_attempted")) << mode;
  }
}

}  // namespace
}  // namespace casebase
