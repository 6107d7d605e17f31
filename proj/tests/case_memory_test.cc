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

#include "casebase/case_memory.h"

#include <random>
#include <sstream>

#include "casebase/error.h"
#include "gtest/gtest.h"

namespace casebase {
namespace {

Encoder SmallEncoder(uint64_t seed = 1) {
  EncoderConfig config;
  config.hash_bits = 10;
  config.dim = 16;
  config.seed = seed;
  return Encoder(config);
}

Case MakeCase(const std::string &id, const std::string &question, const std::string &rel) {
  return {id, question, {},
          ParseLogicalForm("SELECT ?x WHERE { ns:m.1 ns:" + rel + " ?x . }"), {}};
}

std::vector<Case> RandomCases(std::mt19937_64 &rng, int n) {
  const std::vector<std::string> words = {"who", "what", "is", "the", "capital",
                                          "sibling", "of", "born", "currency", "film"};
  std::vector<Case> cases;
  for (int i = 0; i < n; ++i) {
    std::string q;
    for (int w = 0; w < 6; ++w) q += words[rng() % words.size()] + " ";
    cases.push_back(MakeCase("c" + std::to_string(i), q, "r.x_" + std::to_string(rng() % 7)));
  }
  return cases;
}

std::string SnapshotOf(const CaseMemory &memory) {
  std::ostringstream out;
  memory.Snapshot(out);
  return out.str();
}

TEST(CaseMemoryTest, InjectedCaseIsRetrievableImmediately) {
  Encoder enc = SmallEncoder();
  std::mt19937_64 rng(1);
  CaseMemory memory = CaseMemory::Build(RandomCases(rng, 50), enc);
  std::string q = "What is the Mexican Peso called?";
  size_t at = q.find("Mexican Peso");
  std::vector<Mention> mentions{{at, at + 12, "", "m.012ts8", MentionSource::kGold}};
  uint64_t before = enc.encode_count();
  InjectResult r = memory.Inject(
      q, "SELECT DISTINCT ?x WHERE { ns:m.012ts8 ns:finance.currency.currency_code ?x . }",
      mentions, enc, nullptr, "", "expert", "2026-01-01T00:00:00Z");
  // One encode per injection, nothing else.
  EXPECT_EQ(enc.encode_count(), before + 1);
  EXPECT_EQ(r.id, "inj-1");
  auto top = Retrieve(enc, memory, q, mentions, 1);
  ASSERT_EQ(top.size(), 1);
  EXPECT_EQ(top[0].item->id, r.id);
  EXPECT_EQ(top[0].item->provenance.kind, Provenance::Kind::kInjected);
  EXPECT_EQ(top[0].item->mentions[0].surface, "Mexican Peso");
}

TEST(CaseMemoryTest, InjectThenRemoveRestoresSnapshot) {
  Encoder enc = SmallEncoder();
  std::mt19937_64 rng(2);
  CaseMemory memory = CaseMemory::Build(RandomCases(rng, 20), enc);
  std::string before = SnapshotOf(memory);
  InjectResult r = memory.Inject("q", "SELECT ?x WHERE { ns:a ns:b.c ?x . }", {}, enc);
  EXPECT_NE(SnapshotOf(memory), before);
  EXPECT_TRUE(memory.Remove(r.id));
  EXPECT_EQ(SnapshotOf(memory), before);
  EXPECT_FALSE(memory.Remove(r.id));
}

TEST(CaseMemoryTest, MalformedInjectionLeavesMemoryUnchanged) {
  Encoder enc = SmallEncoder();
  std::mt19937_64 rng(3);
  CaseMemory memory = CaseMemory::Build(RandomCases(rng, 5), enc);
  std::string before = SnapshotOf(memory);
  EXPECT_THROW(memory.Inject("q", "SELECT ?x WHERE { ns:a ?r ?x . }", {}, enc), ParseError);
  EXPECT_THROW(memory.Inject("q", "SELECT ?x WHERE { ns:a ns:b ?x . }", {}, enc, nullptr, "c0"),
               Error);
  std::vector<Mention> bad{{3, 99, "", "e", MentionSource::kGold}};
  EXPECT_THROW(memory.Inject("q", "SELECT ?x WHERE { ns:a ns:b ?x . }", bad, enc), Error);
  EXPECT_EQ(SnapshotOf(memory), before);
}

TEST(CaseMemoryTest, UnknownRelationsAreWarnings) {
  Encoder enc = SmallEncoder();
  CaseMemory memory(enc.version(), enc.dim());
  std::istringstream tsv("a\tb.c\td\n");
  KnowledgeBase kb = KnowledgeBase::Parse(tsv);
  auto r = memory.Inject("q", "SELECT ?x WHERE { ns:a ns:b.c ?x . ?x ns:z.z ?y . }", {}, enc,
                         &kb);
  EXPECT_EQ(r.warnings, std::vector<std::string>{"z.z"});
  EXPECT_EQ(memory.size(), 1);
}

TEST(CaseMemoryTest, SnapshotRoundTrip) {
  Encoder enc = SmallEncoder();
  CaseMemory empty(enc.version(), enc.dim());
  std::istringstream in_empty(SnapshotOf(empty));
  EXPECT_EQ(CaseMemory::Load(in_empty), empty);

  std::mt19937_64 rng(4);
  CaseMemory memory = CaseMemory::Build(RandomCases(rng, 2000), enc);
  memory.Inject("injected one", "SELECT ?x WHERE { ns:a ns:b.c ?x . }", {}, enc, nullptr, "",
                "me", "now");
  std::string bytes = SnapshotOf(memory);
  std::istringstream in(bytes);
  bool reencoded = true;
  CaseMemory loaded = CaseMemory::Load(in, &enc, &reencoded);
  EXPECT_FALSE(reencoded);
  EXPECT_EQ(loaded, memory);
  EXPECT_EQ(SnapshotOf(loaded), bytes);
  // Fresh ids continue after the loaded ones.
  EXPECT_EQ(loaded.Inject("x", "SELECT ?x WHERE { ns:a ns:b.c ?x . }", {}, enc).id, "inj-2");
}

TEST(CaseMemoryTest, OlderEncoderSnapshotIsReencoded) {
  Encoder old_enc = SmallEncoder(1);
  Encoder new_enc = SmallEncoder(2);
  std::mt19937_64 rng(5);
  auto cases = RandomCases(rng, 10);
  CaseMemory memory = CaseMemory::Build(cases, old_enc);
  std::istringstream in(SnapshotOf(memory));
  bool reencoded = false;
  CaseMemory loaded = CaseMemory::Load(in, &new_enc, &reencoded);
  EXPECT_TRUE(reencoded);
  EXPECT_EQ(loaded, CaseMemory::Build(cases, new_enc));
}

TEST(CaseMemoryTest, CorruptSnapshotsNameOffsets) {
  Encoder enc = SmallEncoder();
  std::mt19937_64 rng(6);
  std::string bytes = SnapshotOf(CaseMemory::Build(RandomCases(rng, 3), enc));
  size_t first_case = bytes.find('\n') + 1;
  std::string garbled = bytes;
  garbled[first_case] = '#';
  std::istringstream in(garbled);
  try {
    CaseMemory::Load(in);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kDataLoss);
    EXPECT_NE(std::string(e.what()).find("offset " + std::to_string(first_case)),
              std::string::npos)
        << e.what();
  }
  std::istringstream truncated(bytes.substr(0, bytes.size() - 5));
  EXPECT_THROW(CaseMemory::Load(truncated), Error);
  std::istringstream trailing(bytes + "x");
  EXPECT_THROW(CaseMemory::Load(trailing), Error);
}

TEST(RetrieveTest, KZeroAndExclude) {
  Encoder enc = SmallEncoder();
  std::mt19937_64 rng(7);
  CaseMemory memory = CaseMemory::Build(RandomCases(rng, 30), enc);
  const Case &self = *memory.cases()[4];
  EXPECT_TRUE(Retrieve(enc, memory, self.question, {}, 0).empty());
  auto with_self = Retrieve(enc, memory, self.question, {}, 30);
  EXPECT_EQ(with_self.size(), 30);
  auto without = Retrieve(enc, memory, self.question, {}, 30, self.id);
  EXPECT_EQ(without.size(), 29);
  for (const auto &r : without) EXPECT_NE(r.item->id, self.id);
  for (size_t i = 1; i < without.size(); ++i) {
    EXPECT_GE(without[i - 1].similarity, without[i].similarity);
  }
}

TEST(RetrieveTest, StaleEncoderIsRejected) {
  Encoder enc = SmallEncoder(1);
  std::mt19937_64 rng(8);
  CaseMemory memory = CaseMemory::Build(RandomCases(rng, 3), enc);
  try {
    Retrieve(SmallEncoder(2), memory, "q", {}, 1);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kFailedPrecondition);
  }
}

// Injecting into a built memory retrieves exactly like building from the
// union.
TEST(RetrieveTest, InjectionMatchesRebuild) {
  Encoder enc = SmallEncoder();
  std::mt19937_64 rng(9);
  for (int iter = 0; iter < 20; ++iter) {
    auto base = RandomCases(rng, 40);
    auto extra = RandomCases(rng, 5);
    CaseMemory incremental = CaseMemory::Build(base, enc);
    auto all = base;
    for (size_t i = 0; i < extra.size(); ++i) {
      std::string id = "inj-" + std::to_string(iter) + "-" + std::to_string(i);
      incremental.Inject(extra[i].question, PrintLogicalForm(extra[i].lf), {}, enc, nullptr,
                         id);
      extra[i].id = id;
      extra[i].provenance.kind = Provenance::Kind::kInjected;
      all.push_back(extra[i]);
    }
    CaseMemory rebuilt = CaseMemory::Build(all, enc);
    std::string probe = extra[rng() % extra.size()].question + " the";
    auto a = Retrieve(enc, incremental, probe, {}, 10);
    auto b = Retrieve(enc, rebuilt, probe, {}, 10);
    ASSERT_EQ(a.size(), b.size());
    for (size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].item->id, b[i].item->id);
      EXPECT_EQ(a[i].similarity, b[i].similarity);
    }
  }
}

TEST(RetrieveTest, RecallIsMonotoneInK) {
  Encoder enc = SmallEncoder();
  std::mt19937_64 rng(10);
  CaseMemory memory = CaseMemory::Build(RandomCases(rng, 60), enc);
  for (int iter = 0; iter < 30; ++iter) {
    std::set<std::string> gold{"r.x_" + std::to_string(rng() % 7),
                               "r.x_" + std::to_string(rng() % 7)};
    std::string probe = memory.cases()[rng() % 60]->question;
    double last = -1;
    for (size_t k : {0, 1, 2, 5, 10, 20, 60}) {
      double recall = RelationRecall(gold, Retrieve(enc, memory, probe, {}, k));
      EXPECT_GE(recall, last);
      last = recall;
    }
  }
}

}  // namespace
}  // namespace casebase
