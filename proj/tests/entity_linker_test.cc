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

#include "casebase/entity_linker.h"

#include <random>
#include <sstream>

#include "casebase/text.h"
#include "gtest/gtest.h"

namespace casebase {
namespace {

AliasTable Table(const std::string &tsv) {
  std::istringstream in(tsv);
  return AliasTable::Parse(in);
}

TEST(LinkTest, JamaicanPeople) {
  auto mentions = Link("what do jamaican people speak", Table("m.03_r3\tjamaican\n"));
  ASSERT_EQ(mentions.size(), 1);
  EXPECT_EQ(mentions[0].begin, 8);
  EXPECT_EQ(mentions[0].end, 16);
  EXPECT_EQ(mentions[0].entity, "m.03_r3");
  EXPECT_EQ(mentions[0].source, MentionSource::kLinked);
}

TEST(LinkTest, CaseInsensitiveKeepsSurface) {
  auto mentions = Link("What do Jamaican people speak?", Table("m.03_r3\tjamaican\n"));
  ASSERT_EQ(mentions.size(), 1);
  EXPECT_EQ(mentions[0].surface, "Jamaican");
}

TEST(LinkTest, NoMatch) {
  EXPECT_TRUE(Link("who is the sibling of nobody", Table("e1\tsomebody\n")).empty());
}

TEST(LinkTest, LongestMatchWins) {
  auto mentions = Link("how big is new york city today",
                       Table("e1\tnew york\ne2\tnew york city\n"));
  ASSERT_EQ(mentions.size(), 1);
  EXPECT_EQ(mentions[0].entity, "e2");
}

TEST(LinkTest, WordBoundariesOnly) {
  EXPECT_TRUE(Link("who came to the party", Table("e1\tart\n")).empty());
  EXPECT_EQ(Link("who is rihanna's brother", Table("e1\trihanna\n")).size(), 1);
}

TEST(LinkTest, AmbiguousAliasPicksSmallestId) {
  auto mentions = Link("who is smith", Table("e9\tsmith\ne3\tsmith\n"));
  ASSERT_EQ(mentions.size(), 1);
  EXPECT_EQ(mentions[0].entity, "e3");
}

TEST(LinkTest, EarlierStartWinsAmongEqualLengths) {
  // "a b" and "b c" overlap on "b" and have equal length.
  auto mentions = Link("a b c", Table("e1\ta b\ne2\tb c\n"));
  ASSERT_EQ(mentions.size(), 1);
  EXPECT_EQ(mentions[0].entity, "e1");
}

TEST(AliasTableTest, RoundTrip) {
  AliasTable t = Table("e2\tBeta\ne1\talpha\ne1\tAl\n");
  std::ostringstream out;
  t.Save(out);
  EXPECT_EQ(out.str(), "e1\talpha\ne1\tAl\ne2\tBeta\n");
  EXPECT_EQ(t.size(), 3);
  EXPECT_EQ(t.AliasesOf("e1"), (std::vector<std::string>{"alpha", "Al"}));
}

TEST(AliasTableTest, MalformedLine) {
  EXPECT_ANY_THROW(Table("no tab here\n"));
}

TEST(ScoreLinksTest, Formulas) {
  Mention a{0, 1, "a", "e1", MentionSource::kGold};
  Mention b{2, 3, "b", "e2", MentionSource::kGold};
  Mention wrong{2, 3, "b", "e3", MentionSource::kLinked};
  LinkScore s = ScoreLinks({{a, b}}, {{a, wrong}});
  EXPECT_DOUBLE_EQ(s.precision, 0.5);
  EXPECT_DOUBLE_EQ(s.recall, 0.5);
  EXPECT_DOUBLE_EQ(s.f1, 0.5);
}

// Output never overlaps, is sorted, and every returned span spells an alias
// of its entity.
TEST(LinkTest, RandomInvariants) {
  std::mt19937_64 rng(11);
  const std::vector<std::string> words = {"ab", "cd", "ef", "gh", "ij", "kl"};
  for (int iter = 0; iter < 300; ++iter) {
    AliasTable table;
    for (int a = 0; a < 6; ++a) {
      std::string alias = words[rng() % words.size()];
      for (int w = 1 + rng() % 3; w > 1; --w) alias += " " + words[rng() % words.size()];
      table.Add("e" + std::to_string(rng() % 8), alias);
    }
    std::string question;
    for (int w = 0; w < 10; ++w) {
      question += words[rng() % words.size()] + (rng() % 3 == 0 ? ", " : " ");
    }
    auto mentions = Link(question, table);
    EXPECT_EQ(mentions, Link(question, table));
    for (size_t i = 0; i < mentions.size(); ++i) {
      const Mention &m = mentions[i];
      ASSERT_LE(m.end, question.size());
      EXPECT_EQ(m.surface, question.substr(m.begin, m.end - m.begin));
      const auto *entities = table.Find(ToLower(m.surface));
      ASSERT_NE(entities, nullptr);
      EXPECT_EQ(entities->front(), m.entity);
      if (i > 0) EXPECT_LE(mentions[i - 1].end, m.begin);
    }
  }
}

}  // namespace
}  // namespace casebase
