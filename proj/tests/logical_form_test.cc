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

#include "casebase/logical_form.h"

#include <random>
#include <sstream>

#include "casebase/error.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace casebase {
namespace {

constexpr char kJamaica[] =
    "SELECT DISTINCT ?x WHERE { ns:m.03_r3 ns:location.country.languages_spoken ?x . }";

KnowledgeBase FromText(const std::string &text) {
  std::istringstream in(text);
  return KnowledgeBase::Parse(in);
}

TEST(ParseTest, SimpleQuery) {
  LogicalForm lf = ParseLogicalForm(kJamaica);
  EXPECT_EQ(lf.select_var, "?x");
  ASSERT_EQ(lf.patterns.size(), 1);
  EXPECT_EQ(lf.patterns[0].subject, LfTerm::Entity("m.03_r3"));
  EXPECT_EQ(lf.patterns[0].relation, "location.country.languages_spoken");
  EXPECT_EQ(lf.patterns[0].object, LfTerm::Variable("?x"));
  EXPECT_FALSE(lf.order_limit.has_value());
}

TEST(ParseTest, OrderByDatetimeLimit) {
  LogicalForm lf = ParseLogicalForm(
      "SELECT DISTINCT ?x WHERE { ns:m.0d3k14 ns:film.director.film ?x . "
      "?x ns:film.film.release_date ?sk0 . } ORDER BY xsd:datetime(?sk0) LIMIT 1");
  ASSERT_TRUE(lf.order_limit.has_value());
  EXPECT_EQ(lf.order_limit->variable, "?sk0");
  EXPECT_FALSE(lf.order_limit->descending);
  EXPECT_TRUE(lf.order_limit->datetime_cast);
  EXPECT_EQ(lf.order_limit->limit, 1);
}

TEST(ParseTest, DescendingOrder) {
  LogicalForm lf = ParseLogicalForm(
      "SELECT DISTINCT ?x WHERE { ?x ns:a.b ?v . } ORDER BY DESC(?v) LIMIT 3");
  EXPECT_TRUE(lf.order_limit->descending);
  EXPECT_EQ(lf.order_limit->limit, 3);
}

TEST(ParseTest, EmptyBodyIsAnError) {
  EXPECT_THROW(ParseLogicalForm("SELECT DISTINCT ?x WHERE { }"), ParseError);
}

TEST(ParseTest, RelationVariableIsUnsupported) {
  try {
    ParseLogicalForm("SELECT DISTINCT ?x WHERE { ns:m.1 ?r ?x . }");
    FAIL();
  } catch (const ParseError &e) {
    EXPECT_NE(std::string(e.what()).find("unsupported"), std::string::npos);
    EXPECT_EQ(e.position(), 34);
  }
}

TEST(ParseTest, ErrorsCarryPositions) {
  try {
    ParseLogicalForm("SELECT DISTINCT ?x WHERE { ns:m.1 ns:a.b ?x ");
    FAIL();
  } catch (const ParseError &e) {
    EXPECT_EQ(e.position(), 44);  // end of input
  }
  EXPECT_THROW(ParseLogicalForm("SELECT ?x WHERE { ns:m.1 ns:a.b ?y . }"), ParseError);
  EXPECT_THROW(ParseLogicalForm("SELECT ?x { ?x ns:a.b ?y . } LIMIT 2"), ParseError);
  EXPECT_THROW(ParseLogicalForm("SELECT ?x { ?x ns:a.b ?y . } ORDER BY ?y LIMIT 0"),
               ParseError);
}

TEST(ParseTest, FiltersAndPaperStyleTextAreAccepted) {
  LogicalForm lf = ParseLogicalForm(
      "PREFIX ns: <http://rdf.freebase.com/ns/>\n"
      "SELECT DISTINCT ?x WHERE {\n"
      "  FILTER (?x != ns:m.02gjv7)\n"
      "  ?c ns:religion.religion.notable_figures ns:m.02gjv7 .\n"
      "  ?c ns:religion.religion.texts ?x .\n"
      "  FILTER (!isLiteral(?x) OR lang(?x) = '' OR langMatches(lang(?x), \"en\"))\n"
      "}");
  ASSERT_EQ(lf.patterns.size(), 2);
  EXPECT_EQ(RelationsOf(lf), (std::set<std::string>{"religion.religion.notable_figures",
                                                    "religion.religion.texts"}));
  // Lowercase keywords, no DISTINCT, bare ids.
  LogicalForm simple = ParseLogicalForm(
      "select ?x where { m.012ts8 finance.currency.currency_code ?x .}");
  EXPECT_EQ(simple.patterns[0].subject, LfTerm::Entity("m.012ts8"));
}

TEST(ParseTest, WhitespaceInsensitive) {
  EXPECT_EQ(ParseLogicalForm(kJamaica),
            ParseLogicalForm("SELECT DISTINCT ?x WHERE{ns:m.03_r3\n"
                             "\tns:location.country.languages_spoken ?x.}"));
}

TEST(PrintTest, CanonicalText) {
  EXPECT_EQ(PrintLogicalForm(ParseLogicalForm(kJamaica)), kJamaica);
  std::string with_order =
      "SELECT DISTINCT ?x WHERE { ns:m.1 ns:a.b ?x . ?x ns:a.date ?sk0 . } "
      "ORDER BY xsd:datetime(?sk0) LIMIT 1";
  EXPECT_EQ(PrintLogicalForm(ParseLogicalForm(with_order)), with_order);
}

TEST(PrintTest, LiteralsRoundTrip) {
  LogicalForm lf;
  lf.select_var = "?x";
  lf.patterns.push_back({LfTerm::Variable("?x"), "a.b",
                         LfTerm::Literal("say \"hi\"", TermKind::kPlain)});
  lf.patterns.push_back({LfTerm::Variable("?x"), "a.c",
                         LfTerm::Literal("2001-01-01", TermKind::kDate)});
  lf.patterns.push_back({LfTerm::Variable("?x"), "a.d",
                         LfTerm::Literal("12.5", TermKind::kNumber)});
  EXPECT_EQ(ParseLogicalForm(PrintLogicalForm(lf)), lf);
}

// parse(print(lf)) == lf and print(parse(text)) is a fixed point, including
// ORDER BY/LIMIT and FILTER clauses that are dropped on the way in.
TEST(PrintTest, RandomRoundTrip) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 300; ++i) {
    LogicalForm lf = testing_util::RandomLogicalForm(rng, 3, 30, 5, 0.4);
    std::string text = PrintLogicalForm(lf);
    ASSERT_EQ(ParseLogicalForm(text), lf) << text;
    std::string with_filter = text;
    with_filter.insert(with_filter.find('{') + 1, " FILTER (?a != ns:e1) ");
    EXPECT_EQ(ParseLogicalForm(with_filter), lf);
    EXPECT_EQ(PrintLogicalForm(ParseLogicalForm(text)), text);
  }
}

TEST(RelationsOfTest, SetSemantics) {
  EXPECT_EQ(RelationsOf(ParseLogicalForm(kJamaica)).size(), 1);
  LogicalForm twice = ParseLogicalForm(
      "SELECT ?x WHERE { ns:m.1 ns:a.b ?y . ?y ns:a.b ?x . }");
  EXPECT_EQ(RelationsOf(twice), (std::set<std::string>{"a.b"}));
}

TEST(SkeletonTest, EntitySubstitution) {
  auto rihanna = ParseLogicalForm(
      "SELECT DISTINCT ?x WHERE { ns:m.06wxw ns:people.person.sibling_s ?x . }");
  auto bieber = ParseLogicalForm(
      "SELECT DISTINCT ?x WHERE { ns:m.06w2sn5 ns:people.person.sibling_s ?x . }");
  EXPECT_EQ(SkeletonOf(rihanna), SkeletonOf(bieber));
}

TEST(SkeletonTest, RelationAndVariableRenaming) {
  auto a = ParseLogicalForm("SELECT ?x WHERE { ns:m.1 ns:a.b ?y . ?y ns:a.c ?x . }");
  auto b = ParseLogicalForm("SELECT ?q WHERE { ns:m.2 ns:d.e ?c . ?c ns:f.g ?q . }");
  EXPECT_EQ(SkeletonOf(a), SkeletonOf(b));
  auto one = ParseLogicalForm("SELECT ?x WHERE { ns:m.1 ns:a.b ?x . }");
  EXPECT_NE(SkeletonOf(a), SkeletonOf(one));
  // Same shape with the select variable moved is a different skeleton.
  auto c = ParseLogicalForm("SELECT ?y WHERE { ns:m.1 ns:a.b ?y . ?y ns:a.c ?x . }");
  EXPECT_NE(SkeletonOf(a), SkeletonOf(c));
}

TEST(SkeletonTest, DepthsAndInstantiation) {
  auto lf = ParseLogicalForm(
      "SELECT ?x WHERE { ns:m.1 ns:a.b ?y . ?y ns:a.c ?x . ?x ns:a.d ?d . } "
      "ORDER BY xsd:datetime(?d) LIMIT 1");
  auto sk = SkeletonOf(lf);
  ASSERT_EQ(sk.num_slots(), 3);
  EXPECT_EQ(sk.patterns[0].depth, 0);
  EXPECT_EQ(sk.patterns[1].depth, 1);
  EXPECT_EQ(sk.patterns[2].depth, 2);
  std::vector<std::string> rels{"a.b", "a.c", "a.d"};
  std::vector<std::string> anchors{"m.1"};
  LogicalForm rebuilt = sk.Instantiate(rels, anchors);
  EXPECT_EQ(SkeletonOf(rebuilt), sk);
  EXPECT_EQ(PrintLogicalForm(rebuilt),
            "SELECT DISTINCT ?x WHERE { ns:m.1 ns:a.b ?y . ?y ns:a.c ?x . "
            "?x ns:a.d ?z . } ORDER BY xsd:datetime(?z) LIMIT 1");
}

// Skeletons are invariant under entity, relation and variable renaming.
TEST(SkeletonTest, RandomRenamingInvariance) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 200; ++i) {
    LogicalForm lf = testing_util::RandomLogicalForm(rng, 3, 10, 4);
    LogicalForm renamed = lf;
    auto rename_var = [](std::string v) { return v == "?a" ? "?p" : "?q"; };
    for (auto &p : renamed.patterns) {
      p.relation = "other." + p.relation;
      for (LfTerm *t : {&p.subject, &p.object}) {
        if (t->is_variable()) t->text = rename_var(t->text);
        if (t->is_entity()) t->text = "z" + t->text;
      }
    }
    renamed.select_var = rename_var(renamed.select_var);
    if (renamed.order_limit) {
      renamed.order_limit->variable = rename_var(renamed.order_limit->variable);
    }
    EXPECT_EQ(SkeletonOf(lf), SkeletonOf(renamed)) << PrintLogicalForm(lf);
  }
}

TEST(ExecuteTest, FigureTwoQuery) {
  KnowledgeBase kb = FromText(
      "m.03_r3\tlocation.country.languages_spoken\tm.01428y\n"
      "m.03_r3\tlocation.country.capital\tm.0fhzy\n"
      "m.0d060g\tlocation.country.languages_spoken\tm.02h40lc\n");
  LogicalForm lf = ParseLogicalForm(kJamaica);
  AnswerSet expected{{TermKind::kEntity, "m.01428y"}};
  EXPECT_EQ(Execute(lf, kb), expected);
  EXPECT_EQ(testing_util::BruteForceExecute(lf, kb), expected);
}

TEST(ExecuteTest, UnknownRelationOrEntityIsEmpty) {
  KnowledgeBase kb = FromText("a\tr.x\tb\n");
  EXPECT_TRUE(Execute(ParseLogicalForm("SELECT ?x WHERE { ns:a ns:r.nope ?x . }"), kb)
                  .empty());
  EXPECT_TRUE(Execute(ParseLogicalForm("SELECT ?x WHERE { ns:zz ns:r.x ?x . }"), kb)
                  .empty());
}

TEST(ExecuteTest, ConjunctionOnRandomKbMatchesOracle) {
  std::mt19937_64 rng(20);
  KnowledgeBase kb =
      KnowledgeBase::FromTriples(testing_util::RandomTriples(rng, 20, 6, 2, 0.0));
  LogicalForm lf = ParseLogicalForm(
      "SELECT ?x WHERE { ?x ns:dom.type.rel_0 ?y . ?y ns:dom.type.rel_1 ?x . }");
  EXPECT_EQ(Execute(lf, kb), testing_util::BruteForceExecute(lf, kb));
  LogicalForm chain = ParseLogicalForm(
      "SELECT ?x WHERE { ?y ns:dom.type.rel_0 ?z . ?z ns:dom.type.rel_1 ?x . }");
  EXPECT_EQ(Execute(chain, kb), testing_util::BruteForceExecute(chain, kb));
}

TEST(ExecuteTest, OrderByUsesTypedComparison) {
  KnowledgeBase kb = FromText(
      "d\tfilm.director.film\tf1\n"
      "d\tfilm.director.film\tf2\n"
      "d\tfilm.director.film\tf3\n"
      "f1\tfilm.film.release_date\t1999-05-01\tdate\n"
      "f2\tfilm.film.release_date\t1987-01-30\tdate\n"
      "f3\tfilm.film.release_date\t2004-11-11\tdate\n"
      "f1\tfilm.film.runtime\t9\tnumber\n"
      "f2\tfilm.film.runtime\t100\tnumber\n"
      "f3\tfilm.film.runtime\t20\tnumber\n");
  auto first = ParseLogicalForm(
      "SELECT ?x WHERE { ns:d ns:film.director.film ?x . ?x ns:film.film.release_date ?t . }"
      " ORDER BY xsd:datetime(?t) LIMIT 1");
  EXPECT_EQ(Execute(first, kb), (AnswerSet{{TermKind::kEntity, "f2"}}));
  auto longest = ParseLogicalForm(
      "SELECT ?x WHERE { ns:d ns:film.director.film ?x . ?x ns:film.film.runtime ?t . }"
      " ORDER BY DESC(?t) LIMIT 2");
  EXPECT_EQ(Execute(longest, kb),
            (AnswerSet{{TermKind::kEntity, "f2"}, {TermKind::kEntity, "f3"}}));
}

TEST(ExecuteTest, MixedSortKindsAreUnorderable) {
  KnowledgeBase kb = FromText("a\tr.x\tb\na\tr.x\t5\tnumber\n");
  auto lf = ParseLogicalForm("SELECT ?v WHERE { ns:a ns:r.x ?v . } ORDER BY ?v LIMIT 1");
  try {
    Execute(lf, kb);
    FAIL();
  } catch (const Error &e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnorderable);
  }
}

// Executor agrees with the exhaustive-assignment oracle on random inputs.
TEST(ExecuteTest, RandomOracleEquivalence) {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 200; ++i) {
    KnowledgeBase kb = KnowledgeBase::FromTriples(
        testing_util::RandomTriples(rng, 1 + rng() % 120, 12, 4));
    LogicalForm lf = testing_util::RandomLogicalForm(rng, 3, 12, 4);
    if (testing_util::HasMixedSortKinds(lf, kb)) {
      EXPECT_THROW(Execute(lf, kb), Error);
      continue;
    }
    EXPECT_EQ(Execute(lf, kb), testing_util::BruteForceExecute(lf, kb))
        << PrintLogicalForm(lf);
  }
}

// Adding triples never removes answers from LFs without ORDER BY.
TEST(ExecuteTest, MonotoneInKb) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100; ++i) {
    auto triples = testing_util::RandomTriples(rng, 60, 10, 3);
    auto more = triples;
    auto extra = testing_util::RandomTriples(rng, 40, 10, 3);
    more.insert(more.end(), extra.begin(), extra.end());
    LogicalForm lf = testing_util::RandomLogicalForm(rng, 3, 10, 3, 0.0);
    AnswerSet small = Execute(lf, KnowledgeBase::FromTriples(triples));
    AnswerSet large = Execute(lf, KnowledgeBase::FromTriples(more));
    EXPECT_TRUE(std::includes(large.begin(), large.end(), small.begin(), small.end()));
  }
}

}  // namespace
}  // namespace casebase
