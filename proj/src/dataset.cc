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

// Question/LF dataset generation and split construction.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <unordered_set>

#include "casebase/error.h"
#include "casebase/json_io.h"
#include "casebase/text.h"
#include "casebase/worldgen.h"

namespace casebase {
namespace {

using nlohmann::json;

struct Slot {
  std::string surface;
  std::string entity;
};

// Substitutes {E}, {E1}, {E2} and records the mention spans.
std::pair<std::string, std::vector<Mention>> Render(const std::string &tmpl,
                                                    const std::map<std::string, Slot> &slots) {
  std::string out;
  std::vector<Mention> mentions;
  size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      size_t close = tmpl.find('}', i);
      std::string key = tmpl.substr(i + 1, close - i - 1);
      const Slot &slot = slots.at(key);
      mentions.push_back({out.size(), out.size() + slot.surface.size(), slot.surface,
                          slot.entity, MentionSource::kGold});
      out += slot.surface;
      i = close + 1;
    } else {
      out += tmpl[i++];
    }
  }
  return {out, mentions};
}

std::string Replace(std::string s, const std::string &key, const std::string &value) {
  size_t at = s.find(key);
  if (at != std::string::npos) s.replace(at, key.size(), value);
  return s;
}

bool IsEntityRange(const RelationSchema &r) { return r.range != "date" && r.range != "plain"; }

class QuestionMaker {
 public:
  QuestionMaker(const World &world, uint64_t seed)
      : world_(world), kb_(world.full), rng_(seed) {
    for (const auto &t : world.config.types) nouns_[t.name] = t.noun;
    for (const auto &schema : world.config.relations) {
      auto rid = kb_.FindRelation(schema.name);
      if (!rid) continue;
      schemas_.push_back(&schema);
      rel_[schema.name] = *rid;
      std::vector<TermId> subjects, objects;
      for (const Triple &t : kb_.WithRelation(*rid)) {
        if (subjects.empty() || subjects.back() != t.subject) subjects.push_back(t.subject);
        if (kb_.IsEntity(t.object)) objects.push_back(t.object);
      }
      std::sort(objects.begin(), objects.end());
      objects.erase(std::unique(objects.begin(), objects.end()), objects.end());
      subjects_[schema.name] = subjects;
      objects_[schema.name] = objects;
    }
  }

  std::optional<DatasetExample> Make(QuestionForm form) {
    switch (form) {
      case QuestionForm::kOneHop: {
        std::vector<const RelationSchema *> options;
        for (const auto *s : schemas_) {
          if (!s->questions.empty()) options.push_back(s);
        }
        if (options.empty()) return std::nullopt;
        return OneHop(*options[rng_() % options.size()], nullptr, -1);
      }
      case QuestionForm::kInverse: return Inverse();
      case QuestionForm::kChain: return Chain();
      case QuestionForm::kConjunction: return Conjunction();
      case QuestionForm::kSuperlative: return Superlative();
    }
    return std::nullopt;
  }

  std::optional<DatasetExample> InverseCase(const RelationSchema &schema,
                                            const std::set<std::string> *avoid_heads) {
    return InverseFor(schema, avoid_heads);
  }

  std::optional<DatasetExample> OneHop(const RelationSchema &schema,
                                       const std::set<std::string> *avoid_heads,
                                       int template_index) {
    const auto &subjects = subjects_[schema.name];
    if (subjects.empty()) return std::nullopt;
    for (int attempt = 0; attempt < 50; ++attempt) {
      TermId head = SampleWeighted(subjects);
      const std::string &id = kb_.TermName(head);
      if (avoid_heads != nullptr && avoid_heads->count(id)) continue;
      int n = std::min<int>(world_.config.n_question_templates,
                            static_cast<int>(schema.questions.size()));
      int index = template_index >= 0 ? template_index % static_cast<int>(schema.questions.size())
                                      : static_cast<int>(rng_() % n);
      LogicalForm lf{"?x", {{LfTerm::Entity(id), schema.name, LfTerm::Variable("?x")}}, {}};
      return Finish(schema.questions[index], {{"E", SlotFor(id)}}, std::move(lf),
                    QuestionForm::kOneHop);
    }
    return std::nullopt;
  }

 private:
  TermId SampleWeighted(const std::vector<TermId> &terms) {
    std::vector<double> weights;
    weights.reserve(terms.size());
    for (TermId t : terms) weights.push_back(static_cast<double>(kb_.Out(t).size() + kb_.In(t).size()));
    std::discrete_distribution<size_t> dist(weights.begin(), weights.end());
    return terms[dist(rng_)];
  }

  Slot SlotFor(const std::string &id) {
    const EntityInfo &info = world_.entities.at(id);
    bool short_form = !info.short_alias.empty() && rng_() % 2 == 0;
    return {short_form ? info.short_alias : info.name, id};
  }

  std::optional<DatasetExample> Finish(const std::string &tmpl,
                                       const std::map<std::string, Slot> &slots, LogicalForm lf,
                                       QuestionForm form) {
    AnswerSet answers = Execute(lf, kb_);
    if (answers.empty()) return std::nullopt;
    auto [question, mentions] = Render(tmpl, slots);
    DatasetExample ex;
    ex.question = std::move(question);
    ex.mentions = std::move(mentions);
    ex.lf = std::move(lf);
    ex.answers = std::move(answers);
    ex.form = form;
    return ex;
  }

  std::optional<DatasetExample> Inverse() {
    std::vector<const RelationSchema *> options;
    for (const auto *s : schemas_) {
      if (!s->subject_clause.empty() && IsEntityRange(*s) && !objects_[s->name].empty()) {
        options.push_back(s);
      }
    }
    if (options.empty()) return std::nullopt;
    return InverseFor(*options[rng_() % options.size()], nullptr);
  }

  std::optional<DatasetExample> InverseFor(const RelationSchema &schema,
                                           const std::set<std::string> *avoid_heads) {
    const auto &objects = objects_[schema.name];
    if (schema.subject_clause.empty() || objects.empty()) return std::nullopt;
    for (int attempt = 0; attempt < 50; ++attempt) {
      const std::string &id = kb_.TermName(SampleWeighted(objects));
      if (avoid_heads != nullptr && avoid_heads->count(id)) continue;
      LogicalForm lf{"?x", {{LfTerm::Variable("?x"), schema.name, LfTerm::Entity(id)}}, {}};
      std::string tmpl = "which " + nouns_[schema.domain] + " " + schema.subject_clause + "?";
      return Finish(tmpl, {{"E", SlotFor(id)}}, std::move(lf), QuestionForm::kInverse);
    }
    return std::nullopt;
  }

  std::optional<DatasetExample> Chain() {
    std::vector<std::pair<const RelationSchema *, const RelationSchema *>> pairs;
    for (const auto *a : schemas_) {
      if (a->phrase.empty() || !IsEntityRange(*a)) continue;
      for (const auto *b : schemas_) {
        if (b != a && !b->phrase.empty() && b->domain == a->range) pairs.push_back({a, b});
      }
    }
    if (pairs.empty()) return std::nullopt;
    auto [first, second] = pairs[rng_() % pairs.size()];
    const auto &subjects = subjects_[first->name];
    if (subjects.empty()) return std::nullopt;
    for (int attempt = 0; attempt < 20; ++attempt) {
      const std::string &id = kb_.TermName(SampleWeighted(subjects));
      LogicalForm lf{"?x",
                     {{LfTerm::Entity(id), first->name, LfTerm::Variable("?y")},
                      {LfTerm::Variable("?y"), second->name, LfTerm::Variable("?x")}},
                     {}};
      std::string phrase = Replace(second->phrase, "{X}", Replace(first->phrase, "{X}", "{E}"));
      const std::string tmpl = world_.config.n_question_templates > 1 && rng_() % 2
                                   ? "name " + phrase + "."
                                   : "what is " + phrase + "?";
      auto ex = Finish(tmpl, {{"E", SlotFor(id)}}, std::move(lf), QuestionForm::kChain);
      if (ex) return ex;
    }
    return std::nullopt;
  }

  struct Option {
    const RelationSchema *schema;
    bool object_side;  // pattern {E r ?x}; otherwise {?x r E}
  };

  std::optional<DatasetExample> Conjunction() {
    std::map<std::string, std::vector<Option>> by_type;
    for (const auto *s : schemas_) {
      if (!s->object_clause.empty() && IsEntityRange(*s)) by_type[s->range].push_back({s, true});
      if (!s->subject_clause.empty() && IsEntityRange(*s)) by_type[s->domain].push_back({s, false});
    }
    std::vector<std::string> types;
    for (const auto &[type, options] : by_type) {
      if (options.size() >= 2) types.push_back(type);
    }
    if (types.empty()) return std::nullopt;
    const std::string &type = types[rng_() % types.size()];
    const auto &options = by_type[type];
    size_t a = rng_() % options.size();
    size_t b = rng_() % options.size();
    if (options[a].schema == options[b].schema) return std::nullopt;
    const Option &oa = options[a], &ob = options[b];
    const auto &pool = oa.object_side ? objects_[oa.schema->name] : subjects_[oa.schema->name];
    if (pool.empty()) return std::nullopt;
    for (int attempt = 0; attempt < 30; ++attempt) {
      TermId x = SampleWeighted(pool);
      auto na = Neighbors(x, oa), nb = Neighbors(x, ob);
      if (na.empty() || nb.empty()) continue;
      TermId e1 = na[rng_() % na.size()], e2 = nb[rng_() % nb.size()];
      if (e1 == e2) continue;
      const std::string &id1 = kb_.TermName(e1);
      const std::string &id2 = kb_.TermName(e2);
      LogicalForm lf{"?x", {Pattern(oa, id1), Pattern(ob, id2)}, {}};
      std::string c1 = Replace(Clause(oa), "{E}", "{E1}");
      std::string c2 = Replace(Clause(ob), "{E}", "{E2}");
      Slot s1 = SlotFor(id1), s2 = SlotFor(id2);
      if (ToLower(s1.surface) == ToLower(s2.surface)) continue;
      return Finish("which " + nouns_[type] + " " + c1 + " and " + c2 + "?",
                    {{"E1", s1}, {"E2", s2}}, std::move(lf), QuestionForm::kConjunction);
    }
    return std::nullopt;
  }

  static const std::string &Clause(const Option &o) {
    return o.object_side ? o.schema->object_clause : o.schema->subject_clause;
  }

  static TriplePattern Pattern(const Option &o, const std::string &entity) {
    if (o.object_side) return {LfTerm::Entity(entity), o.schema->name, LfTerm::Variable("?x")};
    return {LfTerm::Variable("?x"), o.schema->name, LfTerm::Entity(entity)};
  }

  std::vector<TermId> Neighbors(TermId x, const Option &o) {
    RelationId r = rel_[o.schema->name];
    std::vector<TermId> out;
    auto span = o.object_side ? kb_.Subjects(x, r) : kb_.Objects(x, r);
    for (const Adjacent &a : span) {
      if (kb_.IsEntity(a.neighbor)) out.push_back(a.neighbor);
    }
    return out;
  }

  std::optional<DatasetExample> Superlative() {
    std::vector<std::pair<const RelationSchema *, const RelationSchema *>> pairs;
    for (const auto *date : schemas_) {
      if (date->date_noun.empty() || date->range != "date") continue;
      for (const auto *r : schemas_) {
        if (r->range == date->domain && !r->object_clause.empty()) pairs.push_back({r, date});
      }
    }
    if (pairs.empty()) return std::nullopt;
    auto [first, date] = pairs[rng_() % pairs.size()];
    const auto &subjects = subjects_[first->name];
    if (subjects.empty()) return std::nullopt;
    RelationId r1 = rel_[first->name], rd = rel_[date->name];
    for (int attempt = 0; attempt < 30; ++attempt) {
      TermId head = SampleWeighted(subjects);
      int dated = 0;
      for (const Adjacent &a : kb_.Objects(head, r1)) {
        if (!kb_.Objects(a.neighbor, rd).empty()) ++dated;
      }
      if (dated < 2) continue;
      bool latest = rng_() % 2;
      const std::string &id = kb_.TermName(head);
      LogicalForm lf{"?x",
                     {{LfTerm::Entity(id), first->name, LfTerm::Variable("?x")},
                      {LfTerm::Variable("?x"), date->name, LfTerm::Variable("?y")}},
                     OrderLimit{"?y", latest, true, 1}};
      std::string tmpl = "which " + nouns_[date->domain] + " that " + first->object_clause +
                         " has the " + (latest ? "latest " : "earliest ") + date->date_noun + "?";
      return Finish(tmpl, {{"E", SlotFor(id)}}, std::move(lf), QuestionForm::kSuperlative);
    }
    return std::nullopt;
  }

  const World &world_;
  const KnowledgeBase &kb_;
  std::mt19937_64 rng_;
  std::map<std::string, std::string> nouns_;
  std::vector<const RelationSchema *> schemas_;
  std::map<std::string, RelationId> rel_;
  std::map<std::string, std::vector<TermId>> subjects_;
  std::map<std::string, std::vector<TermId>> objects_;
};

std::vector<DatasetExample> MakePool(const World &world, const SplitSpec &split, size_t target,
                                     std::mt19937_64 &rng) {
  QuestionMaker maker(world, rng());
  std::discrete_distribution<int> form_dist(split.form_weights.begin(), split.form_weights.end());
  std::vector<DatasetExample> pool;
  std::unordered_set<std::string> seen;
  for (size_t attempt = 0; pool.size() < target && attempt < 40 * target; ++attempt) {
    auto ex = maker.Make(static_cast<QuestionForm>(form_dist(rng)));
    if (!ex || !seen.insert(ex->question).second) continue;
    pool.push_back(std::move(*ex));
  }
  if (pool.size() < target) {
    throw Error(ErrorCode::kFailedPrecondition,
                "could only generate " + std::to_string(pool.size()) + " of " +
                    std::to_string(target) + " distinct questions");
  }
  return pool;
}

void AssignIds(std::vector<DatasetExample> &examples, const std::string &prefix) {
  for (size_t i = 0; i < examples.size(); ++i) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%05zu", i);
    examples[i].id = prefix + "-" + buf;
  }
}

std::vector<DatasetExample> Take(std::vector<DatasetExample> &from, size_t n) {
  n = std::min(n, from.size());
  std::vector<DatasetExample> out(std::make_move_iterator(from.begin()),
                                  std::make_move_iterator(from.begin() + n));
  from.erase(from.begin(), from.begin() + n);
  return out;
}

void Require(bool ok, const std::string &message) {
  if (!ok) throw Error(ErrorCode::kFailedPrecondition, "split constraint unsatisfiable: " + message);
}

std::string PairKey(const std::set<std::string> &relations) {
  std::string key;
  for (const auto &r : relations) key += (key.empty() ? "" : " + ") + r;
  return key;
}

std::vector<std::string> Compounds(const DatasetExample &ex) {
  std::vector<std::string> out;
  const auto &p = ex.lf.patterns;
  for (size_t i = 0; i + 1 < p.size(); ++i) {
    out.push_back(std::string(QuestionFormName(ex.form)) + ":" + p[i].relation + "|" +
                  p[i + 1].relation);
  }
  return out;
}

// 1 - sum_k p_k^alpha q_k^(1 - alpha) over normalized counts.
double ChernoffDivergence(const std::map<std::string, double> &p,
                          const std::map<std::string, double> &q, double alpha) {
  double sp = 0, sq = 0;
  for (const auto &[_, v] : p) sp += v;
  for (const auto &[_, v] : q) sq += v;
  if (sp == 0 || sq == 0) return 0.0;
  double c = 0;
  for (const auto &[k, v] : p) {
    auto it = q.find(k);
    if (it == q.end() || v <= 0 || it->second <= 0) continue;
    c += std::pow(v / sp, alpha) * std::pow(it->second / sq, 1 - alpha);
  }
  return 1 - c;
}

struct Distributions {
  std::map<std::string, double> atoms, compounds;

  void Add(const DatasetExample &ex, double sign) {
    for (const auto &r : RelationsOf(ex.lf)) atoms[r] += sign;
    for (const auto &c : Compounds(ex)) compounds[c] += sign;
  }
};

}  // namespace

std::string_view QuestionFormName(QuestionForm form) {
  switch (form) {
    case QuestionForm::kOneHop: return "one_hop";
    case QuestionForm::kInverse: return "inverse";
    case QuestionForm::kChain: return "chain";
    case QuestionForm::kConjunction: return "conjunction";
    case QuestionForm::kSuperlative: return "superlative";
  }
  return "one_hop";
}

QuestionForm ParseQuestionForm(std::string_view name) {
  for (auto f : {QuestionForm::kOneHop, QuestionForm::kInverse, QuestionForm::kChain,
                 QuestionForm::kConjunction, QuestionForm::kSuperlative}) {
    if (QuestionFormName(f) == name) return f;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown question form " + std::string(name));
}

std::string_view SplitKindName(SplitSpec::Kind kind) {
  switch (kind) {
    case SplitSpec::Kind::kStandard: return "standard";
    case SplitSpec::Kind::kHeldoutRelation: return "heldout_relation";
    case SplitSpec::Kind::kNovelCombination: return "novel_combination";
    case SplitSpec::Kind::kMcdLike: return "mcd_like";
  }
  return "standard";
}

SplitSpec::Kind ParseSplitKind(std::string_view name) {
  for (auto k : {SplitSpec::Kind::kStandard, SplitSpec::Kind::kHeldoutRelation,
                 SplitSpec::Kind::kNovelCombination, SplitSpec::Kind::kMcdLike}) {
    if (SplitKindName(k) == name) return k;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown split kind " + std::string(name));
}

Dataset GenerateDataset(const World &world, const SplitSpec &split, uint64_t seed) {
  if (split.n_train <= 0 || split.n_valid < 0 || split.n_test <= 0 ||
      split.form_weights.size() != 5) {
    throw Error(ErrorCode::kInvalidArgument, "bad split sizes or form weights");
  }
  std::mt19937_64 rng(seed);
  const size_t total = static_cast<size_t>(split.n_train + split.n_valid + split.n_test);
  Dataset ds;
  ds.split = split;
  ds.info = json::object();
  switch (split.kind) {
    case SplitSpec::Kind::kStandard: {
      auto pool = MakePool(world, split, total, rng);
      ds.train = Take(pool, split.n_train);
      ds.valid = Take(pool, split.n_valid);
      ds.test = Take(pool, split.n_test);
      break;
    }
    case SplitSpec::Kind::kHeldoutRelation: {
      Require(!split.heldout_relations.empty(), "no held-out relation given");
      for (const auto &r : split.heldout_relations) {
        Require(world.Schema(r) != nullptr, "unknown held-out relation " + r);
      }
      auto pool = MakePool(world, split, total + total / 5, rng);
      std::vector<DatasetExample> held, rest;
      for (auto &ex : pool) {
        bool uses = false;
        for (const auto &r : RelationsOf(ex.lf)) uses |= split.heldout_relations.count(r) > 0;
        (uses ? held : rest).push_back(std::move(ex));
      }
      for (const auto &r : split.heldout_relations) {
        bool found = std::any_of(held.begin(), held.end(), [&](const DatasetExample &ex) {
          return RelationsOf(ex.lf).count(r) > 0;
        });
        Require(found, "no generated question uses held-out relation " + r);
      }
      auto held_test = Take(held, static_cast<size_t>(split.n_test / 3));
      Require(rest.size() >= total - held_test.size(),
              "too few questions without the held-out relations");
      ds.test = Take(rest, split.n_test - held_test.size());
      json held_ids = json::array();
      for (auto &ex : held_test) ds.test.push_back(std::move(ex));
      ds.valid = Take(rest, split.n_valid);
      ds.train = Take(rest, split.n_train);
      ds.info["heldout_relations"] = split.heldout_relations;
      break;
    }
    case SplitSpec::Kind::kNovelCombination: {
      auto pool = MakePool(world, split, total + total * 2 / 5, rng);
      std::map<std::string, int> relation_count;
      std::map<std::string, std::vector<size_t>> by_pair;
      for (size_t i = 0; i < pool.size(); ++i) {
        auto rels = RelationsOf(pool[i].lf);
        for (const auto &r : rels) ++relation_count[r];
        if (rels.size() == 2) by_pair[PairKey(rels)].push_back(i);
      }
      std::vector<std::string> keys;
      for (const auto &[k, _] : by_pair) keys.push_back(k);
      std::shuffle(keys.begin(), keys.end(), rng);
      std::set<std::string> held_pairs;
      size_t held_count = 0;
      for (const auto &key : keys) {
        if (held_count >= static_cast<size_t>(split.n_test)) break;
        const auto &members = by_pair[key];
        auto rels = RelationsOf(pool[members[0]].lf);
        // Keep every relation well represented outside the held pairs.
        bool keeps = std::all_of(rels.begin(), rels.end(), [&](const std::string &r) {
          return relation_count[r] - static_cast<int>(members.size()) >= 10;
        });
        if (!keeps) continue;
        for (const auto &r : rels) relation_count[r] -= static_cast<int>(members.size());
        held_pairs.insert(key);
        held_count += members.size();
      }
      Require(!held_pairs.empty(), "no relation combination can be held out");
      std::vector<DatasetExample> held, rest;
      for (auto &ex : pool) {
        auto rels = RelationsOf(ex.lf);
        (rels.size() == 2 && held_pairs.count(PairKey(rels)) ? held : rest)
            .push_back(std::move(ex));
      }
      std::shuffle(held.begin(), held.end(), rng);
      ds.test = Take(held, split.n_test);
      ds.valid = Take(rest, split.n_valid);
      ds.train = Take(rest, split.n_train);
      std::set<std::string> train_relations;
      for (const auto &ex : ds.train) {
        for (const auto &r : RelationsOf(ex.lf)) train_relations.insert(r);
      }
      for (const auto &ex : ds.test) {
        for (const auto &r : RelationsOf(ex.lf)) {
          Require(train_relations.count(r) > 0,
                  "relation " + r + " of combination " + PairKey(RelationsOf(ex.lf)) +
                      " never appears in train");
        }
      }
      ds.info["heldout_combinations"] = held_pairs;
      break;
    }
    case SplitSpec::Kind::kMcdLike: {
      auto pool = MakePool(world, split, total, rng);
      std::shuffle(pool.begin(), pool.end(), rng);
      Distributions train_dist, test_dist;
      for (const auto &ex : pool) train_dist.Add(ex, 1);
      std::vector<bool> in_test(pool.size(), false);
      auto score = [&](const Distributions &tr, const Distributions &te) {
        return ChernoffDivergence(te.compounds, tr.compounds, 0.1) -
               ChernoffDivergence(te.atoms, tr.atoms, 0.5);
      };
      // Greedy: move the sampled candidate that most increases compound
      // divergence net of atom divergence.
      for (int step = 0; step < split.n_test; ++step) {
        double best = -1e9;
        size_t best_index = pool.size();
        for (int c = 0; c < 64; ++c) {
          size_t i = rng() % pool.size();
          if (in_test[i]) continue;
          Distributions tr = train_dist, te = test_dist;
          tr.Add(pool[i], -1);
          te.Add(pool[i], 1);
          double s = score(tr, te);
          if (s > best) {
            best = s;
            best_index = i;
          }
        }
        if (best_index == pool.size()) continue;
        in_test[best_index] = true;
        train_dist.Add(pool[best_index], -1);
        test_dist.Add(pool[best_index], 1);
      }
      std::vector<DatasetExample> rest;
      for (size_t i = 0; i < pool.size(); ++i) {
        (in_test[i] ? ds.test : rest).push_back(std::move(pool[i]));
      }
      ds.valid = Take(rest, split.n_valid);
      ds.train = Take(rest, split.n_train);
      Distributions tr, te;
      for (const auto &ex : ds.train) tr.Add(ex, 1);
      for (const auto &ex : ds.test) te.Add(ex, 1);
      ds.info["compound_divergence"] = ChernoffDivergence(te.compounds, tr.compounds, 0.1);
      ds.info["atom_divergence"] = ChernoffDivergence(te.atoms, tr.atoms, 0.5);
      break;
    }
  }
  AssignIds(ds.train, "train");
  AssignIds(ds.valid, "valid");
  AssignIds(ds.test, "test");
  return ds;
}

std::vector<DatasetExample> GenerateSimpleCases(const World &world, const std::string &relation,
                                                int n, uint64_t seed,
                                                const std::vector<DatasetExample> &avoid) {
  const RelationSchema *schema = world.Schema(relation);
  if (schema == nullptr || schema->questions.empty()) {
    throw Error(ErrorCode::kNotFound, "no question templates for relation " + relation);
  }
  std::set<std::string> avoid_heads;
  std::set<std::string> seen;
  for (const auto &ex : avoid) {
    for (const auto &a : AnchorsOf(ex.lf)) avoid_heads.insert(a);
    seen.insert(ex.question);
  }
  QuestionMaker maker(world, seed);
  std::vector<DatasetExample> out;
  for (int attempt = 0; static_cast<int>(out.size()) < n && attempt < 50 * n; ++attempt) {
    // Odd slots ask for subjects when the relation has a clause for it.
    int index = static_cast<int>(out.size());
    auto ex = index % 2 == 1 && !schema->subject_clause.empty()
                  ? maker.InverseCase(*schema, &avoid_heads)
                  : maker.OneHop(*schema, &avoid_heads, index / 2 + index % 2);
    if (!ex || !seen.insert(ex->question).second) continue;
    for (const auto &a : AnchorsOf(ex->lf)) avoid_heads.insert(a);
    ex->id = "simple-" + std::to_string(out.size());
    out.push_back(std::move(*ex));
  }
  return out;
}

json ExampleToJson(const DatasetExample &ex) {
  return {{"id", ex.id},
          {"question", ex.question},
          {"mentions", ex.mentions},
          {"sparql", PrintLogicalForm(ex.lf)},
          {"answers", AnswersToJson(ex.answers)},
          {"form", std::string(QuestionFormName(ex.form))}};
}

DatasetExample ExampleFromJson(const json &j) {
  DatasetExample ex;
  ex.id = j.at("id").get<std::string>();
  ex.question = j.at("question").get<std::string>();
  ex.mentions = j.at("mentions").get<std::vector<Mention>>();
  CheckMentions(ex.question, ex.mentions);
  ex.lf = ParseLogicalForm(j.at("sparql").get<std::string>());
  ex.answers = AnswersFromJson(j.at("answers"));
  ex.form = ParseQuestionForm(j.value("form", std::string("one_hop")));
  return ex;
}

void WriteExamples(const std::vector<DatasetExample> &examples,
                   const std::filesystem::path &path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kUnavailable, "cannot write " + path.string());
  for (const auto &ex : examples) out << ExampleToJson(ex).dump() << '\n';
}

std::vector<DatasetExample> ReadExamples(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open " + path.string());
  std::vector<DatasetExample> out;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    try {
      out.push_back(ExampleFromJson(json::parse(line)));
    } catch (const std::exception &e) {
      throw Error(ErrorCode::kParse, path.string() + ":" + std::to_string(line_number) + ": " +
                                         e.what());
    }
  }
  return out;
}

void SaveDataset(const Dataset &dataset, const std::filesystem::path &dir) {
  std::filesystem::create_directories(dir);
  WriteExamples(dataset.train, dir / "train.jsonl");
  WriteExamples(dataset.valid, dir / "valid.jsonl");
  WriteExamples(dataset.test, dir / "test.jsonl");
  json split = {{"kind", std::string(SplitKindName(dataset.split.kind))},
                {"heldout_relations", dataset.split.heldout_relations},
                {"n_train", dataset.split.n_train},
                {"n_valid", dataset.split.n_valid},
                {"n_test", dataset.split.n_test},
                {"form_weights", dataset.split.form_weights},
                {"info", dataset.info}};
  std::ofstream out(dir / "split.json");
  out << split.dump(2) << '\n';
}

Dataset LoadDataset(const std::filesystem::path &dir) {
  Dataset ds;
  std::ifstream in(dir / "split.json");
  if (!in) throw Error(ErrorCode::kNotFound, "no split.json in " + dir.string());
  json split = json::parse(in);
  ds.split.kind = ParseSplitKind(split.at("kind").get<std::string>());
  ds.split.heldout_relations = split.at("heldout_relations").get<std::set<std::string>>();
  ds.split.n_train = split.at("n_train");
  ds.split.n_valid = split.at("n_valid");
  ds.split.n_test = split.at("n_test");
  ds.split.form_weights = split.at("form_weights").get<std::vector<double>>();
  ds.info = split.value("info", json::object());
  ds.train = ReadExamples(dir / "train.jsonl");
  ds.valid = ReadExamples(dir / "valid.jsonl");
  ds.test = ReadExamples(dir / "test.jsonl");
  return ds;
}

}  // namespace casebase
