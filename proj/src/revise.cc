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


#include "casebase/revise.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "casebase/error.h"

namespace casebase {
namespace {

std::vector<std::vector<std::string>> RelationDocuments(const std::vector<std::string> &relations) {
  std::vector<std::vector<std::string>> docs;
  docs.reserve(relations.size());
  for (const auto &r : relations) docs.push_back(RelationTokens(r));
  return docs;
}

std::vector<std::string> KbRelations(const KnowledgeBase &kb) {
  std::vector<std::string> out;
  for (RelationId r = 0; r < kb.num_relations(); ++r) out.push_back(kb.Relation(r).name);
  return out;
}

constexpr TermId kUnbound = std::numeric_limits<TermId>::max();
// A constant the KB does not know; matches nothing.
constexpr TermId kMissing = kUnbound - 1;

using Row = std::vector<TermId>;

struct State {
  std::vector<std::string> relations;
  std::vector<Substitution> substitutions;
  std::vector<Row> rows;
  double score = 0.0;
};

class Aligner {
 public:
  Aligner(const LogicalForm &lf, const KnowledgeBase &kb, const RelationSimilarity &similarity,
          const AlignConfig &config)
      : lf_(lf), kb_(kb), similarity_(similarity), config_(config) {
    std::vector<std::string> vars = VariablesOf(lf);
    for (size_t i = 0; i < vars.size(); ++i) var_index_[vars[i]] = static_cast<int>(i);
    num_vars_ = vars.size();
  }

  AlignmentResult Run() {
    std::vector<int> unreachable;
    std::vector<int> order = GroundedOrder(lf_, &unreachable);
    std::set<int> skip(unreachable.begin(), unreachable.end());

    State start;
    for (const auto &p : lf_.patterns) start.relations.push_back(p.relation);
    start.rows.push_back(Row(num_vars_, kUnbound));
    std::vector<State> beam;
    beam.push_back(std::move(start));

    for (int index : order) {
      if (skip.count(index)) continue;
      std::vector<State> next;
      for (const State &state : beam) Expand(state, index, next);
      std::stable_sort(next.begin(), next.end(), [](const State &a, const State &b) {
        if (a.score != b.score) return a.score > b.score;
        return a.relations < b.relations;
      });
      // Keep the best-scoring copy of each relation assignment.
      std::vector<State> kept;
      std::set<std::vector<std::string>> seen;
      for (auto &s : next) {
        if (static_cast<int>(kept.size()) >= config_.beam) break;
        if (seen.insert(s.relations).second) kept.push_back(std::move(s));
      }
      beam = std::move(kept);
      if (beam.empty()) break;
    }

    AlignmentResult result;
    result.unaligned = unreachable;
    for (const State &state : beam) {
      LogicalForm candidate = lf_;
      for (size_t i = 0; i < candidate.patterns.size(); ++i) {
        candidate.patterns[i].relation = state.relations[i];
      }
      AnswerSet answers;
      try {
        answers = Execute(candidate, kb_);
      } catch (const Error &e) {
        if (e.code() != ErrorCode::kUnorderable) throw;
      }
      if (answers.empty()) continue;
      result.lf = std::move(candidate);
      result.substitutions = state.substitutions;
      result.executed = true;
      result.answers = std::move(answers);
      result.score = state.score;
      return result;
    }
    result.lf = lf_;
    return result;
  }

 private:
  TermId Resolve(const LfTerm &term, const Row &row) const {
    switch (term.kind) {
      case LfTerm::Kind::kVariable: return row[var_index_.at(term.text)];
      case LfTerm::Kind::kEntity: return kb_.FindEntity(term.text).value_or(kMissing);
      case LfTerm::Kind::kLiteral:
        return kb_.FindTerm(term.literal_kind, term.text).value_or(kMissing);
    }
    return kMissing;
  }

  // Rows extended by the pattern under `relation`.
  std::vector<Row> Extend(const std::vector<Row> &rows, const TriplePattern &p,
                          RelationId relation) const {
    std::vector<Row> out;
    for (const Row &row : rows) {
      TermId s = Resolve(p.subject, row), o = Resolve(p.object, row);
      if (s == kMissing || o == kMissing) continue;
      auto bind = [&](TermId subject, TermId object) {
        Row next = row;
        if (p.subject.is_variable()) next[var_index_.at(p.subject.text)] = subject;
        if (p.object.is_variable()) next[var_index_.at(p.object.text)] = object;
        // Same variable on both sides must agree.
        if (p.subject.is_variable() && p.object.is_variable() && p.subject.text == p.object.text &&
            subject != object) {
          return;
        }
        out.push_back(std::move(next));
      };
      if (s != kUnbound && o != kUnbound) {
        if (kb_.HasTriple(s, relation, o)) out.push_back(row);
      } else if (s != kUnbound) {
        for (const Adjacent &a : kb_.Objects(s, relation)) bind(s, a.neighbor);
      } else if (o != kUnbound) {
        for (const Adjacent &a : kb_.Subjects(o, relation)) bind(a.neighbor, o);
      }
      if (out.size() >= config_.max_rows) break;
    }
    return out;
  }

  // Distinct relations on edges that could satisfy the pattern from the
  // bound endpoint(s).
  std::set<RelationId> Candidates(const std::vector<Row> &rows, const TriplePattern &p) const {
    std::set<RelationId> out;
    for (const Row &row : rows) {
      TermId s = Resolve(p.subject, row), o = Resolve(p.object, row);
      if (s == kMissing || o == kMissing) continue;
      if (s != kUnbound && o != kUnbound) {
        for (const Adjacent &a : kb_.Out(s)) {
          if (a.neighbor == o) out.insert(a.relation);
        }
      } else if (s != kUnbound) {
        for (const Adjacent &a : kb_.Out(s)) out.insert(a.relation);
      } else if (o != kUnbound) {
        for (const Adjacent &a : kb_.In(o)) out.insert(a.relation);
      }
    }
    return out;
  }

  void Expand(const State &state, int index, std::vector<State> &next) const {
    const TriplePattern &p = lf_.patterns[index];
    const std::string &predicted = state.relations[index];
    auto add = [&](RelationId relation, std::vector<Row> rows, double sim) {
      State s;
      s.relations = state.relations;
      s.relations[index] = kb_.Relation(relation).name;
      s.substitutions = state.substitutions;
      s.substitutions.push_back({index, predicted, s.relations[index], sim});
      s.rows = std::move(rows);
      s.score = state.score + sim;
      next.push_back(std::move(s));
    };
    if (auto known = kb_.FindRelation(predicted)) {
      std::vector<Row> rows = Extend(state.rows, p, *known);
      if (!rows.empty()) {
        add(*known, std::move(rows), 1.0);
        return;
      }
    }
    for (RelationId candidate : Candidates(state.rows, p)) {
      std::vector<Row> rows = Extend(state.rows, p, candidate);
      if (rows.empty()) continue;
      add(candidate, std::move(rows),
          similarity_.Similarity(predicted, kb_.Relation(candidate).name));
    }
  }

  const LogicalForm &lf_;
  const KnowledgeBase &kb_;
  const RelationSimilarity &similarity_;
  const AlignConfig &config_;
  std::map<std::string, int> var_index_;
  size_t num_vars_ = 0;
};

}  // namespace

SurfaceSimilarity::SurfaceSimilarity(const std::vector<std::string> &relations)
    : tfidf_(RelationDocuments(relations)) {}

SurfaceSimilarity::SurfaceSimilarity(const KnowledgeBase &kb)
    : SurfaceSimilarity(KbRelations(kb)) {}

double SurfaceSimilarity::Similarity(std::string_view a, std::string_view b) const {
  if (a == b) return 1.0;
  std::vector<std::string> ta = RelationTokens(a), tb = RelationTokens(b);
  return tfidf_.Cosine(ta, tb);
}

TransESimilarity::TransESimilarity(std::shared_ptr<const TransE> model,
                                   SurfaceSimilarity fallback, double min_norm_ratio)
    : model_(std::move(model)), fallback_(std::move(fallback)) {
  const size_t n = model_->num_relations();
  std::vector<double> norms(n);
  double mean = 0;
  for (size_t i = 0; i < n; ++i) {
    double sq = 0;
    for (double v : model_->relation(i)) sq += v * v;
    norms[i] = std::sqrt(sq);
    mean += norms[i] / n;
  }
  degenerate_.resize(n);
  for (size_t i = 0; i < n; ++i) degenerate_[i] = norms[i] < min_norm_ratio * mean;
}

bool TransESimilarity::Degenerate(std::string_view relation) const {
  auto index = model_->RelationIndex(relation);
  return index && degenerate_[*index];
}

double TransESimilarity::Similarity(std::string_view a, std::string_view b) const {
  if (a == b) return 1.0;
  if (!Degenerate(a) && !Degenerate(b)) {
    if (auto cos = model_->RelationCosine(a, b)) return *cos;
  }
  return fallback_.Similarity(a, b);
}

std::vector<int> GroundedOrder(const LogicalForm &lf, std::vector<int> *unreachable) {
  std::set<std::string> bound;
  std::vector<bool> done(lf.patterns.size(), false);
  std::vector<int> order;
  auto grounded = [&](const LfTerm &t) { return !t.is_variable() || bound.count(t.text) > 0; };
  for (bool progress = true; progress;) {
    progress = false;
    for (size_t i = 0; i < lf.patterns.size(); ++i) {
      const TriplePattern &p = lf.patterns[i];
      if (done[i] || !(grounded(p.subject) || grounded(p.object))) continue;
      done[i] = true;
      order.push_back(static_cast<int>(i));
      if (p.subject.is_variable()) bound.insert(p.subject.text);
      if (p.object.is_variable()) bound.insert(p.object.text);
      progress = true;
      break;  // restart so earlier patterns win once they become grounded
    }
  }
  for (size_t i = 0; i < lf.patterns.size(); ++i) {
    if (done[i]) continue;
    order.push_back(static_cast<int>(i));
    if (unreachable != nullptr) unreachable->push_back(static_cast<int>(i));
  }
  return order;
}

AlignmentResult Align(const LogicalForm &lf, const KnowledgeBase &kb,
                      const RelationSimilarity &similarity, const AlignConfig &config) {
  ValidateLogicalForm(lf);
  if (config.beam <= 0) throw Error(ErrorCode::kInvalidArgument, "beam must be positive");
  AlignmentResult result = Aligner(lf, kb, similarity, config).Run();
  if (result.executed || config.beam == 1) return result;
  // Pruning can drop the greedy path; fall back to it so a wider beam never
  // does worse than width 1.
  AlignConfig greedy = config;
  greedy.beam = 1;
  AlignmentResult fallback = Aligner(lf, kb, similarity, greedy).Run();
  return fallback.executed ? fallback : result;
}

}  // namespace casebase
