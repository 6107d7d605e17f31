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


#include "casebase/generator.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "casebase/error.h"

namespace casebase {
namespace {

std::string Stem(std::string token) {
  if (token.size() > 3 && token.back() == 's' && token[token.size() - 2] != 's') token.pop_back();
  return token;
}

std::vector<std::string> StemmedRelationTokens(const std::string &relation) {
  std::vector<std::string> out;
  for (auto &t : RelationTokens(relation)) out.push_back(Stem(std::move(t)));
  return out;
}

std::vector<std::vector<std::string>> Documents(const std::vector<std::string> &relations) {
  std::vector<std::vector<std::string>> docs;
  for (const auto &r : relations) docs.push_back(StemmedRelationTokens(r));
  return docs;
}

std::vector<Mention> SortedMentions(std::span<const Mention> mentions) {
  std::vector<Mention> out(mentions.begin(), mentions.end());
  std::stable_sort(out.begin(), out.end(),
                   [](const Mention &a, const Mention &b) { return a.begin < b.begin; });
  return out;
}

bool Overlaps(const Token &t, const std::vector<Mention> &mentions) {
  return std::any_of(mentions.begin(), mentions.end(),
                     [&](const Mention &m) { return t.begin < m.end && m.begin < t.end; });
}

struct Partial {
  double score;
  std::vector<size_t> choice;
};

}  // namespace

void ValidateGeneratorConfig(const GeneratorConfig &config) {
  if (config.beam < 1 || config.alpha < 0 || config.beta < 0 || config.gamma_oov > 0 ||
      !(config.case_temperature > 0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "generator config needs beam >= 1, alpha, beta >= 0, gamma_oov <= 0 and a "
                "positive case temperature");
  }
}

std::string AugmentQuestion(std::string_view question, std::span<const Mention> mentions) {
  std::string out;
  size_t at = 0;
  for (const Mention &m : SortedMentions(mentions)) {
    if (m.end > question.size() || m.end < at) continue;
    out.append(question.substr(at, m.end - at));
    out += " " + m.entity;
    at = m.end;
  }
  out.append(question.substr(at));
  return out;
}

std::string SerializeInput(std::string_view question, std::span<const Mention> mentions,
                           std::span<const RetrievedCase> cases) {
  std::string out = AugmentQuestion(question, mentions);
  for (const RetrievedCase &c : cases) {
    out += " [SEP] " + AugmentQuestion(c.item->question, c.item->mentions);
    out += " [SEP] " + PrintLogicalForm(c.item->lf);
  }
  return out;
}

std::vector<std::string> ContentTokens(std::string_view text) {
  std::vector<std::string> out;
  for (Token &t : Tokenize(text)) {
    if (!IsStopword(t.text)) out.push_back(Stem(std::move(t.text)));
  }
  return out;
}

Generator::Generator(std::vector<std::string> vocabulary, GeneratorConfig config)
    : config_(config), vocabulary_(std::move(vocabulary)), tfidf_(Documents(vocabulary_)) {
  ValidateGeneratorConfig(config_);
  std::sort(vocabulary_.begin(), vocabulary_.end());
  vocabulary_.erase(std::unique(vocabulary_.begin(), vocabulary_.end()), vocabulary_.end());
}

Generator::Generator(const KnowledgeBase &kb, GeneratorConfig config)
    : Generator(
          [&] {
            std::vector<std::string> names;
            for (RelationId r = 0; r < kb.num_relations(); ++r) names.push_back(kb.Relation(r).name);
            return names;
          }(),
          config) {}

double Generator::LexicalSimilarity(const std::string &relation,
                                    const std::vector<std::string> &question_tokens) const {
  if (question_tokens.empty()) return 0.0;
  std::vector<std::string> rel = StemmedRelationTokens(relation);
  return tfidf_.Cosine(rel, question_tokens);
}

std::vector<Generator::SkeletonOption> Generator::Prepare(
    std::string_view question, std::span<const Mention> raw_mentions,
    std::span<const RetrievedCase> cases) const {
  const std::vector<Mention> mentions = SortedMentions(raw_mentions);

  // Softmax over retrieval similarities.
  std::vector<double> weights(cases.size());
  if (!cases.empty()) {
    double top = -std::numeric_limits<double>::infinity();
    for (const auto &c : cases) top = std::max(top, c.similarity);
    double total = 0;
    for (size_t i = 0; i < cases.size(); ++i) {
      weights[i] = std::exp((cases[i].similarity - top) / config_.case_temperature);
      total += weights[i];
    }
    for (double &w : weights) w /= total;
  }

  struct Group {
    Skeleton skeleton;
    double score = 0.0;
  };
  std::map<std::string, Group> groups;
  std::vector<Skeleton> case_skeletons;
  std::vector<std::vector<int>> case_depths;
  std::set<std::string> case_relations;
  for (size_t i = 0; i < cases.size(); ++i) {
    const LogicalForm &lf = cases[i].item->lf;
    case_skeletons.push_back(SkeletonOf(lf));
    case_depths.push_back(PatternDepths(lf));
    for (const auto &p : lf.patterns) case_relations.insert(p.relation);
    Group &g = groups[case_skeletons.back().key];
    g.skeleton = case_skeletons.back();
    g.score += weights[i];
  }
  std::erase_if(groups, [&](const auto &entry) {
    return entry.second.skeleton.num_anchors > static_cast<int>(mentions.size());
  });
  if (groups.empty() && config_.use_global_vocab && !mentions.empty()) {
    LogicalForm one_hop{"?x", {{LfTerm::Entity("a"), "r", LfTerm::Variable("?x")}}, {}};
    Skeleton sk = SkeletonOf(one_hop);
    groups[sk.key] = {sk, 0.0};
  }
  if (groups.empty()) throw Error(ErrorCode::kFailedPrecondition, "no cases to reuse");

  // Relation pool.
  std::vector<std::pair<std::string, bool>> pool;  // (relation, global only)
  for (const auto &r : case_relations) pool.push_back({r, false});
  if (config_.use_global_vocab) {
    for (const auto &r : vocabulary_) {
      if (!case_relations.count(r)) pool.push_back({r, true});
    }
  }

  // Question tokens outside mentions, restricted to relation vocabulary.
  std::vector<Token> tokens;
  for (Token &t : Tokenize(question)) {
    if (Overlaps(t, mentions) || IsStopword(t.text)) continue;
    t.text = Stem(std::move(t.text));
    if (tfidf_.Contains(t.text)) tokens.push_back(std::move(t));
  }
  auto texts = [](const std::vector<Token> &list, size_t from, size_t to) {
    std::vector<std::string> out;
    for (const Token &t : list) {
      if (t.begin >= from && t.end <= to) out.push_back(t.text);
    }
    return out;
  };
  const std::vector<std::string> whole = texts(tokens, 0, question.size());
  // Per-mention context: the words just before the mention, else just after.
  std::vector<std::vector<std::string>> context(mentions.size());
  for (size_t i = 0; i < mentions.size(); ++i) {
    size_t before = i == 0 ? 0 : mentions[i - 1].end;
    context[i] = texts(tokens, before, mentions[i].begin);
    if (context[i].empty()) {
      size_t after = i + 1 < mentions.size() ? mentions[i + 1].begin : question.size();
      context[i] = texts(tokens, mentions[i].end, after);
    }
  }

  std::vector<SkeletonOption> options;
  for (const auto &[key, group] : groups) {
    SkeletonOption option;
    option.skeleton = group.skeleton;
    option.score = group.score;
    for (int a = 0; a < group.skeleton.num_anchors; ++a) option.anchors.push_back(mentions[a].entity);
    for (size_t s = 0; s < group.skeleton.patterns.size(); ++s) {
      const Skeleton::Pattern &p = group.skeleton.patterns[s];
      const std::vector<std::string> *ctx = &whole;
      if (group.skeleton.num_anchors >= 2) {
        if (p.subject.kind == Skeleton::Term::Kind::kAnchor) {
          ctx = &context[p.subject.index];
        } else if (p.object.kind == Skeleton::Term::Kind::kAnchor) {
          ctx = &context[p.object.index];
        }
      }
      std::vector<SlotSupport> slot;
      for (const auto &[relation, global] : pool) {
        SlotSupport support;
        support.relation = relation;
        support.global = global;
        support.lexical = LexicalSimilarity(relation, *ctx);
        for (size_t c = 0; c < cases.size(); ++c) {
          const auto &patterns = cases[c].item->lf.patterns;
          bool hit = false;
          if (case_skeletons[c].key == key) {
            hit = patterns[s].relation == relation;
          } else {
            for (size_t j = 0; j < patterns.size() && !hit; ++j) {
              hit = patterns[j].relation == relation && case_depths[c][j] == p.depth;
            }
          }
          if (hit) {
            support.support += weights[c];
            support.cases.push_back(cases[c].item->id);
          }
        }
        support.score = config_.alpha * support.lexical + config_.beta * support.support +
                        (global ? config_.gamma_oov : 0.0);
        slot.push_back(std::move(support));
      }
      std::stable_sort(slot.begin(), slot.end(), [](const SlotSupport &a, const SlotSupport &b) {
        if (a.score != b.score) return a.score > b.score;
        return a.relation < b.relation;
      });
      option.slots.push_back(std::move(slot));
    }
    options.push_back(std::move(option));
  }
  return options;
}

std::vector<Candidate> Generator::Search(const std::vector<SkeletonOption> &options,
                                         size_t beam) {
  struct Scored {
    Candidate candidate;
    std::string printed;
  };
  std::vector<Scored> all;
  for (const SkeletonOption &option : options) {
    std::vector<Partial> partials{{option.score, {}}};
    for (const auto &slot : option.slots) {
      std::vector<Partial> next;
      for (const Partial &p : partials) {
        for (size_t i = 0; i < slot.size(); ++i) {
          Partial q{p.score + slot[i].score, p.choice};
          q.choice.push_back(i);
          next.push_back(std::move(q));
        }
      }
      std::stable_sort(next.begin(), next.end(),
                       [](const Partial &a, const Partial &b) { return a.score > b.score; });
      // Keep the top `beam` plus anything tied with the last kept score so
      // the final LF-string tie-break stays exact.
      size_t keep = std::min(beam, next.size());
      while (keep < next.size() && keep > 0 && next[keep].score == next[keep - 1].score) ++keep;
      next.resize(keep);
      partials = std::move(next);
    }
    for (const Partial &p : partials) {
      Scored s;
      std::vector<std::string> relations;
      for (size_t k = 0; k < p.choice.size(); ++k) {
        s.candidate.slots.push_back(option.slots[k][p.choice[k]]);
        relations.push_back(option.slots[k][p.choice[k]].relation);
      }
      s.candidate.lf = option.skeleton.Instantiate(relations, option.anchors);
      s.candidate.score = p.score;
      s.candidate.skeleton = option.skeleton.key;
      s.candidate.skeleton_score = option.score;
      s.printed = PrintLogicalForm(s.candidate.lf);
      all.push_back(std::move(s));
    }
  }
  std::sort(all.begin(), all.end(), [](const Scored &a, const Scored &b) {
    if (a.candidate.score != b.candidate.score) return a.candidate.score > b.candidate.score;
    return a.printed < b.printed;
  });
  std::vector<Candidate> out;
  std::set<std::string> seen;
  for (auto &s : all) {
    if (out.size() >= beam) break;
    if (seen.insert(s.printed).second) out.push_back(std::move(s.candidate));
  }
  return out;
}

std::vector<Candidate> Generator::Generate(std::string_view question,
                                           std::span<const Mention> mentions,
                                           std::span<const RetrievedCase> cases) const {
  return Search(Prepare(question, mentions, cases), static_cast<size_t>(config_.beam));
}

}  // namespace casebase
