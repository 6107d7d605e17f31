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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include "casebase/binary_io.h"
#include "casebase/error.h"

namespace casebase {
namespace {

constexpr char kMagic[] = "CBTRNv1\n";

void Normalize(std::span<double> v) {
  double norm = 0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm == 0) return;
  for (double &x : v) x /= norm;
}

// Writes h + r - t into `out` and returns its norm.
double Residual(const TransE &model, const IndexedTriple &t, std::vector<double> &out) {
  auto h = model.entity(t.head), r = model.relation(t.relation), tail = model.entity(t.tail);
  out.resize(h.size());
  double norm = 0;
  for (size_t i = 0; i < h.size(); ++i) {
    out[i] = h[i] + r[i] - tail[i];
    norm += out[i] * out[i];
  }
  return std::sqrt(norm);
}

void Accumulate(std::map<size_t, std::vector<double>> &into, size_t row,
                const std::vector<double> &g, double scale) {
  auto &dst = into[row];
  dst.resize(g.size(), 0.0);
  for (size_t i = 0; i < g.size(); ++i) dst[i] += scale * g[i];
}

}  // namespace

TransE::TransE(std::vector<std::string> entities, std::vector<std::string> relations,
               const TransEConfig &config)
    : dim_(config.dim),
      margin_(config.margin),
      seed_(config.seed),
      entity_names_(std::move(entities)),
      relation_names_(std::move(relations)) {
  if (dim_ <= 0 || margin_ <= 0) throw Error(ErrorCode::kInvalidArgument, "bad TransE config");
  Index();
  std::mt19937_64 rng(seed_);
  const double bound = 6.0 / std::sqrt(static_cast<double>(dim_));
  std::uniform_real_distribution<double> init(-bound, bound);
  relations_.resize(relation_names_.size() * dim_);
  for (double &x : relations_) x = init(rng);
  entities_.resize(entity_names_.size() * dim_);
  for (double &x : entities_) x = init(rng);
  for (size_t i = 0; i < num_relations(); ++i) Normalize(relation(i));
  for (size_t i = 0; i < num_entities(); ++i) NormalizeEntity(i);
}

void TransE::Index() {
  entity_index_.clear();
  relation_index_.clear();
  for (size_t i = 0; i < entity_names_.size(); ++i) entity_index_[entity_names_[i]] = i;
  for (size_t i = 0; i < relation_names_.size(); ++i) relation_index_[relation_names_[i]] = i;
}

std::optional<size_t> TransE::EntityIndex(std::string_view name) const {
  auto it = entity_index_.find(std::string(name));
  if (it == entity_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<size_t> TransE::RelationIndex(std::string_view name) const {
  auto it = relation_index_.find(std::string(name));
  if (it == relation_index_.end()) return std::nullopt;
  return it->second;
}

void TransE::NormalizeEntity(size_t i) { Normalize(entity(i)); }

double TransE::Distance(const IndexedTriple &t) const {
  std::vector<double> u;
  return Residual(*this, t, u);
}

double TransE::HingeLoss(const IndexedTriple &positive, const IndexedTriple &negative,
                         TransEGradient *gradient) const {
  std::vector<double> u, w;
  double d_pos = Residual(*this, positive, u);
  double d_neg = Residual(*this, negative, w);
  double loss = margin_ + d_pos - d_neg;
  if (loss <= 0) return 0.0;
  if (gradient != nullptr) {
    if (d_pos > 0) {
      for (double &x : u) x /= d_pos;
      Accumulate(gradient->entity, positive.head, u, 1.0);
      Accumulate(gradient->relation, positive.relation, u, 1.0);
      Accumulate(gradient->entity, positive.tail, u, -1.0);
    }
    if (d_neg > 0) {
      for (double &x : w) x /= d_neg;
      Accumulate(gradient->entity, negative.head, w, -1.0);
      Accumulate(gradient->relation, negative.relation, w, -1.0);
      Accumulate(gradient->entity, negative.tail, w, 1.0);
    }
  }
  return loss;
}

double TransE::Step(const IndexedTriple &positive, const IndexedTriple &negative,
                    double learning_rate) {
  TransEGradient gradient;
  double loss = HingeLoss(positive, negative, &gradient);
  if (loss == 0) return 0.0;
  for (const auto &[row, g] : gradient.entity) {
    auto v = entity(row);
    for (int i = 0; i < dim_; ++i) v[i] -= learning_rate * g[i];
  }
  for (const auto &[row, g] : gradient.relation) {
    auto v = relation(row);
    for (int i = 0; i < dim_; ++i) v[i] -= learning_rate * g[i];
  }
  for (const auto &[row, _] : gradient.entity) NormalizeEntity(row);
  return loss;
}

std::optional<double> TransE::RelationCosine(std::string_view a, std::string_view b) const {
  auto ia = RelationIndex(a), ib = RelationIndex(b);
  if (!ia || !ib) return std::nullopt;
  auto va = relation(*ia), vb = relation(*ib);
  double dot = 0, na = 0, nb = 0;
  for (int i = 0; i < dim_; ++i) {
    dot += va[i] * vb[i];
    na += va[i] * va[i];
    nb += vb[i] * vb[i];
  }
  if (na == 0 || nb == 0) return 0.0;
  return dot / std::sqrt(na * nb);
}

void TransE::Save(const std::filesystem::path &path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kUnavailable, "cannot write " + path.string());
  BinaryWriter w(out);
  w.PutBytes(kMagic, sizeof(kMagic) - 1);
  w.Put<uint32_t>(static_cast<uint32_t>(dim_));
  w.Put<double>(margin_);
  w.Put<uint64_t>(seed_);
  w.Put<uint64_t>(entity_names_.size());
  w.Put<uint64_t>(relation_names_.size());
  for (const auto &n : entity_names_) w.PutString(n);
  for (const auto &n : relation_names_) w.PutString(n);
  w.PutBytes(entities_.data(), entities_.size() * sizeof(double));
  w.PutBytes(relations_.data(), relations_.size() * sizeof(double));
}

TransE TransE::Load(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot open " + path.string());
  BinaryReader r(in);
  char magic[sizeof(kMagic) - 1];
  r.GetBytes(magic, sizeof(magic), "magic");
  if (std::string(magic, sizeof(magic)) != std::string(kMagic, sizeof(magic))) {
    throw Error(ErrorCode::kDataLoss, "not a TransE checkpoint: " + path.string());
  }
  TransE model;
  model.dim_ = static_cast<int>(r.Get<uint32_t>("dim"));
  model.margin_ = r.Get<double>("margin");
  model.seed_ = r.Get<uint64_t>("seed");
  uint64_t n_entities = r.Get<uint64_t>("entity count");
  uint64_t n_relations = r.Get<uint64_t>("relation count");
  if (model.dim_ <= 0 || model.dim_ > 4096 || n_entities > (1u << 26) || n_relations > (1u << 20)) {
    throw Error(ErrorCode::kDataLoss, "implausible TransE header in " + path.string());
  }
  for (uint64_t i = 0; i < n_entities; ++i) model.entity_names_.push_back(r.GetString("entity"));
  for (uint64_t i = 0; i < n_relations; ++i) {
    model.relation_names_.push_back(r.GetString("relation"));
  }
  model.entities_.resize(n_entities * model.dim_);
  model.relations_.resize(n_relations * model.dim_);
  r.GetBytes(model.entities_.data(), model.entities_.size() * sizeof(double), "entity block");
  r.GetBytes(model.relations_.data(), model.relations_.size() * sizeof(double), "relation block");
  model.Index();
  return model;
}

TransE TrainTransE(const KnowledgeBase &kb, const TransEConfig &config, TransEReport *report) {
  std::vector<std::string> entities, relations;
  std::vector<size_t> entity_row(kb.num_terms(), 0);
  for (TermId id : kb.entities()) {
    entity_row[id] = entities.size();
    entities.push_back(kb.TermName(id));
  }
  for (RelationId r = 0; r < kb.num_relations(); ++r) relations.push_back(kb.Relation(r).name);
  std::vector<IndexedTriple> triples;
  for (const Triple &t : kb.triples()) {
    if (kb.IsEntity(t.object)) triples.push_back({entity_row[t.subject], t.relation, entity_row[t.object]});
  }
  if (triples.empty()) {
    throw Error(ErrorCode::kFailedPrecondition, "KB has no entity-object triples to embed");
  }
  TransE model(std::move(entities), std::move(relations), config);
  std::mt19937_64 rng(config.seed ^ 0x7472616e7345ULL);
  std::uniform_int_distribution<size_t> pick(0, model.num_entities() - 1);
  std::vector<size_t> order(triples.size());
  std::iota(order.begin(), order.end(), 0);
  if (report != nullptr) report->triples = triples.size();
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0;
    for (size_t i : order) {
      const IndexedTriple &pos = triples[i];
      IndexedTriple neg = pos;
      bool corrupt_head = rng() & 1;
      size_t replacement = pick(rng);
      if (model.num_entities() > 1) {
        while (replacement == (corrupt_head ? pos.head : pos.tail)) replacement = pick(rng);
      }
      (corrupt_head ? neg.head : neg.tail) = replacement;
      total += model.Step(pos, neg, config.learning_rate);
    }
    if (report != nullptr) report->epoch_loss.push_back(total);
  }
  return model;
}

}  // namespace casebase
