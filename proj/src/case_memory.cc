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

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <istream>
#include <ostream>

#include "casebase/binary_io.h"
#include "casebase/error.h"
#include "casebase/json_io.h"
#include "json.hpp"

namespace casebase {
namespace {

using nlohmann::json;

constexpr char kFormat[] = "casebase-memory";
constexpr int kFormatVersion = 1;
constexpr char kInjectedPrefix[] = "inj-";

std::string Hex(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016" PRIx64, v);
  return buf;
}

json CaseToJson(const Case &c) {
  json provenance = {{"kind", c.provenance.kind == Provenance::Kind::kTrain ? "train"
                                                                             : "injected"}};
  if (c.provenance.kind == Provenance::Kind::kInjected) {
    provenance["author"] = c.provenance.author;
    provenance["timestamp"] = c.provenance.timestamp;
  }
  return {{"id", c.id},
          {"question", c.question},
          {"mentions", c.mentions},
          {"sparql", PrintLogicalForm(c.lf)},
          {"provenance", provenance}};
}

Case CaseFromJson(const json &j) {
  Case c;
  c.id = j.at("id").get<std::string>();
  c.question = j.at("question").get<std::string>();
  c.mentions = j.at("mentions").get<std::vector<Mention>>();
  c.lf = ParseLogicalForm(j.at("sparql").get<std::string>());
  const json &p = j.at("provenance");
  std::string kind = p.at("kind").get<std::string>();
  if (kind == "injected") {
    c.provenance.kind = Provenance::Kind::kInjected;
    c.provenance.author = p.value("author", std::string());
    c.provenance.timestamp = p.value("timestamp", std::string());
  } else if (kind != "train") {
    throw Error(ErrorCode::kInvalidArgument, "unknown provenance " + kind);
  }
  return c;
}

// Reads one '\n'-terminated line, advancing *offset.
bool ReadLine(std::istream &in, std::string &line, uint64_t *offset) {
  if (!std::getline(in, line)) return false;
  *offset += line.size() + (in.eof() ? 0 : 1);
  return true;
}

}  // namespace

CaseMemory CaseMemory::Build(std::vector<Case> cases, const Encoder &encoder) {
  CaseMemory memory(encoder.version(), encoder.dim());
  for (Case &c : cases) {
    Vector v = encoder.Encode(c.question, c.mentions);
    memory.Add(std::move(c), v);
  }
  return memory;
}

void CaseMemory::Add(Case c, const Vector &vector) {
  if (static_cast<int>(vector.size()) != dim_) {
    throw Error(ErrorCode::kInvalidArgument, "vector dimension mismatch");
  }
  if (c.id.empty()) throw Error(ErrorCode::kInvalidArgument, "case id is empty");
  if (index_.count(c.id)) {
    throw Error(ErrorCode::kAlreadyExists, "duplicate case id " + c.id);
  }
  index_.emplace(c.id, cases_.size());
  cases_.push_back(std::make_shared<const Case>(std::move(c)));
  matrix_.insert(matrix_.end(), vector.begin(), vector.end());
}

std::string CaseMemory::NextInjectedId() {
  std::string id;
  do {
    id = kInjectedPrefix + std::to_string(next_injected_++);
  } while (index_.count(id));
  return id;
}

InjectResult CaseMemory::Inject(std::string_view question, std::string_view lf_text,
                                std::vector<Mention> mentions, const Encoder &encoder,
                                const KnowledgeBase *kb, std::string id,
                                std::string author, std::string timestamp) {
  if (encoder.version() != encoder_version_) {
    throw Error(ErrorCode::kFailedPrecondition,
                "memory vectors come from another encoder; re-encode first");
  }
  if (question.empty()) throw Error(ErrorCode::kInvalidArgument, "question is empty");
  LogicalForm lf = ParseLogicalForm(lf_text);
  CheckMentions(question, mentions);
  if (!id.empty() && index_.count(id)) {
    throw Error(ErrorCode::kAlreadyExists, "duplicate case id " + id);
  }
  InjectResult result;
  if (kb != nullptr) {
    for (const std::string &r : RelationsOf(lf)) {
      if (!kb->FindRelation(r)) result.warnings.push_back(r);
    }
  }
  Vector v = encoder.Encode(question, mentions);
  result.id = id.empty() ? NextInjectedId() : std::move(id);
  Case c{result.id, std::string(question), std::move(mentions), std::move(lf),
         {Provenance::Kind::kInjected, std::move(author), std::move(timestamp)}};
  Add(std::move(c), v);
  return result;
}

bool CaseMemory::Remove(std::string_view id) {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return false;
  size_t row = it->second;
  cases_.erase(cases_.begin() + static_cast<std::ptrdiff_t>(row));
  matrix_.erase(matrix_.begin() + static_cast<std::ptrdiff_t>(row * dim_),
                matrix_.begin() + static_cast<std::ptrdiff_t>((row + 1) * dim_));
  index_.erase(it);
  for (auto &[_, i] : index_) {
    if (i > row) --i;
  }
  return true;
}

void CaseMemory::Reencode(const Encoder &encoder) {
  dim_ = encoder.dim();
  encoder_version_ = encoder.version();
  matrix_.clear();
  for (const auto &c : cases_) {
    Vector v = encoder.Encode(c->question, c->mentions);
    matrix_.insert(matrix_.end(), v.begin(), v.end());
  }
}

std::shared_ptr<const Case> CaseMemory::Find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : cases_[it->second];
}

void CaseMemory::Snapshot(std::ostream &out) const {
  json header = {{"format", kFormat},
                 {"version", kFormatVersion},
                 {"encoder_version", Hex(encoder_version_)},
                 {"dim", dim_},
                 {"count", cases_.size()}};
  out << header.dump() << '\n';
  for (const auto &c : cases_) out << CaseToJson(*c).dump() << '\n';
  out << "VECS\n";
  BinaryWriter(out).PutBytes(matrix_.data(), matrix_.size() * sizeof(double));
}

CaseMemory CaseMemory::Load(std::istream &in, const Encoder *encoder, bool *reencoded) {
  if (reencoded != nullptr) *reencoded = false;
  uint64_t offset = 0;
  std::string line;
  auto corrupt = [](uint64_t at, const std::string &what) {
    return Error(ErrorCode::kDataLoss,
                 "corrupt memory snapshot at offset " + std::to_string(at) + ": " + what);
  };
  if (!ReadLine(in, line, &offset)) throw corrupt(0, "missing header");
  json header;
  try {
    header = json::parse(line);
    if (header.at("format") != kFormat) throw corrupt(0, "unknown format");
    if (header.at("version") != kFormatVersion) throw corrupt(0, "unsupported version");
  } catch (const json::exception &e) {
    throw corrupt(0, e.what());
  }
  const int dim = header.at("dim").get<int>();
  const size_t count = header.at("count").get<size_t>();
  const std::string stored_version = header.at("encoder_version").get<std::string>();
  CaseMemory memory(std::stoull(stored_version, nullptr, 16), dim);

  std::vector<Case> cases;
  for (size_t i = 0; i < count; ++i) {
    uint64_t at = offset;
    if (!ReadLine(in, line, &offset)) throw corrupt(at, "missing case line");
    try {
      cases.push_back(CaseFromJson(json::parse(line)));
    } catch (const std::exception &e) {
      throw corrupt(at, e.what());
    }
  }
  uint64_t at = offset;
  if (!ReadLine(in, line, &offset) || line != "VECS") throw corrupt(at, "missing VECS marker");
  std::vector<double> matrix(count * dim);
  BinaryReader reader(in, offset);
  reader.GetBytes(matrix.data(), matrix.size() * sizeof(double), "vector block");
  if (in.peek() != std::char_traits<char>::eof()) {
    throw corrupt(reader.offset(), "trailing bytes");
  }
  for (size_t i = 0; i < cases.size(); ++i) {
    Vector v(matrix.begin() + static_cast<std::ptrdiff_t>(i * dim),
             matrix.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim));
    try {
      memory.Add(std::move(cases[i]), v);
    } catch (const Error &e) {
      throw corrupt(0, e.what());
    }
  }
  for (const auto &c : memory.cases_) {
    const std::string &id = c->id;
    if (id.rfind(kInjectedPrefix, 0) == 0) {
      try {
        memory.next_injected_ =
            std::max<uint64_t>(memory.next_injected_, std::stoull(id.substr(4)) + 1);
      } catch (const std::exception &) {
      }
    }
  }
  if (encoder != nullptr && encoder->version() != memory.encoder_version_) {
    memory.Reencode(*encoder);
    if (reencoded != nullptr) *reencoded = true;
  }
  return memory;
}

bool CaseMemory::operator==(const CaseMemory &other) const {
  if (encoder_version_ != other.encoder_version_ || dim_ != other.dim_ ||
      cases_.size() != other.cases_.size() || matrix_ != other.matrix_) {
    return false;
  }
  for (size_t i = 0; i < cases_.size(); ++i) {
    if (!(*cases_[i] == *other.cases_[i])) return false;
  }
  return true;
}

std::vector<RetrievedCase> RetrieveByVector(const CaseMemory &memory, const Vector &query,
                                            size_t k,
                                            std::optional<std::string_view> exclude) {
  if (k == 0 || memory.size() == 0) return {};
  const int d = memory.dim();
  if (static_cast<int>(query.size()) != d) {
    throw Error(ErrorCode::kInvalidArgument, "query dimension mismatch");
  }
  std::vector<std::pair<double, size_t>> scored;
  scored.reserve(memory.size());
  for (size_t i = 0; i < memory.size(); ++i) {
    if (exclude && memory.cases()[i]->id == *exclude) continue;
    const double *v = memory.vector(i);
    double s = 0;
    for (int j = 0; j < d; ++j) s += v[j] * query[j];
    scored.push_back({s, i});
  }
  auto better = [](const auto &a, const auto &b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  };
  size_t n = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n),
                    scored.end(), better);
  std::vector<RetrievedCase> out;
  for (size_t i = 0; i < n; ++i) {
    out.push_back({memory.cases()[scored[i].second], scored[i].first});
  }
  return out;
}

std::vector<RetrievedCase> Retrieve(const Encoder &encoder, const CaseMemory &memory,
                                    std::string_view question,
                                    std::span<const Mention> mentions, size_t k,
                                    std::optional<std::string_view> exclude) {
  if (encoder.version() != memory.encoder_version()) {
    throw Error(ErrorCode::kFailedPrecondition,
                "case vectors are stale for this encoder; re-encode the memory");
  }
  if (k == 0) return {};
  return RetrieveByVector(memory, encoder.Encode(question, mentions), k, exclude);
}

double RelationRecall(const std::set<std::string> &gold,
                      const std::vector<RetrievedCase> &retrieved) {
  if (gold.empty()) return 1.0;
  std::set<std::string> covered;
  for (const auto &r : retrieved) {
    for (const std::string &rel : RelationsOf(r.item->lf)) covered.insert(rel);
  }
  size_t hit = 0;
  for (const std::string &r : gold) hit += covered.count(r);
  return static_cast<double>(hit) / gold.size();
}

}  // namespace casebase
