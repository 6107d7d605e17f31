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

#ifndef CASEBASE_CASE_MEMORY_H_
#define CASEBASE_CASE_MEMORY_H_

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "casebase/entity_linker.h"
#include "casebase/kb.h"
#include "casebase/logical_form.h"
#include "casebase/retriever.h"

namespace casebase {

struct Provenance {
  enum class Kind { kTrain, kInjected };
  Kind kind = Kind::kTrain;
  std::string author;
  std::string timestamp;

  bool operator==(const Provenance &) const = default;
};

struct Case {
  std::string id;
  std::string question;
  std::vector<Mention> mentions;
  LogicalForm lf;
  Provenance provenance;

  bool operator==(const Case &) const = default;
};

struct RetrievedCase {
  std::shared_ptr<const Case> item;
  double similarity = 0.0;
};

struct InjectResult {
  std::string id;
  // Relations of the LF that the KB does not know.
  std::vector<std::string> warnings;
};

// Cases with cached unit vectors, kept in insertion order. Not internally
// synchronized: callers serialize writers against readers.
class CaseMemory {
 public:
  CaseMemory() = default;
  CaseMemory(uint64_t encoder_version, int dim)
      : encoder_version_(encoder_version), dim_(dim) {}

  // Encodes every case with the encoder.
  static CaseMemory Build(std::vector<Case> cases, const Encoder &encoder);

  // Adds a case with its vector. Throws Error(kAlreadyExists) on a duplicate
  // id.
  void Add(Case c, const Vector &vector);

  // Parses lf_text, encodes only the new question and appends it. Throws
  // ParseError or Error(kFailedPrecondition) for a stale encoder; the memory
  // is unchanged on failure. An empty id asks for a fresh "inj-<n>" id.
  InjectResult Inject(std::string_view question, std::string_view lf_text,
                      std::vector<Mention> mentions, const Encoder &encoder,
                      const KnowledgeBase *kb = nullptr, std::string id = "",
                      std::string author = "", std::string timestamp = "");

  bool Remove(std::string_view id);

  // Recomputes every vector with the encoder.
  void Reencode(const Encoder &encoder);

  size_t size() const { return cases_.size(); }
  int dim() const { return dim_; }
  uint64_t encoder_version() const { return encoder_version_; }
  const std::vector<std::shared_ptr<const Case>> &cases() const { return cases_; }
  std::shared_ptr<const Case> Find(std::string_view id) const;
  const double *vector(size_t index) const { return &matrix_[index * dim_]; }

  // Header line, one JSON line per case, "VECS\n" and a little-endian float64
  // block of count x dim values.
  void Snapshot(std::ostream &out) const;
  // With an encoder whose version differs from the snapshot's, every case is
  // re-encoded and *reencoded is set. Throws Error(kDataLoss) naming the byte
  // offset of corrupt content.
  static CaseMemory Load(std::istream &in, const Encoder *encoder = nullptr,
                         bool *reencoded = nullptr);

  bool operator==(const CaseMemory &other) const;

 private:
  std::string NextInjectedId();

  uint64_t encoder_version_ = 0;
  int dim_ = 0;
  std::vector<std::shared_ptr<const Case>> cases_;
  std::vector<double> matrix_;
  std::unordered_map<std::string, size_t> index_;
  uint64_t next_injected_ = 1;
};

// Exact top-k by cosine, descending; ties go to the earlier case. Throws
// Error(kFailedPrecondition) when the memory was encoded by another encoder.
std::vector<RetrievedCase> Retrieve(const Encoder &encoder, const CaseMemory &memory,
                                    std::string_view question,
                                    std::span<const Mention> mentions, size_t k,
                                    std::optional<std::string_view> exclude = {});
std::vector<RetrievedCase> RetrieveByVector(const CaseMemory &memory, const Vector &query,
                                            size_t k,
                                            std::optional<std::string_view> exclude = {});

// Fraction of gold relations covered by the union of retrieved relations.
double RelationRecall(const std::set<std::string> &gold,
                      const std::vector<RetrievedCase> &retrieved);

}  // namespace casebase

#endif  // CASEBASE_CASE_MEMORY_H_
