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


#ifndef CASEBASE_SERVICE_H_
#define CASEBASE_SERVICE_H_

// JSON-over-HTTP facade over the pipeline and the case memory. Handlers are
// plain methods returning a status and a body so they can be exercised
// without a socket; Register() wires them into a cpp-httplib server.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <shared_mutex>
#include <string>

#include "casebase/case_memory.h"
#include "casebase/pipeline.h"
#include "json.hpp"

namespace httplib {
class Server;
}

namespace casebase {

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

struct ServiceConfig {
  PipelineFlags defaults;
  // How long a write waits for the memory lock before answering 409.
  std::chrono::milliseconds write_timeout{2000};
  // Free-form description echoed by GET /meta (world seed, file paths).
  nlohmann::json info = nlohmann::json::object();
};

// {code, message, detail}.
ApiResponse ErrorResponse(int status, std::string code, std::string message,
                          nlohmann::json detail = nullptr);

class Service {
 public:
  Service(Pipeline pipeline, CaseMemory memory, ServiceConfig config = {});

  // POST /query {question, k?, revise?, beam?, policy?, mentions?}
  ApiResponse Query(const std::string &body);
  // POST /cases {question, sparql, mentions?, author?, expected_revision?}
  ApiResponse AddCase(const std::string &body);
  // DELETE /cases/{id}
  ApiResponse RemoveCase(const std::string &id);
  // GET /cases?query=&k= for nearest cases, or ?provenance=&offset=&limit=
  // to page through the memory.
  ApiResponse ListCases(const std::optional<std::string> &query,
                        const std::optional<std::string> &k,
                        const std::optional<std::string> &provenance,
                        const std::optional<std::string> &offset,
                        const std::optional<std::string> &limit);
  // GET /kb/neighborhood/{entity}?direction=out|in|both
  ApiResponse Neighborhood(const std::string &entity, const std::optional<std::string> &direction);
  // POST /lf/validate {sparql}
  ApiResponse ValidateLf(const std::string &body);
  // GET /meta
  ApiResponse Meta();

  void Register(httplib::Server &server);

  // Consistent copy of the memory, taken under the read lock.
  void SnapshotMemory(std::ostream &out) const;
  uint64_t memory_revision() const { return revision_.load(); }

 private:
  nlohmann::json Versions() const;
  nlohmann::json CaseToJson(const Case &c) const;

  Pipeline pipeline_;
  ServiceConfig config_;
  mutable std::shared_timed_mutex mu_;
  CaseMemory memory_;
  std::atomic<uint64_t> revision_{0};
  std::atomic<uint64_t> queries_{0};
  std::atomic<uint64_t> cases_added_{0};
  std::atomic<uint64_t> cases_removed_{0};
  std::atomic<uint64_t> conflicts_{0};
};

}  // namespace casebase

#endif  // CASEBASE_SERVICE_H_
