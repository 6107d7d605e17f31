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


#include "casebase/service.h"

#include <ctime>
#include <iomanip>
#include <mutex>
#include <sstream>

#include "casebase/error.h"
#include "casebase/json_io.h"
#include "httplib.h"

namespace casebase {
namespace {

using nlohmann::json;

// Thrown inside handlers; carries the finished error response.
struct ApiError {
  ApiResponse response;
};

[[noreturn]] void Fail(int status, std::string code, std::string message,
                       json detail = nullptr) {
  throw ApiError{ErrorResponse(status, std::move(code), std::move(message), std::move(detail))};
}

json ParseObject(const std::string &body) {
  json j = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) Fail(400, "malformed_json", "request body is not valid JSON");
  if (!j.is_object()) Fail(400, "bad_request", "request body must be a JSON object");
  return j;
}

std::string RequireString(const json &req, const char *field) {
  auto it = req.find(field);
  if (it == req.end() || !it->is_string() || it->get<std::string>().empty()) {
    Fail(400, "bad_request", std::string("field '") + field + "' must be a nonempty string");
  }
  return it->get<std::string>();
}

int64_t IntegerField(const json &j, const char *field, int64_t lo, int64_t hi) {
  if (!j.is_number_integer() || j.get<int64_t>() < lo || j.get<int64_t>() > hi) {
    Fail(400, "bad_request",
         std::string("field '") + field + "' must be an integer in [" + std::to_string(lo) +
             ", " + std::to_string(hi) + "]");
  }
  return j.get<int64_t>();
}

int64_t IntegerParam(const std::optional<std::string> &text, const char *name, int64_t fallback,
                     int64_t lo, int64_t hi) {
  if (!text) return fallback;
  size_t used = 0;
  int64_t v = 0;
  try {
    v = std::stoll(*text, &used);
  } catch (const std::exception &) {
    used = 0;
  }
  if (used == 0 || used != text->size() || v < lo || v > hi) {
    Fail(400, "bad_request",
         std::string("parameter '") + name + "' must be an integer in [" + std::to_string(lo) +
             ", " + std::to_string(hi) + "]");
  }
  return v;
}

std::vector<Mention> MentionsField(const json &req, std::string_view question) {
  const json &m = req.at("mentions");
  if (!m.is_array()) Fail(400, "bad_request", "field 'mentions' must be an array");
  std::vector<Mention> mentions;
  try {
    mentions = m.get<std::vector<Mention>>();
    CheckMentions(question, mentions);
  } catch (const json::exception &e) {
    Fail(400, "bad_request", std::string("bad mention: ") + e.what());
  } catch (const Error &e) {
    Fail(400, "bad_request", std::string("bad mention: ") + e.what());
  }
  return mentions;
}

std::string UtcNow() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return out.str();
}

json ProvenanceToJson(const Provenance &p) {
  json j = {{"kind", p.kind == Provenance::Kind::kTrain ? "train" : "injected"}};
  if (!p.author.empty()) j["author"] = p.author;
  if (!p.timestamp.empty()) j["timestamp"] = p.timestamp;
  return j;
}

int StatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse: return 422;
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kAlreadyExists: return 409;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kUnsupported:
    case ErrorCode::kFailedPrecondition: return 400;
    default: return 500;
  }
}

template <typename F>
ApiResponse Guard(F &&handler) {
  try {
    return handler();
  } catch (const ApiError &e) {
    return e.response;
  } catch (const ParseError &e) {
    return ErrorResponse(422, "invalid_lf", e.what(),
                         {{"position", e.position()}, {"reason", e.detail()}});
  } catch (const Error &e) {
    return ErrorResponse(StatusFor(e.code()), std::string(ErrorCodeName(e.code())), e.what());
  } catch (const json::exception &e) {
    return ErrorResponse(400, "bad_request", e.what());
  }
}

void Send(httplib::Response &res, const ApiResponse &api) {
  res.status = api.status;
  res.set_content(api.body.dump(), "application/json");
}

std::optional<std::string> Param(const httplib::Request &req, const char *name) {
  if (!req.has_param(name)) return std::nullopt;
  return req.get_param_value(name);
}

}  // namespace

ApiResponse ErrorResponse(int status, std::string code, std::string message, json detail) {
  return {status, {{"code", std::move(code)}, {"message", std::move(message)}, {"detail", detail}}};
}

Service::Service(Pipeline pipeline, CaseMemory memory, ServiceConfig config)
    : pipeline_(std::move(pipeline)), config_(std::move(config)), memory_(std::move(memory)) {
  ValidateGeneratorConfig(config_.defaults.generator);
  if (memory_.encoder_version() != pipeline_.components().encoder->version()) {
    throw Error(ErrorCode::kFailedPrecondition, "case memory was encoded by another encoder");
  }
}

json Service::Versions() const {
  const Components &c = pipeline_.components();
  std::ostringstream encoder;
  encoder << std::hex << std::setw(16) << std::setfill('0') << c.encoder->version();
  return {{"encoder", encoder.str()},
          {"memory_revision", revision_.load()},
          {"transe", c.transe ? json(c.transe->dim()) : json(nullptr)},
          {"kb_triples", c.kb->num_triples()}};
}

json Service::CaseToJson(const Case &c) const {
  return {{"id", c.id},
          {"question", c.question},
          {"sparql", PrintLogicalForm(c.lf)},
          {"mentions", c.mentions},
          {"provenance", ProvenanceToJson(c.provenance)}};
}

ApiResponse Service::Query(const std::string &body) {
  return Guard([&]() -> ApiResponse {
    json req = ParseObject(body);
    std::string question = RequireString(req, "question");
    PipelineFlags flags = config_.defaults;
    if (req.contains("k")) flags.k = IntegerField(req["k"], "k", 0, 1000);
    if (req.contains("beam")) flags.generator.beam = IntegerField(req["beam"], "beam", 1, 100);
    if (req.contains("revise")) {
      if (!req["revise"].is_string()) Fail(400, "bad_request", "field 'revise' must be a string");
      flags.revise = ParseReviseMode(req["revise"].get<std::string>());
    }
    if (req.contains("policy")) {
      if (!req["policy"].is_string()) Fail(400, "bad_request", "field 'policy' must be a string");
      flags.policy = ParseRevisePolicy(req["policy"].get<std::string>());
    }
    std::optional<std::vector<Mention>> mentions;
    if (req.contains("mentions")) {
      mentions = MentionsField(req, question);
      flags.gold_mentions = true;
    }
    PipelineResult result;
    {
      std::shared_lock lock(mu_);
      result = pipeline_.Answer(memory_, question, mentions ? &*mentions : nullptr, flags);
    }
    ++queries_;
    json j = PredictionToJson(result, nullptr, nullptr);
    json retrieved = json::array();
    for (const auto &c : result.retrieved) {
      json item = CaseToJson(*c.item);
      item["similarity"] = c.similarity;
      retrieved.push_back(std::move(item));
    }
    j["retrieved"] = std::move(retrieved);
    j["timing_ms"] = {{"link", result.timing.link_ms},
                      {"retrieve", result.timing.retrieve_ms},
                      {"generate", result.timing.generate_ms},
                      {"execute", result.timing.execute_ms},
                      {"revise", result.timing.revise_ms}};
    j["flags"] = FlagsToJson(flags);
    j["versions"] = Versions();
    return {200, j};
  });
}

ApiResponse Service::AddCase(const std::string &body) {
  return Guard([&]() -> ApiResponse {
    json req = ParseObject(body);
    std::string question = RequireString(req, "question");
    std::string sparql = RequireString(req, "sparql");
    LogicalForm lf = ParseLogicalForm(sparql);
    try {
      ValidateLogicalForm(lf);
    } catch (const Error &e) {
      Fail(422, "invalid_lf", e.what());
    }
    const Components &c = pipeline_.components();
    std::vector<Mention> mentions =
        req.contains("mentions") ? MentionsField(req, question) : Link(question, *c.aliases);
    std::string author = "api";
    if (req.contains("author")) author = RequireString(req, "author");

    std::unique_lock lock(mu_, std::defer_lock);
    if (!lock.try_lock_for(config_.write_timeout)) {
      ++conflicts_;
      Fail(409, "conflict", "case memory is busy with another write; retry");
    }
    if (req.contains("expected_revision")) {
      uint64_t expected = IntegerField(req["expected_revision"], "expected_revision", 0,
                                       std::numeric_limits<int64_t>::max());
      if (expected != revision_.load()) {
        ++conflicts_;
        Fail(409, "conflict", "case memory changed since the given revision",
             {{"expected_revision", expected}, {"memory_revision", revision_.load()}});
      }
    }
    InjectResult r = memory_.Inject(question, sparql, mentions, *c.encoder, c.kb.get(), "",
                                    author, UtcNow());
    uint64_t revision = ++revision_;
    lock.unlock();
    ++cases_added_;
    json warnings = r.warnings;
    if (mentions.empty() && !AnchorsOf(lf).empty()) {
      warnings.push_back("no entity mention found in the question");
    }
    return {200,
            {{"id", r.id},
             {"warnings", warnings},
             {"mentions", mentions},
             {"sparql", PrintLogicalForm(lf)},
             {"versions", Versions()},
             {"memory_revision", revision}}};
  });
}

ApiResponse Service::RemoveCase(const std::string &id) {
  return Guard([&]() -> ApiResponse {
    std::unique_lock lock(mu_, std::defer_lock);
    if (!lock.try_lock_for(config_.write_timeout)) {
      ++conflicts_;
      Fail(409, "conflict", "case memory is busy with another write; retry");
    }
    if (!memory_.Remove(id)) Fail(404, "not_found", "no case with id " + id, {{"id", id}});
    uint64_t revision = ++revision_;
    lock.unlock();
    ++cases_removed_;
    return {200, {{"removed", true}, {"id", id}, {"memory_revision", revision}}};
  });
}

ApiResponse Service::ListCases(const std::optional<std::string> &query,
                               const std::optional<std::string> &k,
                               const std::optional<std::string> &provenance,
                               const std::optional<std::string> &offset,
                               const std::optional<std::string> &limit) {
  return Guard([&]() -> ApiResponse {
    const Components &c = pipeline_.components();
    if (query) {
      if (query->empty()) Fail(400, "bad_request", "parameter 'query' must be nonempty");
      size_t n = IntegerParam(k, "k", config_.defaults.k, 1, 1000);
      std::vector<Mention> mentions = Link(*query, *c.aliases);
      std::vector<RetrievedCase> found;
      {
        std::shared_lock lock(mu_);
        found = Retrieve(*c.encoder, memory_, *query, mentions, n);
      }
      json cases = json::array();
      for (const auto &r : found) {
        json item = CaseToJson(*r.item);
        item["similarity"] = r.similarity;
        cases.push_back(std::move(item));
      }
      return {200, {{"query", *query}, {"mentions", mentions}, {"cases", cases}}};
    }
    std::optional<Provenance::Kind> kind;
    if (provenance) {
      if (*provenance == "train") {
        kind = Provenance::Kind::kTrain;
      } else if (*provenance == "injected") {
        kind = Provenance::Kind::kInjected;
      } else {
        Fail(400, "bad_request", "parameter 'provenance' must be train or injected");
      }
    }
    size_t from = IntegerParam(offset, "offset", 0, 0, std::numeric_limits<int32_t>::max());
    size_t count = IntegerParam(limit, "limit", 50, 1, 1000);
    json cases = json::array();
    size_t total = 0;
    {
      std::shared_lock lock(mu_);
      for (const auto &item : memory_.cases()) {
        if (kind && item->provenance.kind != *kind) continue;
        if (total >= from && cases.size() < count) cases.push_back(CaseToJson(*item));
        ++total;
      }
    }
    return {200, {{"total", total}, {"offset", from}, {"cases", cases}}};
  });
}

ApiResponse Service::Neighborhood(const std::string &entity,
                                  const std::optional<std::string> &direction) {
  return Guard([&]() -> ApiResponse {
    Direction dir = Direction::kBoth;
    if (direction) {
      auto parsed = ParseDirection(*direction);
      if (!parsed) Fail(400, "bad_request", "parameter 'direction' must be out, in or both");
      dir = *parsed;
    }
    const Components &c = pipeline_.components();
    auto term = c.kb->FindEntity(entity);
    if (!term) Fail(404, "not_found", "unknown entity " + entity, {{"entity", entity}});
    json edges = json::array();
    for (const Edge &e : c.kb->Neighborhood(*term, dir)) {
      const Value &v = c.kb->TermValue(e.neighbor);
      json item = {{"relation", c.kb->Relation(e.relation).name},
                   {"direction", DirectionName(e.direction)},
                   {"neighbor", ValueToJson(v)}};
      if (v.is_entity()) {
        auto names = c.aliases->AliasesOf(v.text);
        if (!names.empty()) item["name"] = names.front();
      }
      edges.push_back(std::move(item));
    }
    return {200,
            {{"entity", entity},
             {"aliases", c.aliases->AliasesOf(entity)},
             {"direction", DirectionName(dir)},
             {"edges", edges}}};
  });
}

ApiResponse Service::ValidateLf(const std::string &body) {
  return Guard([&]() -> ApiResponse {
    json req = ParseObject(body);
    std::string sparql = RequireString(req, "sparql");
    LogicalForm lf;
    try {
      lf = ParseLogicalForm(sparql);
      ValidateLogicalForm(lf);
    } catch (const ParseError &e) {
      return {200, {{"ok", false}, {"error", e.what()}, {"position", e.position()}}};
    } catch (const Error &e) {
      return {200, {{"ok", false}, {"error", e.what()}}};
    }
    const KnowledgeBase &kb = *pipeline_.components().kb;
    json unknown_relations = json::array(), unknown_entities = json::array();
    for (const auto &r : RelationsOf(lf)) {
      if (!kb.FindRelation(r)) unknown_relations.push_back(r);
    }
    for (const auto &a : AnchorsOf(lf)) {
      if (!kb.FindEntity(a)) unknown_entities.push_back(a);
    }
    return {200,
            {{"ok", true},
             {"sparql", PrintLogicalForm(lf)},
             {"skeleton", SkeletonOf(lf).key},
             {"relations", RelationsOf(lf)},
             {"anchors", AnchorsOf(lf)},
             {"unknown_relations", unknown_relations},
             {"unknown_entities", unknown_entities}}};
  });
}

ApiResponse Service::Meta() {
  return Guard([&]() -> ApiResponse {
    const Components &c = pipeline_.components();
    size_t cases = 0, injected = 0;
    {
      std::shared_lock lock(mu_);
      cases = memory_.size();
      for (const auto &item : memory_.cases()) {
        injected += item->provenance.kind == Provenance::Kind::kInjected;
      }
    }
    return {200,
            {{"versions", Versions()},
             {"counts",
              {{"cases", cases},
               {"injected_cases", injected},
               {"kb_triples", c.kb->num_triples()},
               {"kb_entities", c.kb->num_entities()},
               {"kb_relations", c.kb->num_relations()},
               {"aliases", c.aliases->size()}}},
             {"config", FlagsToJson(config_.defaults)},
             {"info", config_.info},
             {"requests",
              {{"queries", queries_.load()},
               {"cases_added", cases_added_.load()},
               {"cases_removed", cases_removed_.load()},
               {"conflicts", conflicts_.load()}}}}};
  });
}

void Service::SnapshotMemory(std::ostream &out) const {
  std::shared_lock lock(mu_);
  memory_.Snapshot(out);
}

void Service::Register(httplib::Server &server) {
  server.Post("/query", [this](const httplib::Request &req, httplib::Response &res) {
    Send(res, Query(req.body));
  });
  server.Post("/cases", [this](const httplib::Request &req, httplib::Response &res) {
    Send(res, AddCase(req.body));
  });
  server.Delete(R"(/cases/(.+))", [this](const httplib::Request &req, httplib::Response &res) {
    Send(res, RemoveCase(req.matches[1]));
  });
  server.Get("/cases", [this](const httplib::Request &req, httplib::Response &res) {
    Send(res, ListCases(Param(req, "query"), Param(req, "k"), Param(req, "provenance"),
                        Param(req, "offset"), Param(req, "limit")));
  });
  server.Get(R"(/kb/neighborhood/(.+))",
             [this](const httplib::Request &req, httplib::Response &res) {
               Send(res, Neighborhood(req.matches[1], Param(req, "direction")));
             });
  server.Post("/lf/validate", [this](const httplib::Request &req, httplib::Response &res) {
    Send(res, ValidateLf(req.body));
  });
  server.Get("/meta", [this](const httplib::Request &, httplib::Response &res) { Send(res, Meta()); });
  server.Options(R"(.*)", [](const httplib::Request &, httplib::Response &res) {
    res.status = 204;
  });
  server.set_post_routing_handler([this](const httplib::Request &, httplib::Response &res) {
    res.set_header("Access-Control-Allow-Origin", "*");
    res.set_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.set_header("X-Casebase-Versions", Versions().dump());
  });
  server.set_error_handler([](const httplib::Request &req, httplib::Response &res) {
    if (!res.body.empty()) return;
    if (res.status == 404) {
      Send(res, ErrorResponse(404, "not_found", "no route for " + req.method + " " + req.path));
    }
  });
  server.set_exception_handler(
      [](const httplib::Request &, httplib::Response &res, std::exception_ptr ep) {
        std::string message = "internal error";
        try {
          std::rethrow_exception(ep);
        } catch (const std::exception &e) {
          message = e.what();
        } catch (...) {
        }
        Send(res, ErrorResponse(500, "internal", message));
      });
}

}  // namespace casebase
