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

#include <gtest/gtest.h>

#include <sstream>
#include <thread>

#include "casebase/json_io.h"
#include "httplib.h"

namespace casebase {
namespace {

using nlohmann::json;

constexpr char kHeld[] = "finance.currency.currency_code";

class ServiceTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    world_ = new World(GenerateWorld(DefaultWorldConfig(3, 400)));
    SplitSpec split;
    split.n_train = 400;
    split.n_valid = 10;
    split.n_test = 10;
    data_ = new Dataset(GenerateDataset(*world_, split, 5));
  }
  static void TearDownTestSuite() {
    delete data_;
    delete world_;
  }

  void SetUp() override {
    encoder_ = std::make_shared<const Encoder>();
    std::vector<DatasetExample> train;
    for (const auto &ex : data_->train) {
      if (!RelationsOf(ex.lf).count(kHeld)) train.push_back(ex);
    }
    Pipeline pipeline({std::make_shared<const KnowledgeBase>(world_->incomplete),
                       std::make_shared<const AliasTable>(world_->aliases), encoder_, nullptr});
    ServiceConfig config;
    config.defaults.revise = ReviseMode::kOff;
    config.write_timeout = std::chrono::milliseconds(5000);
    service_ = std::make_unique<Service>(
        std::move(pipeline), CaseMemory::Build(CasesFromExamples(train), *encoder_), config);
    service_->Register(server_);
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
  }

  void TearDown() override {
    server_.stop();
    thread_.join();
  }

  std::pair<int, json> Post(const std::string &path, const std::string &body) {
    auto res = client_->Post(path, body, "application/json");
    EXPECT_TRUE(res) << path;
    return {res->status, json::parse(res->body)};
  }
  std::pair<int, json> Get(const std::string &path) {
    auto res = client_->Get(path);
    EXPECT_TRUE(res) << path;
    return {res->status, json::parse(res->body)};
  }
  std::pair<int, json> Delete(const std::string &path) {
    auto res = client_->Delete(path);
    EXPECT_TRUE(res) << path;
    return {res->status, json::parse(res->body)};
  }
  size_t CaseCount() { return Get("/meta").second["counts"]["cases"].get<size_t>(); }

  static void ExpectEnvelope(const json &body) {
    EXPECT_TRUE(body.contains("code"));
    EXPECT_TRUE(body.contains("message"));
    EXPECT_TRUE(body.contains("detail"));
  }

  static World *world_;
  static Dataset *data_;
  std::shared_ptr<const Encoder> encoder_;
  std::unique_ptr<Service> service_;
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::unique_ptr<httplib::Client> client_;
};

World *ServiceTest::world_ = nullptr;
Dataset *ServiceTest::data_ = nullptr;

TEST_F(ServiceTest, QueryCoveredQuestion) {
  const DatasetExample *ex = nullptr;
  for (const auto &e : data_->train) {
    if (e.form == QuestionForm::kOneHop && !RelationsOf(e.lf).count(kHeld) &&
        Execute(e.lf, world_->incomplete) == e.answers) {
      ex = &e;
      break;
    }
  }
  ASSERT_NE(ex, nullptr);
  auto [status, body] = Post("/query", json{{"question", ex->question}, {"k", 5}}.dump());
  ASSERT_EQ(status, 200) << body.dump();
  EXPECT_EQ(body["retrieved"].size(), 5u);
  EXPECT_EQ(body["retrieved"][0]["id"], ex->id);
  EXPECT_EQ(AnswersFromJson(body["answers"]), ex->answers);
  EXPECT_FALSE(body["candidates"].empty());
  EXPECT_TRUE(body["candidates"][0].contains("support"));
  EXPECT_TRUE(body.contains("revision"));
  EXPECT_TRUE(body["versions"].contains("encoder"));
}

TEST_F(ServiceTest, QueryRejectsBadRequests) {
  auto [s1, b1] = Post("/query", "{not json");
  EXPECT_EQ(s1, 400);
  ExpectEnvelope(b1);
  EXPECT_EQ(b1["code"], "malformed_json");
  auto [s2, b2] = Post("/query", json{{"question", "who?"}, {"k", -1}}.dump());
  EXPECT_EQ(s2, 400);
  ExpectEnvelope(b2);
  auto [s3, b3] = Post("/query", json{{"question", "who?"}, {"revise", "transe"}}.dump());
  EXPECT_EQ(s3, 400);  // no embeddings loaded
  ExpectEnvelope(b3);
  auto [s4, b4] = Get("/nowhere");
  EXPECT_EQ(s4, 404);
  ExpectEnvelope(b4);
}

TEST_F(ServiceTest, InjectionFixesFailingQuestion) {
  auto simple = GenerateSimpleCases(*world_, kHeld, 2, 9, data_->train);
  ASSERT_EQ(simple.size(), 2u);
  const DatasetExample &fix = simple[0];
  const DatasetExample &ask = simple[1];
  json query = {{"question", ask.question}, {"k", 5}};
  auto [s0, before] = Post("/query", query.dump());
  ASSERT_EQ(s0, 200);
  EXPECT_NE(AnswersFromJson(before["answers"]), ask.answers);

  size_t count = CaseCount();
  auto [s1, added] = Post("/cases", json{{"question", fix.question},
                                         {"sparql", PrintLogicalForm(fix.lf)}}
                                        .dump());
  ASSERT_EQ(s1, 200) << added.dump();
  std::string id = added["id"];
  EXPECT_EQ(id.rfind("inj-", 0), 0u);
  ASSERT_EQ(added["mentions"].size(), 1u);  // linked from the question
  EXPECT_EQ(CaseCount(), count + 1);

  auto [s2, after] = Post("/query", query.dump());
  ASSERT_EQ(s2, 200);
  bool retrieved = false;
  for (const auto &c : after["retrieved"]) {
    if (c["id"] == id) {
      retrieved = true;
      EXPECT_EQ(c["provenance"]["kind"], "injected");
    }
  }
  EXPECT_TRUE(retrieved);
  EXPECT_EQ(AnswersFromJson(after["answers"]), ask.answers);

  auto [s3, removed] = Delete("/cases/" + id);
  EXPECT_EQ(s3, 200);
  EXPECT_EQ(removed["removed"], true);
  EXPECT_EQ(CaseCount(), count);
  auto [s4, missing] = Delete("/cases/" + id);
  EXPECT_EQ(s4, 404);
  ExpectEnvelope(missing);
}

TEST_F(ServiceTest, InvalidCaseIsRejectedWithParserPosition) {
  size_t count = CaseCount();
  auto [status, body] = Post(
      "/cases", json{{"question", "what is it?"}, {"sparql", "SELECT ?x WHERE { ?x ns:a.b }"}}
                    .dump());
  EXPECT_EQ(status, 422);
  ExpectEnvelope(body);
  EXPECT_EQ(body["code"], "invalid_lf");
  EXPECT_TRUE(body["detail"].contains("position"));
  EXPECT_NE(body["message"].get<std::string>().find("offset"), std::string::npos);
  EXPECT_EQ(CaseCount(), count);

  auto [s2, b2] = Post("/lf/validate", json{{"sparql", "SELECT ?x WHERE { ?x ns:a.b }"}}.dump());
  EXPECT_EQ(s2, 200);
  EXPECT_EQ(b2["ok"], false);
  EXPECT_TRUE(b2.contains("position"));
  auto [s3, b3] = Post(
      "/lf/validate",
      json{{"sparql", "SELECT ?x WHERE { ns:m.none ns:people.person.spouse_s ?x . }"}}.dump());
  EXPECT_EQ(s3, 200);
  EXPECT_EQ(b3["ok"], true);
  EXPECT_EQ(b3["unknown_entities"], json::array({"m.none"}));
  EXPECT_TRUE(b3["unknown_relations"].empty());
}

TEST_F(ServiceTest, StaleRevisionConflicts) {
  uint64_t revision = Get("/meta").second["versions"]["memory_revision"].get<uint64_t>();
  const auto &ex = data_->train[0];
  json c = {{"question", ex.question + " again"},
            {"sparql", PrintLogicalForm(ex.lf)},
            {"expected_revision", revision}};
  auto [s1, b1] = Post("/cases", c.dump());
  EXPECT_EQ(s1, 200) << b1.dump();
  auto [s2, b2] = Post("/cases", c.dump());
  EXPECT_EQ(s2, 409);
  ExpectEnvelope(b2);
  EXPECT_EQ(b2["detail"]["memory_revision"].get<uint64_t>(), revision + 1);
}

TEST_F(ServiceTest, ReadsAreRepeatable) {
  std::string probe = "/cases?query=" + httplib::detail::encode_query_param(
                                            data_->train[3].question) + "&k=3";
  auto [s1, b1] = Get(probe);
  ASSERT_EQ(s1, 200);
  ASSERT_EQ(b1["cases"].size(), 3u);
  EXPECT_GE(b1["cases"][0]["similarity"].get<double>(), b1["cases"][1]["similarity"].get<double>());
  EXPECT_EQ(Get(probe).second, b1);
  EXPECT_EQ(Get("/meta").second, Get("/meta").second);
  auto [s2, page] = Get("/cases?provenance=train&offset=2&limit=4");
  ASSERT_EQ(s2, 200);
  EXPECT_EQ(page["cases"].size(), 4u);
  EXPECT_EQ(Get("/cases?provenance=injected").second["total"], 0);
  EXPECT_EQ(Get("/cases?provenance=elsewhere").first, 400);
  EXPECT_EQ(Get("/cases?query=x&k=zero").first, 400);
}

TEST_F(ServiceTest, Neighborhood) {
  const std::string entity = AnchorsOf(data_->train[0].lf).front();
  auto [status, body] = Get("/kb/neighborhood/" + entity + "?direction=out");
  ASSERT_EQ(status, 200);
  auto oracle = world_->incomplete.Neighborhood(entity, Direction::kOut);
  ASSERT_EQ(body["edges"].size(), oracle.size());
  for (size_t i = 0; i < oracle.size(); ++i) {
    EXPECT_EQ(body["edges"][i]["relation"], world_->incomplete.Relation(oracle[i].relation).name);
    EXPECT_EQ(body["edges"][i]["direction"], "out");
  }
  EXPECT_GE(Get("/kb/neighborhood/" + entity).second["edges"].size(), oracle.size());
  EXPECT_EQ(Get("/kb/neighborhood/" + entity + "?direction=sideways").first, 400);
  auto [s404, b404] = Get("/kb/neighborhood/m.nobody");
  EXPECT_EQ(s404, 404);
  ExpectEnvelope(b404);
}

TEST_F(ServiceTest, ConcurrentWritesNeverCorruptMemory) {
  size_t before = CaseCount();
  const auto &ex = data_->train[1];
  std::atomic<int> ok{0}, conflict{0}, other{0};
  std::vector<std::thread> writers;
  for (int t = 0; t < 6; ++t) {
    writers.emplace_back([&, t] {
      httplib::Client client("127.0.0.1", port_);
      for (int i = 0; i < 8; ++i) {
        json c = {{"question", ex.question + " variant " + std::to_string(t * 100 + i)},
                  {"sparql", PrintLogicalForm(ex.lf)}};
        auto res = client.Post("/cases", c.dump(), "application/json");
        if (res && res->status == 200) {
          ++ok;
        } else if (res && res->status == 409) {
          ++conflict;
        } else {
          ++other;
        }
        client.Get("/cases?query=variant&k=2");
      }
    });
  }
  for (auto &w : writers) w.join();
  EXPECT_EQ(other.load(), 0);
  EXPECT_EQ(ok + conflict, 48);
  EXPECT_EQ(CaseCount(), before + ok);

  std::stringstream snapshot;
  service_->SnapshotMemory(snapshot);
  CaseMemory loaded = CaseMemory::Load(snapshot, encoder_.get());
  std::stringstream again;
  loaded.Snapshot(again);
  EXPECT_EQ(again.str(), snapshot.str());
  EXPECT_EQ(loaded.size(), before + ok);
}

}  // namespace
}  // namespace casebase
