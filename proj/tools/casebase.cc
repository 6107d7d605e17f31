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


// Command-line entry point: world generation, training, evaluation,
// experiments and the HTTP service.

#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "casebase/error.h"
#include "casebase/experiments.h"
#include "casebase/pipeline.h"
#include "casebase/service.h"
#include "casebase/worldgen.h"
#include "httplib.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace casebase {
namespace {

struct PipelineOptions {
  std::string world;
  std::string data;
  std::string encoder;
  std::string transe;
  std::string memory;
  std::string config;
  std::optional<size_t> k;
  std::optional<int> beam;
  std::optional<std::string> revise;
  std::optional<std::string> policy;
  bool global_vocab = false;
  bool untrained = false;
  uint64_t seed = 1;
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::string out;
};

void AddPipelineOptions(CLI::App *cmd, PipelineOptions &o, bool need_data = true) {
  cmd->add_option("--world", o.world, "world directory written by worldgen")
      ->required()
      ->check(CLI::ExistingDirectory);
  auto *data = cmd->add_option("--data", o.data, "dataset directory")->check(CLI::ExistingDirectory);
  if (need_data) data->required();
  cmd->add_option("--encoder", o.encoder, "trained retriever (default: train on the train split)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--transe", o.transe, "TransE checkpoint (default: train when needed)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--memory", o.memory, "case memory snapshot (default: the train split)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--config", o.config, "pipeline flags JSON, e.g. configs/default.json")
      ->check(CLI::ExistingFile);
  cmd->add_option("--k", o.k, "number of retrieved cases");
  cmd->add_option("--beam", o.beam, "generator beam size");
  cmd->add_option("--revise", o.revise, "off, surface or transe")
      ->check(CLI::IsMember({"off", "surface", "transe"}));
  cmd->add_option("--policy", o.policy, "beam_order, top_only or after_beam")
      ->check(CLI::IsMember({"beam_order", "top_only", "after_beam"}));
  cmd->add_flag("--global-vocab", o.global_vocab, "let the generator use every KB relation");
  cmd->add_flag("--untrained", o.untrained, "use the untrained retriever");
  cmd->add_option("--seed", o.seed, "seed for training and sampling");
  cmd->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
}

void Log(const std::string &message) { std::cerr << "[casebase] " << message << '\n'; }

PipelineFlags ResolveFlags(const PipelineOptions &o) {
  PipelineFlags flags;
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    flags = FlagsFromJson(json::parse(in), flags);
  }
  if (o.k) flags.k = *o.k;
  if (o.beam) flags.generator.beam = *o.beam;
  if (o.revise) flags.revise = ParseReviseMode(*o.revise);
  if (o.policy) flags.policy = ParseRevisePolicy(*o.policy);
  if (o.global_vocab) flags.generator.use_global_vocab = true;
  ValidateGeneratorConfig(flags.generator);
  return flags;
}

std::shared_ptr<const Encoder> ResolveEncoder(const PipelineOptions &o, const Dataset *data) {
  if (!o.encoder.empty()) return std::make_shared<const Encoder>(Encoder::Load(o.encoder));
  Encoder encoder;
  if (o.untrained) return std::make_shared<const Encoder>(encoder);
  if (data == nullptr) {
    throw Error(ErrorCode::kInvalidArgument, "--encoder or --data is needed to get a retriever");
  }
  TrainConfig config;
  config.seed = o.seed;
  auto items = TrainItemsFromExamples(data->train);
  Log("training retriever on " + std::to_string(items.size()) + " train questions");
  TrainRetriever(encoder, items, config);
  return std::make_shared<const Encoder>(encoder);
}

std::shared_ptr<const TransE> ResolveTransE(const PipelineOptions &o, const World &world,
                                            bool needed) {
  if (!o.transe.empty()) return std::make_shared<const TransE>(TransE::Load(o.transe));
  if (!needed) return nullptr;
  TransEConfig config;
  config.seed = o.seed;
  Log("training TransE on the inference KB");
  return std::make_shared<const TransE>(TrainTransE(world.incomplete, config));
}

CaseMemory ResolveMemory(const PipelineOptions &o, const Dataset *data, const Encoder &encoder) {
  if (!o.memory.empty()) {
    std::ifstream in(o.memory, std::ios::binary);
    bool reencoded = false;
    CaseMemory memory = CaseMemory::Load(in, &encoder, &reencoded);
    if (reencoded) Log("memory snapshot re-encoded with the current retriever");
    return memory;
  }
  if (data == nullptr) throw Error(ErrorCode::kInvalidArgument, "--memory or --data is required");
  return CaseMemory::Build(CasesFromExamples(data->train), encoder);
}

void WriteOutputs(const std::string &out, const json &report,
                  const std::vector<std::string> &log) {
  if (out.empty()) {
    std::cout << report.dump(2) << '\n';
    return;
  }
  fs::create_directories(out);
  std::ofstream(fs::path(out) / "report.json") << report.dump(2) << '\n';
  std::ofstream lines(fs::path(out) / "predictions.jsonl");
  for (const auto &line : log) lines << line << '\n';
  Log("wrote " + (fs::path(out) / "report.json").string() + " and " +
      std::to_string(log.size()) + " prediction lines");
}

int RunWorldgen(uint64_t seed, int entities, double drop_rate, const std::string &split_kind,
                const std::vector<std::string> &heldout, int n_train, int n_valid, int n_test,
                const std::string &out) {
  WorldConfig config = DefaultWorldConfig(seed, entities);
  config.drop_edge_rate = drop_rate;
  World world = GenerateWorld(config);
  SaveWorld(world, out);
  SplitSpec split;
  split.kind = ParseSplitKind(split_kind);
  split.heldout_relations = {heldout.begin(), heldout.end()};
  split.n_train = n_train;
  split.n_valid = n_valid;
  split.n_test = n_test;
  Dataset data = GenerateDataset(world, split, seed);
  fs::path dir = fs::path(out) / split_kind;
  SaveDataset(data, dir);
  Log("world: " + std::to_string(world.full.num_triples()) + " triples (" +
      std::to_string(world.incomplete.num_triples()) + " at inference); dataset in " +
      dir.string());
  return 0;
}

int RunTrainRetriever(const std::string &data_dir, const std::string &out, int epochs,
                      double lr, uint64_t seed) {
  Dataset data = LoadDataset(data_dir);
  Encoder encoder;
  TrainConfig config;
  config.epochs = epochs;
  config.learning_rate = lr;
  config.seed = seed;
  auto start = std::chrono::steady_clock::now();
  TrainReport report = TrainRetriever(encoder, TrainItemsFromExamples(data.train), config);
  double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  encoder.Save(out);
  json j = {{"epoch_loss", report.epoch_loss}, {"steps", report.steps}, {"seconds", seconds}};
  std::ofstream(out + ".json") << j.dump(2) << '\n';
  Log("saved retriever to " + out);
  return 0;
}

int RunTrainTransE(const std::string &world_dir, const std::string &out, int epochs,
                   uint64_t seed) {
  World world = LoadWorld(world_dir);
  TransEConfig config;
  config.epochs = epochs;
  config.seed = seed;
  TransEReport report;
  TransE model = TrainTransE(world.incomplete, config, &report);
  model.Save(out);
  json j = {{"epoch_loss", report.epoch_loss}, {"triples", report.triples}};
  std::ofstream(out + ".json") << j.dump(2) << '\n';
  Log("saved TransE to " + out);
  return 0;
}

int RunEval(const PipelineOptions &o, const std::string &which) {
  World world = LoadWorld(o.world);
  Dataset data = LoadDataset(o.data);
  PipelineFlags flags = ResolveFlags(o);
  auto encoder = ResolveEncoder(o, &data);
  auto transe = ResolveTransE(o, world, flags.revise == ReviseMode::kTransE);
  CaseMemory memory = ResolveMemory(o, &data, *encoder);
  Pipeline pipeline({std::make_shared<const KnowledgeBase>(world.incomplete),
                     std::make_shared<const AliasTable>(world.aliases), encoder, transe});
  const auto &examples = which == "valid" ? data.valid : data.test;
  auto start = std::chrono::steady_clock::now();
  EvalReport r = Evaluate(pipeline, memory, examples, flags, o.threads);
  json report = MetricsToJson(r.metrics);
  report["split"] = which;
  report["recall_at_k"] = r.recall_at_k;
  report["errors"] = r.errors;
  report["revisions_attempted"] = r.revisions_attempted;
  report["structure_preserved"] = r.structure_preserved;
  report["flags"] = FlagsToJson(flags);
  report["seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  WriteOutputs(o.out, report, r.log);
  return 0;
}

int RunExperimentCommand(const PipelineOptions &o, const std::string &kind_name,
                         int cases_per_relation) {
  ExperimentKind kind = ParseExperimentKind(kind_name);
  World world = LoadWorld(o.world);
  Dataset data = LoadDataset(o.data);
  ExperimentInputs in;
  in.world = &world;
  in.dataset = &data;
  in.flags = ResolveFlags(o);
  in.encoder = ResolveEncoder(o, &data);
  bool needs_transe =
      kind == ExperimentKind::kReviseAblation || in.flags.revise == ReviseMode::kTransE;
  in.transe = ResolveTransE(o, world, needs_transe);
  in.threads = o.threads;
  in.cases_per_relation = cases_per_relation;
  in.seed = o.seed;
  ExperimentReport r = RunExperiment(kind, in);
  r.report["flags"] = FlagsToJson(in.flags);
  WriteOutputs(o.out, r.report, r.log);
  return 0;
}

httplib::Server *g_server = nullptr;

int RunServe(const PipelineOptions &o, const std::string &host, int port) {
  World world = LoadWorld(o.world);
  std::optional<Dataset> data;
  if (!o.data.empty()) data = LoadDataset(o.data);
  ServiceConfig config;
  config.defaults = ResolveFlags(o);
  auto encoder = ResolveEncoder(o, data ? &*data : nullptr);
  auto transe = ResolveTransE(o, world, config.defaults.revise == ReviseMode::kTransE);
  CaseMemory memory = ResolveMemory(o, data ? &*data : nullptr, *encoder);
  config.info = {{"world", o.world}, {"data", o.data}, {"memory", o.memory}};
  Service service(Pipeline({std::make_shared<const KnowledgeBase>(world.incomplete),
                            std::make_shared<const AliasTable>(world.aliases), encoder, transe}),
                  std::move(memory), config);
  httplib::Server server;
  service.Register(server);
  g_server = &server;
  std::signal(SIGINT, [](int) { g_server->stop(); });
  std::signal(SIGTERM, [](int) { g_server->stop(); });
  Log("listening on http://" + host + ":" + std::to_string(port));
  if (!server.listen(host, port)) {
    throw Error(ErrorCode::kUnavailable, "cannot listen on " + host + ":" + std::to_string(port));
  }
  if (!o.out.empty()) {
    fs::create_directories(o.out);
    std::ofstream snapshot(fs::path(o.out) / "memory.snapshot", std::ios::binary);
    service.SnapshotMemory(snapshot);
    Log("saved memory snapshot to " + (fs::path(o.out) / "memory.snapshot").string());
  }
  return 0;
}

int Main(int argc, char **argv) {
  CLI::App app{"Case-based question answering over synthetic knowledge bases"};
  app.require_subcommand(1);

  uint64_t seed = 17;
  int entities = 1000, n_train = 2000, n_valid = 300, n_test = 600;
  double drop_rate = 0.3;
  std::string split_kind = "standard", out;
  std::vector<std::string> heldout;
  auto *worldgen = app.add_subcommand("worldgen", "generate a world and one dataset split");
  worldgen->add_option("--seed", seed);
  worldgen->add_option("--entities", entities)->check(CLI::PositiveNumber);
  worldgen->add_option("--drop-rate", drop_rate)->check(CLI::Range(0.0, 0.99));
  worldgen->add_option("--split", split_kind)
      ->check(CLI::IsMember({"standard", "heldout_relation", "novel_combination", "mcd_like"}));
  worldgen->add_option("--heldout", heldout, "held-out relation (repeatable)");
  worldgen->add_option("--n-train", n_train);
  worldgen->add_option("--n-valid", n_valid);
  worldgen->add_option("--n-test", n_test);
  worldgen->add_option("--out", out, "output directory")->required();

  std::string data_dir, model_out;
  int epochs = 0;
  double lr = 0;
  uint64_t train_seed = 7;
  auto *train_retriever = app.add_subcommand("train-retriever", "train the case retriever");
  train_retriever->add_option("--data", data_dir)->required()->check(CLI::ExistingDirectory);
  train_retriever->add_option("--out", model_out)->required();
  train_retriever->add_option("--epochs", epochs)->default_val(TrainConfig{}.epochs);
  train_retriever->add_option("--lr", lr)->default_val(TrainConfig{}.learning_rate);
  train_retriever->add_option("--seed", train_seed)->default_val(TrainConfig{}.seed);

  std::string world_dir;
  int transe_epochs = 0;
  uint64_t transe_seed = 1;
  auto *train_transe = app.add_subcommand("train-transe", "train TransE on the inference KB");
  train_transe->add_option("--world", world_dir)->required()->check(CLI::ExistingDirectory);
  train_transe->add_option("--out", model_out)->required();
  train_transe->add_option("--epochs", transe_epochs)->default_val(TransEConfig{}.epochs);
  train_transe->add_option("--seed", transe_seed)->default_val(TransEConfig{}.seed);

  PipelineOptions eval_opts;
  std::string which = "test";
  auto *eval = app.add_subcommand("eval", "evaluate the pipeline on a split");
  AddPipelineOptions(eval, eval_opts);
  eval->add_option("--split", which)->check(CLI::IsMember({"test", "valid"}));
  eval->add_option("--out", eval_opts.out, "directory for report.json and predictions.jsonl");

  PipelineOptions exp_opts;
  std::string kind;
  int cases_per_relation = 5;
  auto *experiment = app.add_subcommand("experiment", "run an experiment harness");
  experiment->add_option("kind", kind)
      ->required()
      ->check(CLI::IsMember(
          {"heldout_injection", "k_ablation", "novel_combination", "revise_ablation"}));
  AddPipelineOptions(experiment, exp_opts);
  experiment->add_option("--cases-per-relation", cases_per_relation)
      ->check(CLI::PositiveNumber);
  experiment->add_option("--out", exp_opts.out, "directory for report.json and predictions.jsonl");

  PipelineOptions serve_opts;
  std::string host = "127.0.0.1";
  int port = 8080;
  auto *serve = app.add_subcommand("serve", "serve the JSON API");
  AddPipelineOptions(serve, serve_opts, /*need_data=*/false);
  serve->add_option("--host", host);
  serve->add_option("--port", port)->check(CLI::Range(1, 65535));
  serve->add_option("--out", serve_opts.out, "directory for the memory snapshot on shutdown");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*worldgen) {
      return RunWorldgen(seed, entities, drop_rate, split_kind, heldout, n_train, n_valid,
                         n_test, out);
    }
    if (*train_retriever) return RunTrainRetriever(data_dir, model_out, epochs, lr, train_seed);
    if (*train_transe) return RunTrainTransE(world_dir, model_out, transe_epochs, transe_seed);
    if (*eval) return RunEval(eval_opts, which);
    if (*experiment) return RunExperimentCommand(exp_opts, kind, cases_per_relation);
    if (*serve) return RunServe(serve_opts, host, port);
  } catch (const Error &e) {
    std::cerr << "error (" << ErrorCodeName(e.code()) << "): " << e.what() << '\n';
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace
}  // namespace casebase

int main(int argc, char **argv) { return casebase::Main(argc, argv); }
