// webnav command line: corpus to graph, datasets, embeddings, training,
// evaluation and the trial service.

#include <atomic>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "webnav/agent.hpp"
#include "webnav/corpus.hpp"
#include "webnav/dataset.hpp"
#include "webnav/embeddings.hpp"
#include "webnav/eval.hpp"
#include "webnav/graph.hpp"
#include "webnav/http_server.hpp"
#include "webnav/log.hpp"
#include "webnav/search.hpp"
#include "webnav/service.hpp"
#include "webnav/synthetic.hpp"

namespace {

using namespace webnav;
using nlohmann::json;
namespace fs = std::filesystem;

struct Globals {
  std::uint64_t seed = 0;
  int threads = 1;
  bool quiet = false;
};

void WriteText(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw RuntimeFailure("cannot write " + path.string());
}

std::string ReadText(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string Number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

// ---- compile ----

struct CompileArgs {
  std::string corpus, start, out, stats;
  std::vector<std::string> sections, prefixes;
};

void RunCompile(const CompileArgs& a) {
  CompileConfig config;
  if (!a.sections.empty()) config.excluded_sections = a.sections;
  if (!a.prefixes.empty()) config.excluded_title_prefixes = a.prefixes;
  const auto corpus = ReadCorpusFile(a.corpus);
  const CompileResult result = CompileGraph(corpus, a.start, config);
  result.graph.Save(a.out);
  const fs::path stats = a.stats.empty() ? fs::path(a.out).parent_path() / "stats.json"
                                         : fs::path(a.stats);
  WriteText(stats, GraphStatsJson(ComputeGraphStats(result.graph), result.dropped_links) + "\n");
  Info("compiled " + std::to_string(result.graph.NodeCount()) + " nodes, " +
       std::to_string(result.graph.EdgeCount()) + " edges, " +
       std::to_string(result.dropped_links) + " dropped links, " +
       std::to_string(result.excluded_documents) + " excluded documents");
}

// ---- synth ----

struct SynthArgs {
  SyntheticConfig config;
  std::string out, qa;
  std::size_t qa_count = 60;
  std::size_t qa_unresolvable = 0;
};

void RunSynth(const SynthArgs& a, const Globals& g) {
  SyntheticConfig config = a.config;
  config.seed = g.seed;
  const auto docs = GenerateSyntheticCorpus(config);
  std::string lines;
  for (const auto& d : docs) lines += json{{"title", d.title}, {"body", d.body}}.dump() + "\n";
  WriteText(a.out, lines);
  Info("wrote " + std::to_string(docs.size()) + " documents; start title '" +
       kSyntheticStartTitle + "'");
  if (!a.qa.empty()) {
    const auto compiled = CompileGraph(docs, kSyntheticStartTitle, CompileConfig{});
    const auto pairs = GenerateSyntheticQa(compiled.graph, a.qa_count, a.qa_unresolvable, g.seed);
    std::string qa;
    for (const auto& p : pairs) {
      qa += json{{"question", p.question}, {"answer", p.answer}}.dump() + "\n";
    }
    WriteText(a.qa, qa);
  }
}

// ---- embed / phi ----

struct EmbedArgs {
  std::string corpus, out;
  CbowConfig cbow;
};

void RunEmbed(const EmbedArgs& a, const Globals& g) {
  const auto corpus = ReadCorpusFile(a.corpus);
  const CompileConfig defaults;
  std::vector<std::string> texts;
  for (const auto& doc : corpus) {
    const auto parsed = ParseDocument(doc, defaults.excluded_sections,
                                      defaults.excluded_title_prefixes);
    if (const auto* p = std::get_if<ParsedDocument>(&parsed)) texts.push_back(p->clean_text);
  }
  CbowConfig config = a.cbow;
  config.seed = g.seed;
  const WordVectors vectors = TrainCbow(texts, config);
  vectors.Save(a.out);
  Info("trained " + std::to_string(vectors.Size()) + " vectors of dimension " +
       std::to_string(vectors.Dim()));
}

struct PhiArgs {
  std::string graph, vectors, out;
};

void RunPhi(const PhiArgs& a) {
  const NavGraph graph = NavGraph::Load(a.graph);
  const WordVectors vectors = WordVectors::Load(a.vectors);
  PhiTable::Compute(graph, vectors).Save(a.out);
}

// ---- gen / import-qa ----

struct GenArgs {
  std::string graph, out;
  GenerationConfig config;
};

void RunGen(const GenArgs& a, const Globals& g) {
  const NavGraph graph = NavGraph::Load(a.graph);
  GenerationConfig config = a.config;
  config.seed = g.seed;
  const DatasetSplits splits = GenerateDataset(graph, config);
  WriteDataset(a.out, splits);
  Info("generated " + std::to_string(splits.train.size()) + "/" +
       std::to_string(splits.valid.size()) + "/" + std::to_string(splits.test.size()) +
       " examples");
}

struct ImportArgs {
  std::string graph, pairs, out;
  int max_hops = 16;
  std::optional<std::size_t> train, valid, test;
};

void RunImport(const ImportArgs& a, const Globals& g) {
  const NavGraph graph = NavGraph::Load(a.graph);
  const auto pairs = ReadQaPairs(a.pairs);
  std::optional<SplitCounts> counts;
  if (a.train || a.valid || a.test) {
    if (!(a.train && a.valid && a.test)) {
      throw CLI::ValidationError("import-qa", "--train, --valid and --test go together");
    }
    counts = SplitCounts{*a.train, *a.valid, *a.test};
  }
  DatasetSplits splits = ImportQaPairs(graph, pairs, counts, g.seed);
  splits.meta.max_hops = a.max_hops;
  WriteDataset(a.out, splits);
  const ImportStats& s = *splits.meta.import_stats;
  Info("imported " + std::to_string(splits.train.size()) + "/" +
       std::to_string(splits.valid.size()) + "/" + std::to_string(splits.test.size()) +
       " of " + std::to_string(s.pairs) + " pairs (" + std::to_string(s.unresolved) +
       " unresolved, " + std::to_string(s.unreachable) + " unreachable, " +
       std::to_string(s.conflicts) + " conflicts, " + std::to_string(s.overflow) +
       " overflow)");
}

// ---- shared model inputs ----

struct WorldFiles {
  std::string graph, phi, vectors;
};

struct LoadedWorld {
  NavGraph graph;
  WordVectors words;
  PhiTable phi;
  World View() const { return World{graph, phi, words}; }
};

LoadedWorld LoadWorld(const WorldFiles& files) {
  LoadedWorld w;
  w.graph = NavGraph::Load(files.graph);
  w.words = WordVectors::Load(files.vectors);
  w.phi = PhiTable::Load(files.phi, w.graph.NodeCount());
  if (w.phi.Dim() != w.words.Dim()) {
    throw DataError("phi dimension " + std::to_string(w.phi.Dim()) +
                    " does not match vector dimension " + std::to_string(w.words.Dim()));
  }
  return w;
}

void AddWorldOptions(CLI::App* cmd, WorldFiles& files) {
  cmd->add_option("--graph", files.graph, "compiled graph")->required();
  cmd->add_option("--phi", files.phi, "content vectors from `phi`")->required();
  cmd->add_option("--vectors", files.vectors, "word vectors")->required();
}

struct AgentArgs {
  std::string core = "rec";
  int layers = 1;
  int units = 64;
  std::string query = "bow";
  int window = 0;
};

void AddAgentOptions(CLI::App* cmd, AgentArgs& a) {
  cmd->add_option("--core", a.core, "ff or rec")->capture_default_str();
  cmd->add_option("--layers", a.layers, "core layers")->capture_default_str();
  cmd->add_option("--units", a.units, "hidden units H")->capture_default_str();
  cmd->add_option("--query", a.query, "bow or att")->capture_default_str();
  cmd->add_option("--u", a.window, "attention context window (even)")->capture_default_str();
}

AgentConfig MakeAgentConfig(const AgentArgs& a, int dim, std::uint64_t seed) {
  AgentConfig config;
  config.core = ParseCoreType(a.core);
  config.layers = a.layers;
  config.units = a.units;
  config.dim = dim;
  config.query = ParseQueryMode(a.query);
  config.window = a.window;
  config.seed = seed;
  config.Validate();
  return config;
}

// ---- train ----

struct TrainArgs {
  WorldFiles world;
  AgentArgs agent;
  std::string data, split = "train", out, init, log;
  TrainConfig train;
};

void RunTrain(const TrainArgs& a, const Globals& g) {
  const LoadedWorld w = LoadWorld(a.world);
  const DatasetSplits data = ReadDataset(a.data);
  RequireGraphChecksum(w.graph, data.meta.graph_checksum, "dataset " + a.data);
  Agent agent;
  if (!a.init.empty()) {
    agent = LoadCheckpoint(a.init);
    RequireGraphChecksum(w.graph, agent.graph_checksum, "checkpoint " + a.init);
    if (agent.config.dim != w.words.Dim()) {
      throw DataError("checkpoint dimension does not match the word vectors");
    }
  } else {
    agent.config = MakeAgentConfig(a.agent, w.words.Dim(), g.seed);
    agent.params = AgentParameters::Initialize(agent.config);
    agent.graph_checksum = w.graph.Checksum();
  }
  TrainConfig config = a.train;
  config.seed = g.seed;
  const auto& examples = data.Split(a.split);
  const TrainLog log = Train(agent, w.View(), examples, config, [&](int epoch, double cost) {
    if (!g.quiet) std::cout << "epoch " << epoch << " cost " << Number(cost) << std::endl;
  });
  SaveCheckpoint(a.out, agent);
  const fs::path log_path = a.log.empty() ? fs::path(a.out + ".costs.json") : fs::path(a.log);
  json costs = json::array();
  for (double c : log.epoch_cost) costs.push_back(c);
  WriteText(log_path, json{{"epoch_cost", costs}}.dump() + "\n");
}

// ---- eval ----

struct EvalArgs {
  std::string graph, phi, vectors, model, data, split = "test", metric = "reward",
      system = "agent", out;
  int k = 1;
  int width = 4;
  int max_hops = 0;
  bool wall_time = false;
};

void RunEval(const EvalArgs& a, const Globals& g) {
  const DatasetSplits data = ReadDataset(a.data);
  const auto& examples = data.Split(a.split);
  EvalSettings settings;
  settings.dataset_id = fs::path(a.data).filename().string() + ":" + a.split;
  settings.max_hops = a.max_hops > 0 ? a.max_hops
                                     : (data.meta.max_hops > 0 ? data.meta.max_hops : 8);
  settings.query_size = data.meta.query_size;
  settings.width = a.width;
  settings.threads = g.threads;
  if (a.metric != "reward" && a.metric != "recall") {
    throw CLI::ValidationError("--metric", "must be reward or recall");
  }
  if (a.system != "agent" && a.system != "search") {
    throw CLI::ValidationError("--system", "must be agent or search");
  }

  EvalReport report;
  if (a.system == "search") {
    if (a.metric != "recall") throw CLI::ValidationError("--metric", "search supports recall only");
    const NavGraph graph = NavGraph::Load(a.graph);
    RequireGraphChecksum(graph, data.meta.graph_checksum, "dataset " + a.data);
    settings.model_id = "simplesearch";
    const InvertedIndex index(graph);
    report = SearchRecallAtK(index, examples, a.k, settings);
  } else {
    if (a.phi.empty() || a.vectors.empty() || a.model.empty()) {
      throw CLI::ValidationError("eval", "agent evaluation needs --phi, --vectors and --model");
    }
    const LoadedWorld w = LoadWorld({a.graph, a.phi, a.vectors});
    RequireGraphChecksum(w.graph, data.meta.graph_checksum, "dataset " + a.data);
    const Agent agent = LoadCheckpoint(a.model);
    RequireGraphChecksum(w.graph, agent.graph_checksum, "model " + a.model);
    settings.model_id = fs::path(a.model).filename().string();
    const World world = w.View();
    const AgentNavigator navigator(agent, world);
    report = a.metric == "reward" ? AverageReward(navigator, w.graph, examples, settings)
                                  : AgentRecallAtK(navigator, examples, a.k, settings);
  }
  const std::string text = ReportToJson(report, a.wall_time);
  if (a.out.empty()) {
    std::cout << text << "\n";
  } else {
    WriteText(a.out, text + "\n");
    Info(report.metric + " = " + Number(report.value));
  }
}

// ---- search ----

struct SearchArgs {
  std::string graph, query;
  std::size_t k = 40;
};

void RunSearch(const SearchArgs& a) {
  const NavGraph graph = NavGraph::Load(a.graph);
  const InvertedIndex index(graph);
  const auto hits = Search(index, a.query, a.k);
  for (std::size_t i = 0; i < hits.size(); ++i) {
    std::cout << i + 1 << "\t" << hits[i].node << "\t" << Number(hits[i].score) << "\t"
              << graph.GetNode(hits[i].node).title << "\n";
  }
}

// ---- sweep ----

struct SweepArgs {
  WorldFiles world;
  AgentArgs agent;
  std::vector<int> max_hops{4, 8};
  std::vector<int> query_sizes{1, 2, 4};
  std::size_t train = 200, valid = 20, test = 50;
  TrainConfig train_config;
  int width = 4;
  std::string out;
};

void RunSweep(const SweepArgs& a, const Globals& g) {
  const LoadedWorld w = LoadWorld(a.world);
  SweepConfig config;
  config.max_hops = a.max_hops;
  config.query_sizes = a.query_sizes;
  config.counts = {a.train, a.valid, a.test};
  config.seed = g.seed;
  config.agent = MakeAgentConfig(a.agent, w.words.Dim(), g.seed);
  config.train = a.train_config;
  config.train.seed = g.seed;
  config.width = a.width;
  config.threads = g.threads;
  const auto cells = DifficultySweep(w.graph, w.phi, w.words, config);
  const std::string text = SweepToJson(cells, config);
  if (a.out.empty()) {
    std::cout << text << "\n";
  } else {
    WriteText(a.out, text + "\n");
  }
  if (!g.quiet) std::cerr << RenderReport(text);
}

// ---- serve ----

struct ServeArgs {
  std::string graph, data, store, host = "127.0.0.1", ui;
  int port = 8080;
};

std::atomic<HttpService*> g_service{nullptr};

extern "C" void HandleSignal(int) {
  if (HttpService* service = g_service.load()) service->Stop();
}

void RunServe(const ServeArgs& a, const Globals& g) {
  const NavGraph graph = NavGraph::Load(a.graph);
  auto datasets = LoadDatasetDirectory(a.data, graph);
  if (datasets.empty()) Warn("no datasets under " + a.data + " match this graph");
  SessionOptions options;
  options.seed = g.seed;
  SessionManager sessions(graph, std::move(datasets), a.store, options);
  HttpOptions http;
  http.host = a.host;
  http.port = a.port;
  if (!a.ui.empty()) http.static_dir = a.ui;
  HttpService service(sessions, http);
  g_service = &service;
  std::signal(SIGINT, HandleSignal);
  std::signal(SIGTERM, HandleSignal);
  service.Run();
  g_service = nullptr;
}

// ---- report ----

void RunReport(const std::string& in) { std::cout << RenderReport(ReadText(in)); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"webnav: goal-driven navigation over a hyperlinked corpus"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "random seed")->capture_default_str();
  app.add_option("--threads", g.threads, "evaluation threads")->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_flag("--quiet", g.quiet, "suppress progress messages");

  CompileArgs compile;
  auto* c_compile = app.add_subcommand("compile", "corpus.jsonl to a navigation graph");
  c_compile->add_option("--corpus", compile.corpus)->required();
  c_compile->add_option("--start", compile.start, "start node title")->required();
  c_compile->add_option("--out", compile.out, "graph file")->required();
  c_compile->add_option("--stats", compile.stats, "stats.json path (default: next to --out)");
  c_compile->add_option("--exclude-section", compile.sections, "replaces the default list");
  c_compile->add_option("--exclude-title-prefix", compile.prefixes, "replaces the default list");

  SynthArgs synth;
  auto* c_synth = app.add_subcommand("synth", "write a synthetic topic-structured corpus");
  c_synth->add_option("--nodes", synth.config.nodes)->capture_default_str();
  c_synth->add_option("--min-branch", synth.config.min_branch)->capture_default_str();
  c_synth->add_option("--max-branch", synth.config.max_branch)->capture_default_str();
  c_synth->add_option("--start-branch", synth.config.start_branch)->capture_default_str();
  c_synth->add_option("--out", synth.out, "corpus.jsonl")->required();
  c_synth->add_option("--qa", synth.qa, "also write question-answer pairs here");
  c_synth->add_option("--qa-count", synth.qa_count)->capture_default_str();
  c_synth->add_option("--qa-unresolvable", synth.qa_unresolvable)->capture_default_str();

  EmbedArgs embed;
  auto* c_embed = app.add_subcommand("embed", "train CBOW word vectors on a corpus");
  c_embed->add_option("--corpus", embed.corpus)->required();
  c_embed->add_option("--out", embed.out, "vectors.txt")->required();
  c_embed->add_option("--dim", embed.cbow.dim)->capture_default_str();
  c_embed->add_option("--window", embed.cbow.window)->capture_default_str();
  c_embed->add_option("--epochs", embed.cbow.epochs)->capture_default_str();
  c_embed->add_option("--negatives", embed.cbow.negatives)->capture_default_str();
  c_embed->add_option("--lr", embed.cbow.learning_rate)->capture_default_str();

  PhiArgs phi;
  auto* c_phi = app.add_subcommand("phi", "precompute node content vectors");
  c_phi->add_option("--graph", phi.graph)->required();
  c_phi->add_option("--vectors", phi.vectors)->required();
  c_phi->add_option("--out", phi.out)->required();

  GenArgs gen;
  auto* c_gen = app.add_subcommand("gen", "sample a navigation dataset from random walks");
  c_gen->add_option("--graph", gen.graph)->required();
  c_gen->add_option("--out", gen.out, "dataset directory")->required();
  c_gen->add_option("--nh", gen.config.max_hops)->capture_default_str();
  c_gen->add_option("--nq", gen.config.query_size)->capture_default_str();
  gen.config.counts = {1000, 100, 100};
  c_gen->add_option("--train", gen.config.counts.train)->capture_default_str();
  c_gen->add_option("--valid", gen.config.counts.valid)->capture_default_str();
  c_gen->add_option("--test", gen.config.counts.test)->capture_default_str();

  ImportArgs import;
  auto* c_import = app.add_subcommand("import-qa", "build a dataset from question-answer pairs");
  c_import->add_option("--graph", import.graph)->required();
  c_import->add_option("--pairs", import.pairs, "qa.jsonl")->required();
  c_import->add_option("--out", import.out, "dataset directory")->required();
  c_import->add_option("--nh", import.max_hops, "hop limit recorded for the dataset")
      ->capture_default_str();
  c_import->add_option("--train", import.train);
  c_import->add_option("--valid", import.valid);
  c_import->add_option("--test", import.test);

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "supervised training of a navigation agent");
  AddWorldOptions(c_train, train.world);
  AddAgentOptions(c_train, train.agent);
  c_train->add_option("--data", train.data, "dataset directory")->required();
  c_train->add_option("--split", train.split)->capture_default_str();
  c_train->add_option("--out", train.out, "checkpoint")->required();
  c_train->add_option("--init", train.init, "start from this checkpoint");
  c_train->add_option("--log", train.log, "cost log (default: <out>.costs.json)");
  c_train->add_option("--lr", train.train.learning_rate)->capture_default_str();
  c_train->add_option("--epochs", train.train.epochs)->capture_default_str();
  c_train->add_option("--clip", train.train.clip)->capture_default_str();

  EvalArgs eval;
  auto* c_eval = app.add_subcommand("eval", "average reward or recall@K");
  c_eval->add_option("--graph", eval.graph)->required();
  c_eval->add_option("--phi", eval.phi);
  c_eval->add_option("--vectors", eval.vectors);
  c_eval->add_option("--model", eval.model);
  c_eval->add_option("--data", eval.data, "dataset directory")->required();
  c_eval->add_option("--split", eval.split)->capture_default_str();
  c_eval->add_option("--metric", eval.metric, "reward or recall")->capture_default_str();
  c_eval->add_option("--system", eval.system, "agent or search")->capture_default_str();
  c_eval->add_option("--k", eval.k)->check(CLI::PositiveNumber)->capture_default_str();
  c_eval->add_option("--width", eval.width, "beam width for reward")
      ->check(CLI::PositiveNumber)->capture_default_str();
  c_eval->add_option("--nh", eval.max_hops, "hop limit (default: dataset's)");
  c_eval->add_option("--out", eval.out, "report.json (default: stdout)");
  c_eval->add_flag("--wall-time", eval.wall_time, "include wall time in the report");

  SearchArgs search;
  auto* c_search = app.add_subcommand("search", "TF-IDF document search");
  c_search->add_option("--graph", search.graph)->required();
  c_search->add_option("--query", search.query)->required();
  c_search->add_option("--k", search.k)->check(CLI::PositiveNumber)->capture_default_str();

  SweepArgs sweep;
  auto* c_sweep = app.add_subcommand("sweep", "reward over a grid of N_h and N_q");
  AddWorldOptions(c_sweep, sweep.world);
  AddAgentOptions(c_sweep, sweep.agent);
  c_sweep->add_option("--nh", sweep.max_hops)->capture_default_str();
  c_sweep->add_option("--nq", sweep.query_sizes)->capture_default_str();
  c_sweep->add_option("--train", sweep.train)->capture_default_str();
  c_sweep->add_option("--valid", sweep.valid)->capture_default_str();
  c_sweep->add_option("--test", sweep.test)->capture_default_str();
  c_sweep->add_option("--lr", sweep.train_config.learning_rate)->capture_default_str();
  c_sweep->add_option("--epochs", sweep.train_config.epochs)->capture_default_str();
  c_sweep->add_option("--clip", sweep.train_config.clip)->capture_default_str();
  c_sweep->add_option("--width", sweep.width)->capture_default_str();
  c_sweep->add_option("--out", sweep.out, "sweep.json (default: stdout)");

  ServeArgs serve;
  auto* c_serve = app.add_subcommand("serve", "HTTP service for human trials");
  c_serve->add_option("--graph", serve.graph)->required();
  c_serve->add_option("--data", serve.data, "directory of dataset directories")->required();
  c_serve->add_option("--store", serve.store, "transcript directory")->required();
  c_serve->add_option("--port", serve.port)->capture_default_str();
  c_serve->add_option("--host", serve.host)->capture_default_str();
  c_serve->add_option("--ui", serve.ui, "static files for the browser client");

  std::string report_in;
  auto* c_report = app.add_subcommand("report", "render an eval or sweep report as a table");
  c_report->add_option("--in", report_in, "report JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  SetQuiet(g.quiet);

  try {
    if (*c_compile) RunCompile(compile);
    if (*c_synth) RunSynth(synth, g);
    if (*c_embed) RunEmbed(embed, g);
    if (*c_phi) RunPhi(phi);
    if (*c_gen) RunGen(gen, g);
    if (*c_import) RunImport(import, g);
    if (*c_train) RunTrain(train, g);
    if (*c_eval) RunEval(eval, g);
    if (*c_search) RunSearch(search);
    if (*c_sweep) RunSweep(sweep, g);
    if (*c_serve) RunServe(serve, g);
    if (*c_report) RunReport(report_in);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "webnav: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "webnav: " << e.what() << "\n";
    return e.kind() == Error::Kind::kData ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "webnav: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
