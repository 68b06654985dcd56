#include "webnav/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "binary_io.hpp"
#include "webnav/error.hpp"
#include "webnav/text.hpp"

namespace webnav {
namespace {

constexpr int kMaxRestarts = 1000;
constexpr int kSlotRetries = 1000;
constexpr std::size_t kQueryCandidates = 5;

using Json = nlohmann::ordered_json;

std::string CountsString(const DatasetSplits& s) {
  return "train=" + std::to_string(s.train.size()) +
         " valid=" + std::to_string(s.valid.size()) +
         " test=" + std::to_string(s.test.size());
}

}  // namespace

const std::vector<Example>& DatasetSplits::Split(const std::string& name) const {
  if (name == "train") return train;
  if (name == "valid") return valid;
  if (name == "test") return test;
  throw DataError("unknown split '" + name + "'");
}

std::vector<NodeId> SamplePath(const NavGraph& graph, int hops, Rng& rng) {
  if (hops < 2) throw DataError("sample_path: hops must be >= 2");
  std::vector<NodeId> path;
  for (int attempt = 0; attempt <= kMaxRestarts; ++attempt) {
    path.assign(1, graph.Start());
    for (int step = 0; step < hops; ++step) {
      const auto edges = graph.Edges(path.back());
      if (edges.empty()) break;
      path.push_back(edges[UniformIndex(rng, edges.size())]);
    }
    if (path.size() == static_cast<std::size_t>(hops) + 1) return path;
  }
  throw DataError("sample_path: no walk of " + std::to_string(hops) +
                  " hops after " + std::to_string(kMaxRestarts) +
                  " restarts; graph too shallow");
}

std::string WindowText(const NavGraph& graph, NodeId node,
                       std::size_t first_sentence, int query_size) {
  const Node& n = graph.GetNode(node);
  const Span& a = n.sentences.at(first_sentence);
  const Span& b = n.sentences.at(first_sentence + query_size - 1);
  return n.clean_text.substr(a.start, b.end - a.start);
}

std::vector<WindowScore> RankQueryWindows(const NavGraph& graph, NodeId node,
                                          int query_size,
                                          const TfIdfIndex& index) {
  if (query_size < 1) throw DataError("select_query: N_q must be >= 1");
  const std::size_t sentences = graph.GetNode(node).sentences.size();
  std::vector<WindowScore> windows;
  if (sentences < static_cast<std::size_t>(query_size)) return windows;
  for (std::size_t first = 0; first + query_size <= sentences; ++first) {
    const auto tokens = Tokenize(WindowText(graph, node, first, query_size));
    double total = 0;
    for (const auto& t : tokens) total += index.Weight(t, node);
    windows.push_back(
        {first, tokens.empty() ? 0.0 : total / static_cast<double>(tokens.size())});
  }
  std::stable_sort(windows.begin(), windows.end(),
                   [](const WindowScore& a, const WindowScore& b) {
                     return a.score > b.score;
                   });
  return windows;
}

std::optional<std::string> SelectQuery(const NavGraph& graph, NodeId node,
                                       int query_size, const TfIdfIndex& index,
                                       Rng& rng) {
  const auto windows = RankQueryWindows(graph, node, query_size, index);
  if (windows.empty()) return std::nullopt;
  const std::size_t pool = std::min(windows.size(), kQueryCandidates);
  const auto& pick = windows[UniformIndex(rng, pool)];
  return WindowText(graph, node, pick.first_sentence, query_size);
}

DatasetSplits GenerateDataset(const NavGraph& graph,
                              const GenerationConfig& config) {
  if (config.max_hops < 4 || config.max_hops % 2 != 0) {
    throw DataError("generate: N_h must be even and >= 4");
  }
  if (config.query_size < 1) throw DataError("generate: N_q must be >= 1");

  const TfIdfIndex index(graph);
  const std::vector<int> dist = graph.DistancesFromStart();
  const int hops = config.max_hops / 2;
  Rng rng(config.seed);

  DatasetSplits splits;
  splits.meta.kind = "generated";
  splits.meta.max_hops = config.max_hops;
  splits.meta.query_size = config.query_size;
  splits.meta.seed = config.seed;
  splits.meta.requested = config.counts;
  splits.meta.graph_checksum = graph.Checksum();

  // Owning split per target node: -1 none, else 0/1/2.
  std::vector<int> owner(graph.NodeCount(), -1);
  std::vector<Example>* outputs[] = {&splits.train, &splits.valid,
                                     &splits.test};
  const std::size_t wanted[] = {config.counts.train, config.counts.valid,
                                config.counts.test};

  for (int split = 0; split < 3; ++split) {
    for (std::size_t slot = 0; slot < wanted[split]; ++slot) {
      bool filled = false;
      for (int attempt = 0; attempt < kSlotRetries && !filled; ++attempt) {
        std::vector<NodeId> path = SamplePath(graph, hops, rng);
        const NodeId target = path.back();
        if (dist[target] < 2) continue;
        if (owner[target] != -1 && owner[target] != split) continue;
        auto query = SelectQuery(graph, target, config.query_size, index, rng);
        if (!query) continue;
        owner[target] = split;
        outputs[split]->push_back({std::move(*query), target, std::move(path)});
        filled = true;
      }
      if (!filled) {
        throw DataError("generate: retry budget exhausted; achieved " +
                        CountsString(splits));
      }
    }
  }
  return splits;
}

std::optional<std::vector<NodeId>> FindPath(const NavGraph& graph,
                                            NodeId target) {
  if (target >= graph.NodeCount()) return std::nullopt;
  const NodeId start = graph.Start();
  constexpr NodeId kNone = UINT32_MAX;
  std::vector<NodeId> parent(graph.NodeCount(), kNone);
  std::vector<bool> seen(graph.NodeCount(), false);
  seen[start] = true;
  std::vector<NodeId> frontier{start};
  while (!frontier.empty() && !seen[target]) {
    // Ascending frontier order makes the first discoverer the lowest parent.
    std::sort(frontier.begin(), frontier.end());
    std::vector<NodeId> next;
    for (NodeId u : frontier) {
      for (NodeId v : graph.Edges(u)) {
        if (!seen[v]) {
          seen[v] = true;
          parent[v] = u;
          next.push_back(v);
        }
      }
    }
    frontier = std::move(next);
  }
  if (!seen[target]) return std::nullopt;
  std::vector<NodeId> path{target};
  while (path.back() != start) path.push_back(parent[path.back()]);
  std::reverse(path.begin(), path.end());
  return path;
}

DatasetSplits ImportQaPairs(const NavGraph& graph,
                            const std::vector<QaPair>& pairs,
                            std::optional<SplitCounts> counts,
                            std::uint64_t seed) {
  ImportStats stats;
  stats.pairs = pairs.size();
  std::vector<Example> usable;
  for (const auto& pair : pairs) {
    std::string_view answer = pair.answer;
    while (!answer.empty() && answer.front() == ' ') answer.remove_prefix(1);
    while (!answer.empty() && answer.back() == ' ') answer.remove_suffix(1);
    const auto node = graph.FindTitle(answer);
    if (!node) {
      ++stats.unresolved;
      continue;
    }
    auto path = FindPath(graph, *node);
    if (!path) {
      ++stats.unreachable;
      continue;
    }
    usable.push_back({pair.question, *node, std::move(*path)});
  }
  if (usable.empty()) throw DataError("import-qa: no usable question-answer pairs");

  SplitCounts wanted;
  if (counts) {
    wanted = *counts;
  } else {
    wanted.train = usable.size() * 8 / 10;
    wanted.valid = usable.size() / 10;
    wanted.test = usable.size() - wanted.train - wanted.valid;
  }

  DatasetSplits splits;
  std::vector<Example>* outputs[] = {&splits.train, &splits.valid,
                                     &splits.test};
  const std::size_t limits[] = {wanted.train, wanted.valid, wanted.test};
  std::vector<int> owner(graph.NodeCount(), -1);
  int current = 0;
  for (auto& example : usable) {
    while (current < 3 && outputs[current]->size() >= limits[current]) {
      ++current;
    }
    if (current == 3) {
      ++stats.overflow;
      continue;
    }
    const int claimed = owner[example.target];
    if (claimed != -1 && claimed != current) {
      ++stats.conflicts;
      continue;
    }
    owner[example.target] = current;
    outputs[current]->push_back(std::move(example));
  }
  const std::size_t retained = splits.train.size() + splits.valid.size() + splits.test.size();
  if (retained == 0) throw DataError("import-qa: zero retained pairs");

  splits.meta.kind = "imported";
  splits.meta.max_hops = 0;
  splits.meta.query_size = 0;
  splits.meta.seed = seed;
  splits.meta.requested = wanted;
  splits.meta.graph_checksum = graph.Checksum();
  splits.meta.import_stats = stats;
  return splits;
}

std::vector<QaPair> ReadQaPairs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<QaPair> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      pairs.push_back({j.at("question").get<std::string>(),
                       j.at("answer").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + " line " + std::to_string(line_no) +
                      ": " + e.what());
    }
  }
  return pairs;
}

namespace {

Json MetaToJson(const DatasetMeta& meta) {
  Json j;
  j["kind"] = meta.kind;
  j["graph_checksum"] = ToHex(meta.graph_checksum);
  j["nh"] = meta.max_hops;
  j["nq"] = meta.query_size;
  j["seed"] = meta.seed;
  j["counts"] = {{"train", meta.requested.train},
                 {"valid", meta.requested.valid},
                 {"test", meta.requested.test}};
  if (meta.import_stats) {
    const auto& s = *meta.import_stats;
    j["import"] = {{"pairs", s.pairs},           {"unresolved", s.unresolved},
                   {"unreachable", s.unreachable}, {"conflicts", s.conflicts},
                   {"overflow", s.overflow}};
  }
  return j;
}

DatasetMeta MetaFromJson(const Json& j) {
  DatasetMeta meta;
  meta.kind = j.at("kind").get<std::string>();
  meta.graph_checksum =
      std::stoull(j.at("graph_checksum").get<std::string>(), nullptr, 16);
  meta.max_hops = j.at("nh").get<int>();
  meta.query_size = j.at("nq").get<int>();
  meta.seed = j.at("seed").get<std::uint64_t>();
  const auto& c = j.at("counts");
  meta.requested = {c.at("train").get<std::size_t>(),
                    c.at("valid").get<std::size_t>(),
                    c.at("test").get<std::size_t>()};
  if (j.contains("import")) {
    const auto& s = j.at("import");
    meta.import_stats = ImportStats{
        s.at("pairs").get<std::size_t>(), s.at("unresolved").get<std::size_t>(),
        s.at("unreachable").get<std::size_t>(),
        s.at("conflicts").get<std::size_t>(), s.at("overflow").get<std::size_t>()};
  }
  return meta;
}

std::string ExamplesToJsonl(const std::vector<Example>& examples) {
  std::string out;
  for (const auto& e : examples) {
    Json j;
    j["query"] = e.query;
    j["target"] = e.target;
    j["path"] = e.path;
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace

void WriteDataset(const std::filesystem::path& dir,
                  const DatasetSplits& splits) {
  std::filesystem::create_directories(dir);
  internal::WriteFile(dir / "train.jsonl", ExamplesToJsonl(splits.train));
  internal::WriteFile(dir / "valid.jsonl", ExamplesToJsonl(splits.valid));
  internal::WriteFile(dir / "test.jsonl", ExamplesToJsonl(splits.test));
  internal::WriteFile(dir / "meta.json", MetaToJson(splits.meta).dump(2) + "\n");
}

std::vector<Example> ReadExamples(const std::filesystem::path& jsonl) {
  std::istringstream in(internal::ReadFile(jsonl));
  std::vector<Example> examples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Example e{j.at("query").get<std::string>(), j.at("target").get<NodeId>(),
                j.at("path").get<std::vector<NodeId>>()};
      if (e.path.empty() || e.path.back() != e.target) {
        throw DataError("path must end at target");
      }
      examples.push_back(std::move(e));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(jsonl.string() + " line " + std::to_string(line_no) +
                      ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(jsonl.string() + " line " + std::to_string(line_no) +
                      ": " + e.what());
    }
  }
  return examples;
}

DatasetSplits ReadDataset(const std::filesystem::path& dir) {
  DatasetSplits splits;
  try {
    splits.meta = MetaFromJson(Json::parse(internal::ReadFile(dir / "meta.json")));
  } catch (const nlohmann::json::exception& e) {
    throw DataError((dir / "meta.json").string() + ": " + e.what());
  }
  splits.train = ReadExamples(dir / "train.jsonl");
  splits.valid = ReadExamples(dir / "valid.jsonl");
  splits.test = ReadExamples(dir / "test.jsonl");
  return splits;
}

}  // namespace webnav
