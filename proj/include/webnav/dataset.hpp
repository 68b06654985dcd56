#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "webnav/graph.hpp"
#include "webnav/tfidf.hpp"

namespace webnav {

// (query, target, supervising path). The path starts at the graph's start
// node and ends at `target`.
struct Example {
  std::string query;
  NodeId target = 0;
  std::vector<NodeId> path;

  std::size_t Hops() const { return path.empty() ? 0 : path.size() - 1; }
  bool operator==(const Example&) const = default;
};

struct SplitCounts {
  std::size_t train = 0;
  std::size_t valid = 0;
  std::size_t test = 0;
};

struct GenerationConfig {
  int max_hops = 8;     // N_h; walks take N_h / 2 steps
  int query_size = 4;   // N_q sentences
  SplitCounts counts;
  std::uint64_t seed = 0;
};

struct ImportStats {
  std::size_t pairs = 0;
  std::size_t unresolved = 0;   // answer is not a node title
  std::size_t unreachable = 0;  // no directed path from the start node
  std::size_t conflicts = 0;    // answer node already owned by another split
  std::size_t overflow = 0;     // every split already full
};

struct DatasetMeta {
  std::string kind;  // "generated" or "imported"
  int max_hops = 0;
  int query_size = 0;
  std::uint64_t seed = 0;
  SplitCounts requested;
  std::uint64_t graph_checksum = 0;
  std::optional<ImportStats> import_stats;
};

struct DatasetSplits {
  std::vector<Example> train;
  std::vector<Example> valid;
  std::vector<Example> test;
  DatasetMeta meta;

  const std::vector<Example>& Split(const std::string& name) const;
};

using Rng = std::mt19937_64;

// Uniform random walk of exactly `hops` steps from the start node. A walk
// that hits a dead end restarts from the start node; gives up after 1000
// restarts.
std::vector<NodeId> SamplePath(const NavGraph& graph, int hops, Rng& rng);

struct WindowScore {
  std::size_t first_sentence = 0;
  double score = 0;
};

// Every window of `query_size` consecutive sentences of `node`, scored by
// the mean TF-IDF weight of its tokens, best first; ties go to the earlier
// window.
std::vector<WindowScore> RankQueryWindows(const NavGraph& graph, NodeId node,
                                          int query_size,
                                          const TfIdfIndex& index);

// Verbatim text covering sentences [first, first + query_size).
std::string WindowText(const NavGraph& graph, NodeId node,
                       std::size_t first_sentence, int query_size);

// Uniform draw among the five best windows; nullopt when the node has fewer
// than `query_size` sentences.
std::optional<std::string> SelectQuery(const NavGraph& graph, NodeId node,
                                       int query_size, const TfIdfIndex& index,
                                       Rng& rng);

DatasetSplits GenerateDataset(const NavGraph& graph,
                              const GenerationConfig& config);

// BFS shortest path from the start node. Among equally short candidates the
// lowest-id parent is taken at every level.
std::optional<std::vector<NodeId>> FindPath(const NavGraph& graph,
                                            NodeId target);

struct QaPair {
  std::string question;
  std::string answer;
};

// Keeps pairs whose answer names a reachable node, in input order. Splits
// fill train, then valid, then test. With no counts given, 80/10/10 of the
// usable pairs.
DatasetSplits ImportQaPairs(const NavGraph& graph,
                            const std::vector<QaPair>& pairs,
                            std::optional<SplitCounts> counts,
                            std::uint64_t seed);

std::vector<QaPair> ReadQaPairs(const std::filesystem::path& path);

// Directory layout: train.jsonl, valid.jsonl, test.jsonl, meta.json.
void WriteDataset(const std::filesystem::path& dir,
                  const DatasetSplits& splits);
DatasetSplits ReadDataset(const std::filesystem::path& dir);
std::vector<Example> ReadExamples(const std::filesystem::path& jsonl);

}  // namespace webnav
