#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "webnav/text.hpp"

namespace webnav {

using NodeId = std::uint32_t;

struct Node {
  std::string title;
  std::string clean_text;
  std::vector<Span> sentences;
};

// Immutable directed document graph. Node ids are dense and follow corpus
// input order; the position of a target inside `Edges(n)` is its edge index.
// Self-loops and repeated links are kept as written.
class NavGraph {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;

  NavGraph() = default;
  NavGraph(std::vector<Node> nodes, std::vector<std::vector<NodeId>> edges,
           NodeId start);

  std::size_t NodeCount() const { return nodes_.size(); }
  std::size_t EdgeCount() const { return edge_count_; }
  NodeId Start() const { return start_; }

  const Node& GetNode(NodeId id) const { return nodes_.at(id); }
  std::span<const NodeId> Edges(NodeId id) const { return edges_.at(id); }
  std::size_t OutDegree(NodeId id) const { return edges_.at(id).size(); }

  std::optional<NodeId> FindTitle(std::string_view title) const;

  // Binary container: magic, version, start node, node table, then
  // adjacency lists stored as zigzag varint deltas.
  std::string Serialize() const;
  static NavGraph Deserialize(std::string_view bytes);

  void Save(const std::filesystem::path& path) const;
  static NavGraph Load(const std::filesystem::path& path);

  // FNV-1a of the serialized form.
  std::uint64_t Checksum() const;

  // Directed hop distance from the start node; -1 when unreachable.
  std::vector<int> DistancesFromStart() const;

 private:
  void Validate() const;
  void IndexTitles();

  std::vector<Node> nodes_;
  std::vector<std::vector<NodeId>> edges_;
  NodeId start_ = 0;
  std::size_t edge_count_ = 0;
  std::unordered_map<std::string, NodeId> title_index_;
};

struct Summary {
  double mean = 0;
  double sd = 0;  // population standard deviation
  double max = 0;
  double min = 0;
};

// Per-node statistics. For reference, English Wikipedia (Sept. 2015) gives
// hyperlinks mean 4.29 / sd 13.85 / max 300 / min 0 and words mean 462.5 /
// sd 990.2 / max 132881 / min 1.
struct GraphStats {
  std::size_t nodes = 0;
  std::size_t edges = 0;
  Summary hyperlinks;
  Summary words;
};

GraphStats ComputeGraphStats(const NavGraph& graph);

std::string GraphStatsJson(const GraphStats& stats, std::size_t dropped_links);

}  // namespace webnav
