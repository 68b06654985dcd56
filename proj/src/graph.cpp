#include "webnav/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "binary_io.hpp"
#include "webnav/error.hpp"

namespace webnav {
namespace internal {

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void WriteFile(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw RuntimeFailure("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw RuntimeFailure("short write to " + path.string());
}

}  // namespace internal

namespace {
constexpr std::string_view kMagic = "WEBNAVG\0";
}  // namespace

NavGraph::NavGraph(std::vector<Node> nodes,
                   std::vector<std::vector<NodeId>> edges, NodeId start)
    : nodes_(std::move(nodes)), edges_(std::move(edges)), start_(start) {
  for (const auto& list : edges_) edge_count_ += list.size();
  Validate();
  IndexTitles();
}

void NavGraph::Validate() const {
  if (edges_.size() != nodes_.size()) {
    throw DataError("graph: adjacency table size does not match node count");
  }
  if (!nodes_.empty() && start_ >= nodes_.size()) {
    throw DataError("graph: start node out of range");
  }
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    for (NodeId target : edges_[i]) {
      if (target >= nodes_.size()) {
        throw DataError("graph: node " + std::to_string(i) +
                        " has edge to invalid id " + std::to_string(target));
      }
    }
  }
  for (const auto& node : nodes_) {
    for (const auto& span : node.sentences) {
      if (span.start > span.end || span.end > node.clean_text.size()) {
        throw DataError("graph: sentence span out of range in '" +
                        node.title + "'");
      }
    }
  }
}

void NavGraph::IndexTitles() {
  title_index_.reserve(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    title_index_.emplace(nodes_[i].title, static_cast<NodeId>(i));
  }
}

std::optional<NodeId> NavGraph::FindTitle(std::string_view title) const {
  auto it = title_index_.find(std::string(title));
  if (it == title_index_.end()) return std::nullopt;
  return it->second;
}

std::string NavGraph::Serialize() const {
  internal::ByteWriter w;
  w.Raw(kMagic.data(), kMagic.size());
  w.U32(kFormatVersion);
  w.U32(static_cast<std::uint32_t>(nodes_.size()));
  w.U32(start_);
  for (const auto& node : nodes_) {
    w.Bytes(node.title);
    w.Bytes(node.clean_text);
    w.U32(static_cast<std::uint32_t>(node.sentences.size()));
    for (const auto& span : node.sentences) {
      w.U32(span.start);
      w.U32(span.end);
    }
  }
  for (const auto& list : edges_) {
    w.VarUint(list.size());
    std::int64_t previous = 0;
    for (NodeId target : list) {
      w.VarInt(static_cast<std::int64_t>(target) - previous);
      previous = target;
    }
  }
  return w.Take();
}

NavGraph NavGraph::Deserialize(std::string_view bytes) {
  internal::ByteReader r(bytes, "graph file");
  if (r.Fixed(kMagic.size()) != kMagic) r.Fail("bad magic");
  const std::uint32_t version = r.U32();
  if (version != kFormatVersion) {
    r.Fail("unsupported format version " + std::to_string(version));
  }
  const std::uint32_t count = r.U32();
  const NodeId start = r.U32();
  std::vector<Node> nodes(count);
  for (auto& node : nodes) {
    node.title = r.Bytes();
    node.clean_text = r.Bytes();
    const std::uint32_t spans = r.U32();
    if (spans > r.Remaining() / 8) r.Fail("span table truncated");
    node.sentences.resize(spans);
    for (auto& span : node.sentences) {
      span.start = r.U32();
      span.end = r.U32();
    }
  }
  std::vector<std::vector<NodeId>> edges(count);
  for (auto& list : edges) {
    const std::uint64_t degree = r.VarUint();
    if (degree > r.Remaining()) r.Fail("adjacency list truncated");
    list.reserve(degree);
    std::int64_t previous = 0;
    for (std::uint64_t k = 0; k < degree; ++k) {
      previous += r.VarInt();
      if (previous < 0 || previous >= static_cast<std::int64_t>(count)) {
        r.Fail("edge target out of range");
      }
      list.push_back(static_cast<NodeId>(previous));
    }
  }
  if (!r.AtEnd()) r.Fail("trailing bytes");
  if (count == 0) r.Fail("graph has no nodes");
  return NavGraph(std::move(nodes), std::move(edges), start);
}

void NavGraph::Save(const std::filesystem::path& path) const {
  internal::WriteFile(path, Serialize());
}

NavGraph NavGraph::Load(const std::filesystem::path& path) {
  return Deserialize(internal::ReadFile(path));
}

std::uint64_t NavGraph::Checksum() const { return Fnv1a64(Serialize()); }

std::vector<int> NavGraph::DistancesFromStart() const {
  std::vector<int> dist(nodes_.size(), -1);
  if (nodes_.empty()) return dist;
  std::deque<NodeId> queue{start_};
  dist[start_] = 0;
  while (!queue.empty()) {
    const NodeId u = queue.front();
    queue.pop_front();
    for (NodeId v : edges_[u]) {
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
    }
  }
  return dist;
}

namespace {

std::size_t CountWhitespaceWords(std::string_view text) {
  std::size_t count = 0;
  bool inside = false;
  for (char c : text) {
    const bool word = !(c == ' ' || c == '\t' || c == '\n' || c == '\r' ||
                        c == '\f' || c == '\v');
    if (word && !inside) ++count;
    inside = word;
  }
  return count;
}

Summary Summarize(const std::vector<double>& values) {
  Summary s;
  s.min = *std::min_element(values.begin(), values.end());
  s.max = *std::max_element(values.begin(), values.end());
  double sum = 0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double sq = 0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.sd = std::sqrt(sq / static_cast<double>(values.size()));
  return s;
}

}  // namespace

GraphStats ComputeGraphStats(const NavGraph& graph) {
  if (graph.NodeCount() == 0) throw DataError("graph stats: empty graph");
  std::vector<double> links, words;
  links.reserve(graph.NodeCount());
  words.reserve(graph.NodeCount());
  for (NodeId id = 0; id < graph.NodeCount(); ++id) {
    links.push_back(static_cast<double>(graph.OutDegree(id)));
    words.push_back(
        static_cast<double>(CountWhitespaceWords(graph.GetNode(id).clean_text)));
  }
  GraphStats stats;
  stats.nodes = graph.NodeCount();
  stats.edges = graph.EdgeCount();
  stats.hyperlinks = Summarize(links);
  stats.words = Summarize(words);
  return stats;
}

std::string GraphStatsJson(const GraphStats& stats,
                           std::size_t dropped_links) {
  nlohmann::ordered_json j;
  j["nodes"] = stats.nodes;
  j["edges"] = stats.edges;
  j["dropped_links"] = dropped_links;
  j["hyperlinks_mean"] = stats.hyperlinks.mean;
  j["hyperlinks_sd"] = stats.hyperlinks.sd;
  j["hyperlinks_max"] = stats.hyperlinks.max;
  j["hyperlinks_min"] = stats.hyperlinks.min;
  j["words_mean"] = stats.words.mean;
  j["words_sd"] = stats.words.sd;
  j["words_max"] = stats.words.max;
  j["words_min"] = stats.words.min;
  return j.dump(2) + "\n";
}

}  // namespace webnav
