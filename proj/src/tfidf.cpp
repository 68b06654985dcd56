#include "webnav/tfidf.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "webnav/text.hpp"

namespace webnav {

double InverseDocumentFrequency(std::uint32_t df, std::size_t node_count) {
  return std::log(static_cast<double>(node_count) / (1.0 + df)) + 1.0;
}

double TfIdfWeight(std::uint32_t tf, std::uint32_t df,
                   std::size_t node_count) {
  if (tf == 0 || df == 0) return 0.0;
  return static_cast<double>(tf) * InverseDocumentFrequency(df, node_count);
}

TfIdfIndex::TfIdfIndex(const NavGraph& graph)
    : node_counts_(graph.NodeCount()) {
  for (NodeId id = 0; id < graph.NodeCount(); ++id) {
    std::map<std::uint32_t, std::uint32_t> counts;
    for (auto& token : Tokenize(graph.GetNode(id).clean_text)) {
      auto [it, inserted] = vocabulary_.try_emplace(
          std::move(token), static_cast<std::uint32_t>(df_.size()));
      if (inserted) df_.push_back(0);
      ++counts[it->second];
    }
    auto& out = node_counts_[id];
    out.assign(counts.begin(), counts.end());
    for (const auto& [token, count] : out) ++df_[token];
  }
}

std::optional<std::uint32_t> TfIdfIndex::TokenId(std::string_view token) const {
  auto it = vocabulary_.find(std::string(token));
  if (it == vocabulary_.end()) return std::nullopt;
  return it->second;
}

std::uint32_t TfIdfIndex::DocumentFrequency(std::string_view token) const {
  auto id = TokenId(token);
  return id ? df_[*id] : 0;
}

std::uint32_t TfIdfIndex::TermCount(NodeId node, std::string_view token) const {
  auto id = TokenId(token);
  if (!id) return 0;
  const auto& counts = node_counts_.at(node);
  auto it = std::lower_bound(
      counts.begin(), counts.end(), *id,
      [](const auto& entry, std::uint32_t key) { return entry.first < key; });
  return (it != counts.end() && it->first == *id) ? it->second : 0;
}

double TfIdfIndex::Weight(std::string_view token, NodeId node) const {
  return TfIdfWeight(TermCount(node, token), DocumentFrequency(token),
                     NodeCount());
}

}  // namespace webnav
