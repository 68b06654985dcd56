#include "webnav/search.hpp"

#include <algorithm>
#include <map>
#include <unordered_set>

#include "webnav/error.hpp"
#include "webnav/text.hpp"
#include "webnav/tfidf.hpp"

namespace webnav {

InvertedIndex::InvertedIndex(const NavGraph& graph)
    : node_count_(graph.NodeCount()) {
  for (NodeId id = 0; id < graph.NodeCount(); ++id) {
    std::map<std::string, std::uint32_t> counts;
    for (auto& token : Tokenize(graph.GetNode(id).clean_text)) ++counts[token];
    for (auto& [token, tf] : counts) postings_[token].push_back({id, tf});
  }
}

const std::vector<Posting>* InvertedIndex::Postings(
    std::string_view token) const {
  auto it = postings_.find(std::string(token));
  return it == postings_.end() ? nullptr : &it->second;
}

std::uint32_t InvertedIndex::DocumentFrequency(std::string_view token) const {
  const auto* list = Postings(token);
  return list ? static_cast<std::uint32_t>(list->size()) : 0;
}

std::vector<SearchHit> Search(const InvertedIndex& index,
                              std::string_view query, std::size_t k) {
  if (k < 1) throw DataError("search: K must be >= 1");
  const auto tokens = Tokenize(query);
  if (tokens.empty()) throw DataError("search: query has no tokens");

  std::unordered_set<std::string> seen;
  std::unordered_map<NodeId, double> scores;
  for (const auto& token : tokens) {
    if (!seen.insert(token).second) continue;
    const auto* postings = index.Postings(token);
    if (!postings) continue;
    const auto df = static_cast<std::uint32_t>(postings->size());
    for (const auto& p : *postings) {
      scores[p.node] += TfIdfWeight(p.tf, df, index.NodeCount());
    }
  }
  std::vector<SearchHit> hits;
  hits.reserve(scores.size());
  for (const auto& [node, score] : scores) hits.push_back({node, score});
  auto better = [](const SearchHit& a, const SearchHit& b) {
    return a.score != b.score ? a.score > b.score : a.node < b.node;
  };
  if (hits.size() > k) {
    std::partial_sort(hits.begin(), hits.begin() + k, hits.end(), better);
    hits.resize(k);
  } else {
    std::sort(hits.begin(), hits.end(), better);
  }
  return hits;
}

}  // namespace webnav
