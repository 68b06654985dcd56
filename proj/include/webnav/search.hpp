#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "webnav/graph.hpp"

namespace webnav {

struct Posting {
  NodeId node;
  std::uint32_t tf;
};

// Token -> postings sorted by node id. Built over every node of the graph
// with the shared tokenizer.
class InvertedIndex {
 public:
  explicit InvertedIndex(const NavGraph& graph);

  std::size_t NodeCount() const { return node_count_; }
  std::size_t VocabularySize() const { return postings_.size(); }

  // nullptr when the token occurs nowhere.
  const std::vector<Posting>* Postings(std::string_view token) const;
  std::uint32_t DocumentFrequency(std::string_view token) const;

 private:
  std::size_t node_count_ = 0;
  std::unordered_map<std::string, std::vector<Posting>> postings_;
};

struct SearchHit {
  NodeId node;
  double score;
  bool operator==(const SearchHit&) const = default;
};

// SimpleSearch: score(n) = sum over distinct query tokens t present in n of
// tf(t, n) * idf(t), using the project TF-IDF definition. Highest score
// first, ties to the lower node id; only nodes sharing a token are returned.
std::vector<SearchHit> Search(const InvertedIndex& index,
                              std::string_view query, std::size_t k);

}  // namespace webnav
