#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "webnav/graph.hpp"

namespace webnav {

// The one TF-IDF definition used by query selection and SimpleSearch:
//   tf(t, n) = raw count of t in n
//   idf(t)   = ln(N / (1 + df(t))) + 1
// A token absent from the corpus has weight 0 everywhere.
double InverseDocumentFrequency(std::uint32_t df, std::size_t node_count);
double TfIdfWeight(std::uint32_t tf, std::uint32_t df, std::size_t node_count);

class TfIdfIndex {
 public:
  explicit TfIdfIndex(const NavGraph& graph);

  std::size_t NodeCount() const { return node_counts_.size(); }
  std::size_t VocabularySize() const { return df_.size(); }

  std::uint32_t DocumentFrequency(std::string_view token) const;
  std::uint32_t TermCount(NodeId node, std::string_view token) const;
  double Weight(std::string_view token, NodeId node) const;

 private:
  std::optional<std::uint32_t> TokenId(std::string_view token) const;

  std::unordered_map<std::string, std::uint32_t> vocabulary_;
  std::vector<std::uint32_t> df_;
  // Per node: (token id, count) sorted by token id.
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>>
      node_counts_;
};

}  // namespace webnav
