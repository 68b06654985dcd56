#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "webnav/corpus.hpp"
#include "webnav/dataset.hpp"
#include "webnav/graph.hpp"

namespace webnav {

inline constexpr const char* kSyntheticStartTitle = "Main Topics";

// Topic-structured toy wiki for desk-scale experiments. Pages form a tree
// below the start page (each page links its children), topped up with
// extra links, mostly inside the same top-level topic, so that every page
// has `min_branch`..`max_branch` outgoing links. The start page is a portal
// with `start_branch` links, one per top-level topic. Page text mixes shared
// filler words, topic words, sub-topic words and page-specific words, and
// describes each child page in one sentence. Every page also carries a
// References section whose links must not become edges.
struct SyntheticConfig {
  std::size_t nodes = 500;
  int min_branch = 3;
  int max_branch = 6;
  int start_branch = 24;
  int min_sentences = 4;
  int max_sentences = 8;
  std::uint64_t seed = 1;
};

std::vector<RawDocument> GenerateSyntheticCorpus(const SyntheticConfig& config);

// Question-answer pairs over a compiled graph: the question is a shuffled
// handful of distinctive words from the answer page. `unresolvable` extra
// pairs name pages that do not exist.
std::vector<QaPair> GenerateSyntheticQa(const NavGraph& graph,
                                        std::size_t count,
                                        std::size_t unresolvable,
                                        std::uint64_t seed);

}  // namespace webnav
