#pragma once

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "webnav/agent.hpp"
#include "webnav/embeddings.hpp"
#include "webnav/graph.hpp"
#include "webnav/text.hpp"

namespace webnav::testing {

inline Node MakeNode(std::string title, std::string text) {
  Node node{std::move(title), std::move(text), {}};
  node.sentences = SplitSentences(node.clean_text);
  return node;
}

// Seven pages; start 0.
//   0 -> 1 2 3, 1 -> 4 5, 2 -> 5 6, 3 -> 0 6, 4 -> 1, 5 -> 6 4, 6 -> (none)
inline NavGraph SmallGraph() {
  std::vector<Node> nodes = {
      MakeNode("Home", "Welcome to the home page. It lists animals plants and rocks."),
      MakeNode("Animals", "Animals move around. Cats and dogs are animals."),
      MakeNode("Plants", "Plants grow in soil. Trees and ferns are plants."),
      MakeNode("Rocks", "Rocks are hard. Granite is a rock."),
      MakeNode("Cats", "Cats purr loudly. A cat chases mice at night."),
      MakeNode("Dogs", "Dogs bark at strangers. A dog fetches sticks in the park."),
      MakeNode("Ferns", "Ferns like shade. A fern has fronds and spores."),
  };
  std::vector<std::vector<NodeId>> edges = {{1, 2, 3}, {4, 5}, {5, 6}, {0, 6}, {1}, {6, 4}, {}};
  return NavGraph(std::move(nodes), std::move(edges), 0);
}

// Uniform(-1, 1) vectors for every token of the graph.
inline WordVectors RandomVectors(const NavGraph& graph, int dim, std::uint64_t seed) {
  std::vector<std::string> tokens;
  for (NodeId n = 0; n < graph.NodeCount(); ++n) {
    for (auto& t : Tokenize(graph.GetNode(n).clean_text)) tokens.push_back(t);
  }
  std::sort(tokens.begin(), tokens.end());
  tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
  std::mt19937_64 rng(seed);
  std::vector<float> data;
  for (std::size_t i = 0; i < tokens.size() * dim; ++i) {
    data.push_back(static_cast<float>(2 * UniformReal(rng) - 1));
  }
  return WordVectors(dim, std::move(tokens), std::move(data));
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("webnav_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace webnav::testing
