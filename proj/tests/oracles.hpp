#pragma once

// Brute-force reference implementations shared by unit and acceptance tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "webnav/agent.hpp"
#include "webnav/dataset.hpp"
#include "webnav/environment.hpp"
#include "webnav/search.hpp"
#include "webnav/text.hpp"

namespace webnav::testing {

inline NavGraph GraphOf(const std::vector<std::string>& texts,
                        std::vector<std::vector<NodeId>> edges = {}) {
  std::vector<Node> nodes;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    nodes.push_back(MakeNode("n" + std::to_string(i), texts[i]));
  }
  if (edges.empty()) edges.resize(texts.size());
  return NavGraph(std::move(nodes), std::move(edges), 0);
}

// ---- beam search ----

struct EnumeratedTrace {
  std::vector<NodeId> nodes;
  std::vector<std::size_t> actions;
  double log_prob;
  bool stopped;
};

// Every finished trace within max_hops moves, most likely first.
inline std::vector<EnumeratedTrace> EnumerateTraces(const Agent& agent, const World& world,
                                                    std::string_view query, int max_hops) {
  const QueryEncoding q = EncodeQuery(agent, world.words, query);
  std::vector<EnumeratedTrace> out;
  std::function<void(const EnumeratedTrace&, const AgentState&)> walk =
      [&](const EnumeratedTrace& cur, const AgentState& prev) {
        const PolicyOutput step = PolicyStep(agent, world, prev, cur.nodes.back(), q);
        const Eigen::Index stop = step.log_probs.size() - 1;
        if (static_cast<int>(cur.actions.size()) == max_hops) {
          out.push_back(cur);
          return;
        }
        EnumeratedTrace s = cur;
        s.actions.push_back(kStopAction);
        s.log_prob += step.log_probs[stop];
        s.stopped = true;
        out.push_back(s);
        for (Eigen::Index a = 0; a < stop; ++a) {
          EnumeratedTrace m = cur;
          m.actions.push_back(static_cast<std::size_t>(a));
          m.nodes.push_back(world.graph.Edges(cur.nodes.back())[a]);
          m.log_prob += step.log_probs[a];
          walk(m, step.state);
        }
      };
  walk({{world.graph.Start()}, {}, 0.0, false}, InitialState(agent.config));
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
    return a.actions < b.actions;
  });
  return out;
}

// Depth 3 from the start, out-degree at most 2, with a back edge.
inline NavGraph BinaryGraph() {
  std::vector<Node> nodes = {
      MakeNode("Root", "root page about many things"),
      MakeNode("Left", "left branch with birds and trees"),
      MakeNode("Right", "right branch with stones and rivers"),
      MakeNode("Owl", "owl birds hunt at night in trees"),
      MakeNode("Oak", "oak trees grow slowly"),
      MakeNode("Flint", "flint stones spark"),
      MakeNode("Delta", "rivers end in a delta"),
  };
  std::vector<std::vector<NodeId>> edges = {{1, 2}, {3, 4}, {5, 6}, {0}, {}, {6, 2}, {}};
  return NavGraph(std::move(nodes), std::move(edges), 0);
}

inline Agent SpreadAgent(CoreType core, QueryMode mode, int dim, std::uint64_t seed) {
  Agent agent;
  agent.config.core = core;
  agent.config.query = mode;
  agent.config.units = 6;
  agent.config.dim = dim;
  agent.config.window = mode == QueryMode::kAttention ? 2 : 0;
  agent.config.seed = seed;
  agent.params = AgentParameters::Initialize(agent.config);
  // Spread the logits so that probabilities differ clearly.
  for (auto view : agent.params.Views()) {
    for (Eigen::Index k = 0; k < view.size(); ++k) view.data[k] *= 3;
  }
  Rng rng(seed);
  for (Eigen::Index k = 0; k < agent.params.stop.size(); ++k) {
    agent.params.stop[k] = 2 * UniformReal(rng) - 1;
  }
  return agent;
}

// ---- search ----

// 50 documents over a small vocabulary so that scores collide now and then.
inline NavGraph FiftyDocs() {
  const std::vector<std::string> vocab = {"alpha", "beta",  "gamma", "delta", "echo",
                                          "fox",   "golf",  "hotel", "india", "juliet",
                                          "kilo",  "lima",  "mike",  "nova",  "oscar"};
  Rng rng(11);
  std::vector<Node> nodes;
  std::vector<std::vector<NodeId>> edges;
  for (int n = 0; n < 50; ++n) {
    std::string text;
    const auto words = 3 + UniformIndex(rng, 12);
    for (std::size_t w = 0; w < words; ++w) {
      // Skewed draw: low indices are common.
      const auto a = UniformIndex(rng, vocab.size()), b = UniformIndex(rng, vocab.size());
      text += vocab[std::min(a, b)] + (w + 1 == words ? "." : " ");
    }
    nodes.push_back(MakeNode("Doc " + std::to_string(n), text));
    edges.push_back(n + 1 < 50 ? std::vector<NodeId>{static_cast<NodeId>(n + 1)}
                               : std::vector<NodeId>{});
  }
  return NavGraph(std::move(nodes), std::move(edges), 0);
}

inline const std::vector<std::string>& SearchQueries() {
  static const std::vector<std::string> q = {
      "alpha",          "beta gamma", "nova oscar",          "Alpha ALPHA beta",
      "mike lima kilo", "zulu",       "echo fox golf hotel", "delta, delta; india",
      "juliet zulu",    "gamma alpha oscar"};
  return q;
}

// Scores every node from its raw token list.
inline std::vector<SearchHit> FullScanSearch(const NavGraph& graph, const std::string& query,
                                             std::size_t k) {
  std::vector<std::map<std::string, int>> counts(graph.NodeCount());
  for (NodeId n = 0; n < graph.NodeCount(); ++n) {
    for (auto& t : Tokenize(graph.GetNode(n).clean_text)) ++counts[n][t];
  }
  std::vector<std::string> terms;
  for (auto& t : Tokenize(query)) {
    if (std::find(terms.begin(), terms.end(), t) == terms.end()) terms.push_back(t);
  }
  std::vector<SearchHit> hits;
  for (NodeId n = 0; n < graph.NodeCount(); ++n) {
    double score = 0;
    bool any = false;
    for (const auto& t : terms) {
      if (!counts[n].count(t)) continue;
      int df = 0;
      for (auto& c : counts) df += c.count(t) ? 1 : 0;
      score += counts[n][t] * (std::log(static_cast<double>(graph.NodeCount()) / (1.0 + df)) + 1.0);
      any = true;
    }
    if (any) hits.push_back({n, score});
  }
  std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
    return a.score != b.score ? a.score > b.score : a.node < b.node;
  });
  if (hits.size() > k) hits.resize(k);
  return hits;
}

// ---- query selection ----

inline double OracleWeight(const NavGraph& g, const std::string& token, NodeId node) {
  const double n = static_cast<double>(g.NodeCount());
  double df = 0;
  for (NodeId i = 0; i < g.NodeCount(); ++i) {
    const auto tokens = Tokenize(g.GetNode(i).clean_text);
    if (std::find(tokens.begin(), tokens.end(), token) != tokens.end()) ++df;
  }
  const auto tokens = Tokenize(g.GetNode(node).clean_text);
  const double tf = static_cast<double>(std::count(tokens.begin(), tokens.end(), token));
  if (tf == 0 || df == 0) return 0;
  return tf * (std::log(n / (1 + df)) + 1);
}

inline const std::string kEightSentences =
    "Alpha beta gamma. Zeta zeta zeta eta. Beta gamma delta. Rare words like quux appear. "
    "Gamma gamma. The end of alpha. Quux quux corge grault. Last one here.";

inline NavGraph EightSentenceGraph() {
  return GraphOf({kEightSentences, "alpha gamma the end", "beta gamma delta the"});
}

// (mean token weight, first sentence) for every window, best first.
inline std::vector<std::pair<double, std::size_t>> OracleWindowRanking(const NavGraph& g,
                                                                       NodeId node, int nq) {
  std::vector<std::string> texts;
  for (const auto& s : g.GetNode(node).sentences) {
    texts.push_back(g.GetNode(node).clean_text.substr(s.start, s.end - s.start));
  }
  std::vector<std::pair<double, std::size_t>> oracle;
  for (std::size_t first = 0; first + nq <= texts.size(); ++first) {
    std::vector<std::string> tokens;
    for (int k = 0; k < nq; ++k) {
      for (auto& t : Tokenize(texts[first + k])) tokens.push_back(t);
    }
    double total = 0;
    for (auto& t : tokens) total += OracleWeight(g, t, node);
    oracle.push_back({total / tokens.size(), first});
  }
  std::sort(oracle.begin(), oracle.end(), [](auto& a, auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  return oracle;
}

// ---- generated datasets ----

// Human-readable violations of the generated-dataset rules; empty when valid.
inline std::vector<std::string> DatasetViolations(const NavGraph& g, const DatasetSplits& d,
                                                  int nh) {
  std::vector<std::string> bad;
  const auto dist = g.DistancesFromStart();
  std::map<NodeId, std::string> owner;
  for (const char* name : {"train", "valid", "test"}) {
    const auto& split = d.Split(name);
    for (std::size_t i = 0; i < split.size(); ++i) {
      const Example& ex = split[i];
      const std::string where = std::string(name) + "[" + std::to_string(i) + "]: ";
      if (!QueryContained(g.GetNode(ex.target).clean_text, ex.query)) {
        bad.push_back(where + "query not in target");
      }
      if (ex.path.empty() || ex.path.front() != g.Start() || ex.path.back() != ex.target) {
        bad.push_back(where + "path endpoints");
        continue;
      }
      if (static_cast<int>(ex.Hops()) != nh / 2) bad.push_back(where + "hop count");
      for (std::size_t k = 0; k + 1 < ex.path.size(); ++k) {
        const auto e = g.Edges(ex.path[k]);
        if (std::find(e.begin(), e.end(), ex.path[k + 1]) == e.end()) {
          bad.push_back(where + "missing edge");
        }
      }
      if (dist[ex.target] < 2) bad.push_back(where + "target too close");
      auto [it, inserted] = owner.emplace(ex.target, name);
      if (!inserted && it->second != name) bad.push_back(where + "target shared across splits");
    }
  }
  return bad;
}

}  // namespace webnav::testing
