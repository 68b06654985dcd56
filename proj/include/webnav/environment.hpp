#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "webnav/dataset.hpp"
#include "webnav/error.hpp"
#include "webnav/graph.hpp"

namespace webnav {

struct EnvConfig {
  int max_peeks = 4;   // N_n: distinct edges explored per node
  int max_hops = 8;    // N_h
  int query_size = 0;  // N_q, informational
  // Lets moves follow edges that were not peeked first. Batch agent
  // evaluation turns this on; human sessions keep it off.
  bool allow_blind_moves = false;
};

enum class EnvErrorCode {
  kBudgetExceeded,
  kMoveUnexplored,
  kEpisodeOver,
  kIndexError,
};

std::string_view EnvErrorName(EnvErrorCode code);

class EnvError : public Error {
 public:
  EnvError(EnvErrorCode code, const std::string& what)
      : Error(Kind::kRuntime, what), code_(code) {}
  EnvErrorCode code() const { return code_; }

 private:
  EnvErrorCode code_;
};

enum class Outcome { kRunning, kStopped, kGaveUp, kHopLimit };

std::string_view OutcomeName(Outcome outcome);

struct PeekedNeighbor {
  std::string title;
  std::string text;
};

// What an agent may see: the current node, the titles its links point to,
// and the text of neighbors peeked at this node. Nothing else.
struct Observation {
  std::string query;
  NodeId node = 0;
  std::string title;
  std::string text;
  std::size_t out_degree = 0;
  std::vector<std::string> link_titles;
  std::map<std::size_t, PeekedNeighbor> peeked;
  int remaining_peeks = 0;
  int hops_taken = 0;
};

// True iff the normalized token sequence of `query` occurs contiguously in
// the normalized token sequence of `node_text`. Throws DataError for a query
// with no tokens.
bool QueryContained(std::string_view node_text, std::string_view query);

// One navigation episode over a shared immutable graph. Constructing it is
// the reset: the agent stands on the start node with nothing peeked.
class Episode {
 public:
  Episode(const NavGraph& graph, Example example, EnvConfig config);

  Observation Observe() const;

  void Peek(std::size_t edge);
  void Move(std::size_t edge);
  // Ends the episode and pays the binary containment reward.
  int Stop();
  void GiveUp();

  NodeId Current() const { return current_; }
  int HopsTaken() const { return hops_; }
  bool Finished() const { return outcome_ != Outcome::kRunning; }
  Outcome GetOutcome() const { return outcome_; }
  int Reward() const { return reward_; }
  const std::vector<NodeId>& Visited() const { return visited_; }
  const std::set<std::size_t>& PeekedHere() const { return peeked_; }
  const Example& GetExample() const { return example_; }
  const EnvConfig& Config() const { return config_; }

 private:
  void RequireRunning() const;
  void RequireEdge(std::size_t edge) const;

  const NavGraph* graph_;
  Example example_;
  EnvConfig config_;
  NodeId current_;
  int hops_ = 0;
  std::set<std::size_t> peeked_;
  Outcome outcome_ = Outcome::kRunning;
  int reward_ = 0;
  std::vector<NodeId> visited_;
};

}  // namespace webnav
