#include "webnav/environment.hpp"

#include <algorithm>

#include "webnav/text.hpp"

namespace webnav {

std::string_view EnvErrorName(EnvErrorCode code) {
  switch (code) {
    case EnvErrorCode::kBudgetExceeded: return "BudgetExceeded";
    case EnvErrorCode::kMoveUnexplored: return "MoveUnexplored";
    case EnvErrorCode::kEpisodeOver: return "EpisodeOver";
    case EnvErrorCode::kIndexError: return "IndexError";
  }
  return "Unknown";
}

std::string_view OutcomeName(Outcome outcome) {
  switch (outcome) {
    case Outcome::kRunning: return "running";
    case Outcome::kStopped: return "stopped";
    case Outcome::kGaveUp: return "gave-up";
    case Outcome::kHopLimit: return "hop-limit";
  }
  return "unknown";
}

bool QueryContained(std::string_view node_text, std::string_view query) {
  const auto needle = Tokenize(query);
  if (needle.empty()) throw DataError("query has no tokens");
  const auto hay = Tokenize(node_text);
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) !=
         hay.end();
}

Episode::Episode(const NavGraph& graph, Example example, EnvConfig config)
    : graph_(&graph),
      example_(std::move(example)),
      config_(config),
      current_(graph.Start()) {
  if (config_.max_peeks < 1 || config_.max_hops < 1) {
    throw DataError("environment: N_n and N_h must be >= 1");
  }
  if (example_.path.empty()) throw DataError("environment: empty example path");
  visited_.push_back(current_);
}

Observation Episode::Observe() const {
  const Node& node = graph_->GetNode(current_);
  Observation obs;
  obs.query = example_.query;
  obs.node = current_;
  obs.title = node.title;
  obs.text = node.clean_text;
  const auto edges = graph_->Edges(current_);
  obs.out_degree = edges.size();
  for (NodeId target : edges) {
    obs.link_titles.push_back(graph_->GetNode(target).title);
  }
  for (std::size_t edge : peeked_) {
    const Node& neighbor = graph_->GetNode(edges[edge]);
    obs.peeked.emplace(edge, PeekedNeighbor{neighbor.title, neighbor.clean_text});
  }
  obs.remaining_peeks = config_.max_peeks - static_cast<int>(peeked_.size());
  obs.hops_taken = hops_;
  return obs;
}

void Episode::RequireRunning() const {
  if (Finished()) {
    throw EnvError(EnvErrorCode::kEpisodeOver, "episode is over");
  }
}

void Episode::RequireEdge(std::size_t edge) const {
  if (edge >= graph_->OutDegree(current_)) {
    throw EnvError(EnvErrorCode::kIndexError,
                   "edge " + std::to_string(edge) + " out of range (out-degree " +
                       std::to_string(graph_->OutDegree(current_)) + ")");
  }
}

void Episode::Peek(std::size_t edge) {
  RequireRunning();
  RequireEdge(edge);
  if (peeked_.count(edge)) return;
  if (static_cast<int>(peeked_.size()) >= config_.max_peeks) {
    throw EnvError(EnvErrorCode::kBudgetExceeded,
                   "peek budget of " + std::to_string(config_.max_peeks) +
                       " exhausted at this node");
  }
  peeked_.insert(edge);
}

void Episode::Move(std::size_t edge) {
  RequireRunning();
  RequireEdge(edge);
  if (!config_.allow_blind_moves && !peeked_.count(edge)) {
    throw EnvError(EnvErrorCode::kMoveUnexplored,
                   "edge " + std::to_string(edge) + " was not peeked");
  }
  current_ = graph_->Edges(current_)[edge];
  ++hops_;
  peeked_.clear();
  visited_.push_back(current_);
  if (hops_ >= config_.max_hops) {
    outcome_ = Outcome::kHopLimit;
    reward_ = 0;
  }
}

int Episode::Stop() {
  RequireRunning();
  reward_ = QueryContained(graph_->GetNode(current_).clean_text, example_.query)
                ? 1
                : 0;
  outcome_ = Outcome::kStopped;
  return reward_;
}

void Episode::GiveUp() {
  RequireRunning();
  outcome_ = Outcome::kGaveUp;
  reward_ = 0;
}

}  // namespace webnav
