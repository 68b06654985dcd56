#include <algorithm>

#include "webnav/agent.hpp"
#include "webnav/error.hpp"

namespace webnav {
namespace {

struct Live {
  Trace trace;
  Eigen::VectorXd log_probs;  // at the trace's current node
};

struct Candidate {
  std::size_t parent;
  std::size_t action;  // index into the parent's distribution; last = stop
  double log_prob;
};

bool RankBefore(const Trace& a, const Trace& b) {
  if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
  return a.actions < b.actions;
}

}  // namespace

std::vector<Trace> BeamSearch(const Agent& agent, const World& world,
                              std::string_view query, int width,
                              int max_hops) {
  if (width < 1) throw DataError("beam search: width must be >= 1");
  const QueryEncoding encoding = EncodeQuery(agent, world.words, query);
  const NodeId start = world.graph.Start();

  std::vector<Live> live;
  {
    PolicyOutput out =
        PolicyStep(agent, world, InitialState(agent.config), start, encoding);
    Trace t;
    t.nodes = {start};
    t.state = std::move(out.state);
    live.push_back({std::move(t), std::move(out.log_probs)});
  }

  std::vector<Trace> finished;
  for (int depth = 0; !live.empty(); ++depth) {
    if (depth >= max_hops) {
      for (auto& l : live) finished.push_back(std::move(l.trace));
      break;
    }
    std::vector<Candidate> candidates;
    for (std::size_t i = 0; i < live.size(); ++i) {
      const auto& lp = live[i].log_probs;
      for (Eigen::Index a = 0; a < lp.size(); ++a) {
        candidates.push_back({i, static_cast<std::size_t>(a),
                              live[i].trace.log_prob + lp[a]});
      }
    }
    // Generation order (parent rank, then action) settles ties.
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& a, const Candidate& b) {
                       return a.log_prob > b.log_prob;
                     });
    if (candidates.size() > static_cast<std::size_t>(width)) {
      candidates.resize(width);
    }

    std::vector<Live> next;
    for (const Candidate& c : candidates) {
      const Live& parent = live[c.parent];
      const std::size_t stop_index =
          static_cast<std::size_t>(parent.log_probs.size()) - 1;
      Trace t;
      t.nodes = parent.trace.nodes;
      t.actions = parent.trace.actions;
      t.log_prob = c.log_prob;
      if (c.action == stop_index) {
        t.actions.push_back(kStopAction);
        t.stopped = true;
        t.state = parent.trace.state;
        finished.push_back(std::move(t));
        continue;
      }
      const NodeId node = world.graph.Edges(parent.trace.End())[c.action];
      t.actions.push_back(c.action);
      t.nodes.push_back(node);
      PolicyOutput out =
          PolicyStep(agent, world, parent.trace.state, node, encoding);
      t.state = std::move(out.state);
      next.push_back({std::move(t), std::move(out.log_probs)});
    }
    live = std::move(next);
  }

  std::stable_sort(finished.begin(), finished.end(), RankBefore);
  if (finished.size() > static_cast<std::size_t>(width)) finished.resize(width);
  return finished;
}

}  // namespace webnav
