#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "agent_internal.hpp"
#include "webnav/agent.hpp"
#include "webnav/error.hpp"
#include "webnav/text.hpp"

namespace webnav {
namespace {

std::size_t EdgeIndex(const NavGraph& graph, NodeId from, NodeId to) {
  const auto edges = graph.Edges(from);
  for (std::size_t j = 0; j < edges.size(); ++j) {
    if (edges[j] == to) return j;
  }
  throw DataError("example path uses missing edge " + std::to_string(from) +
                  " -> " + std::to_string(to));
}

}  // namespace

LossResult SupervisedLoss(const Agent& agent, const World& world,
                          const Example& example) {
  const AgentConfig& cfg = agent.config;
  const AgentParameters& p = agent.params;
  if (example.path.empty() || example.path.front() != world.graph.Start()) {
    throw DataError("example path must start at the start node");
  }
  const std::size_t steps = example.path.size();
  std::vector<std::size_t> targets(steps);
  for (std::size_t t = 0; t + 1 < steps; ++t) {
    targets[t] = EdgeIndex(world.graph, example.path[t], example.path[t + 1]);
  }
  targets[steps - 1] = world.graph.OutDegree(example.path.back());

  const QueryEncoding query = EncodeQuery(agent, world.words, example.query);

  // Forward, teacher-forced along the path.
  std::vector<internal::StepCache> caches(steps);
  std::vector<Eigen::VectorXd> probs(steps);
  std::vector<Eigen::MatrixXd> neighbors(steps);
  AgentState state = InitialState(cfg);
  LossResult result;
  for (std::size_t t = 0; t < steps; ++t) {
    const NodeId node = example.path[t];
    state = internal::ForwardStep(cfg, p, state, world.phi.Column(node), query,
                                  &caches[t]);
    neighbors[t] = NeighborContent(world, node);
    const Eigen::VectorXd logp =
        ActionLogProbabilities(state.output, neighbors[t], p.stop);
    result.cost -= logp[static_cast<Eigen::Index>(targets[t])];
    probs[t] = logp.array().exp().matrix();
  }

  // Reverse-mode accumulation.
  AgentParameters& g = result.gradient;
  g = AgentParameters::Zeros(cfg);
  const int d = cfg.dim, h = cfg.units, layers = cfg.layers;
  const bool attention = cfg.query == QueryMode::kAttention;
  Eigen::MatrixXd d_contexts;
  if (attention) d_contexts = Eigen::MatrixXd::Zero(d, query.contexts.cols());
  Eigen::VectorXd d_out_carry = Eigen::VectorXd::Zero(d);
  std::vector<Eigen::VectorXd> d_hidden_carry(layers, Eigen::VectorXd::Zero(h));
  std::vector<Eigen::VectorXd> d_cell_carry(layers, Eigen::VectorXd::Zero(h));

  for (std::size_t t = steps; t-- > 0;) {
    const internal::StepCache& c = caches[t];
    const Eigen::Index m = neighbors[t].cols();
    Eigen::VectorXd d_logits = probs[t];
    d_logits[static_cast<Eigen::Index>(targets[t])] -= 1.0;

    Eigen::VectorXd d_out = d_out_carry + d_logits[m] * p.stop;
    if (m > 0) d_out.noalias() += neighbors[t] * d_logits.head(m);
    g.stop += d_logits[m] * c.output;
    g.projection.noalias() += d_out * c.top.transpose();
    Eigen::VectorXd d_top = p.projection.transpose() * d_out;

    Eigen::VectorXd dx;
    if (cfg.core == CoreType::kFeedForward) {
      Eigen::VectorXd da = std::move(d_top);
      for (int l = layers - 1; l >= 0; --l) {
        const Eigen::VectorXd& a = c.ff[l];
        const Eigen::VectorXd dz =
            da.cwiseProduct((1.0 - a.array().square()).matrix());
        const Eigen::VectorXd& input = l == 0 ? c.x : c.ff[l - 1];
        g.layer_in[l].noalias() += dz * input.transpose();
        g.layer_bias[l] += dz;
        da = p.layer_in[l].transpose() * dz;
      }
      dx = std::move(da);
    } else {
      Eigen::VectorXd d_above = std::move(d_top);
      for (int l = layers - 1; l >= 0; --l) {
        const internal::LstmCache& lc = c.lstm[l];
        const Eigen::VectorXd dh = d_above + d_hidden_carry[l];
        const Eigen::ArrayXd one_minus_tc2 = 1.0 - lc.tanh_c.array().square();
        const Eigen::VectorXd dc =
            (dh.array() * lc.o.array() * one_minus_tc2).matrix() +
            d_cell_carry[l];
        Eigen::VectorXd d_pre(4 * h);
        d_pre.segment(0, h) = (dc.array() * lc.g.array() * lc.i.array() *
                               (1.0 - lc.i.array())).matrix();
        d_pre.segment(h, h) = (dc.array() * lc.c_prev.array() * lc.f.array() *
                               (1.0 - lc.f.array())).matrix();
        d_pre.segment(2 * h, h) = (dh.array() * lc.tanh_c.array() *
                                   lc.o.array() * (1.0 - lc.o.array())).matrix();
        d_pre.segment(3 * h, h) = (dc.array() * lc.i.array() *
                                   (1.0 - lc.g.array().square())).matrix();
        g.layer_in[l].noalias() += d_pre * lc.input.transpose();
        g.layer_rec[l].noalias() += d_pre * lc.h_prev.transpose();
        g.layer_bias[l] += d_pre;
        d_hidden_carry[l] = p.layer_rec[l].transpose() * d_pre;
        d_cell_carry[l] = dc.cwiseProduct(lc.f);
        d_above = p.layer_in[l].transpose() * d_pre;
      }
      dx = std::move(d_above);
    }

    if (attention) {
      const Eigen::VectorXd d_phi_q = dx.tail(d);
      const Eigen::MatrixXd& contexts = query.contexts;
      const double inv_k = 1.0 / static_cast<double>(contexts.cols());
      const Eigen::VectorXd d_alpha = contexts.transpose() * d_phi_q * inv_k;
      d_contexts.noalias() += d_phi_q * c.alpha.transpose() * inv_k;
      const Eigen::VectorXd d_scores =
          (c.alpha.array() * (d_alpha.array() - c.alpha.dot(d_alpha))).matrix();
      g.att_score.noalias() += c.att_hidden * d_scores;
      const Eigen::MatrixXd d_pre =
          ((p.att_score * d_scores.transpose()).array() *
           (1.0 - c.att_hidden.array().square()))
              .matrix();
      const Eigen::VectorXd d_pre_sum = d_pre.rowwise().sum();
      g.att_hidden.noalias() += d_pre_sum * c.h_prev.transpose();
      g.att_context.noalias() += d_pre * contexts.transpose();
      d_contexts.noalias() += p.att_context.transpose() * d_pre;
      d_out_carry = p.att_hidden.transpose() * d_pre_sum;
    } else {
      d_out_carry.setZero();
    }
  }

  if (attention) {
    const Eigen::Index k_count = query.embeddings.cols();
    const int half = cfg.window / 2;
    for (Eigen::Index k = 0; k < k_count; ++k) {
      for (int j = -half; j <= half; ++j) {
        const Eigen::Index src = k + j;
        if (src < 0 || src >= k_count) continue;
        g.context[j + half].noalias() +=
            d_contexts.col(k) * query.embeddings.col(src).transpose();
      }
    }
  }
  return result;
}

TrainLog Train(Agent& agent, const World& world,
               const std::vector<Example>& examples, const TrainConfig& config,
               const std::function<void(int, double)>& on_epoch) {
  if (examples.empty()) throw DataError("train: empty dataset");
  agent.config.Validate();
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(examples.size());
  std::iota(order.begin(), order.end(), 0);

  TrainLog log;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[UniformIndex(rng, i)]);
    }
    double total = 0;
    for (std::size_t position = 0; position < order.size(); ++position) {
      const Example& example = examples[order[position]];
      LossResult loss = SupervisedLoss(agent, world, example);
      if (!std::isfinite(loss.cost) || !loss.gradient.AllFinite()) {
        std::ostringstream msg;
        msg << "training diverged at epoch " << epoch << ", step " << position
            << " (example " << order[position] << ", target " << example.target
            << "): cost " << loss.cost
            << ", parameter norm " << std::sqrt(agent.params.SquaredNorm());
        throw RuntimeFailure(msg.str());
      }
      total += loss.cost;
      double scale = config.learning_rate;
      if (config.clip > 0) {
        const double norm = std::sqrt(loss.gradient.SquaredNorm());
        if (norm > config.clip) scale *= config.clip / norm;
      }
      auto params = agent.params.Views();
      const auto grads = std::as_const(loss.gradient).Views();
      for (std::size_t k = 0; k < params.size(); ++k) {
        for (Eigen::Index e = 0; e < params[k].size(); ++e) {
          params[k].data[e] -= scale * grads[k].data[e];
        }
      }
    }
    const double mean = total / static_cast<double>(examples.size());
    log.epoch_cost.push_back(mean);
    if (on_epoch) on_epoch(epoch + 1, mean);
  }
  return log;
}

}  // namespace webnav
