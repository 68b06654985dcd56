#pragma once

#include <vector>

#include <Eigen/Dense>

#include "webnav/agent.hpp"

namespace webnav::internal {

struct LstmCache {
  Eigen::VectorXd input, h_prev, c_prev;
  Eigen::VectorXd i, f, o, g;
  Eigen::VectorXd c, tanh_c, h;
};

// Intermediate values of one forward step, kept for backpropagation.
struct StepCache {
  Eigen::VectorXd h_prev;      // previous projected output
  Eigen::MatrixXd att_hidden;  // d x K, tanh(U_h h_prev + U_c c_k)
  Eigen::VectorXd alpha;
  Eigen::VectorXd phi_q;
  Eigen::VectorXd x;                     // [phi_c; phi_q]
  std::vector<Eigen::VectorXd> ff;       // activations per FF layer
  std::vector<LstmCache> lstm;
  Eigen::VectorXd top;
  Eigen::VectorXd output;
};

AgentState ForwardStep(const AgentConfig& config, const AgentParameters& params,
                       const AgentState& previous, const Eigen::VectorXd& phi_c,
                       const QueryEncoding& query, StepCache* cache);

inline Eigen::VectorXd Sigmoid(const Eigen::VectorXd& v) {
  return (1.0 + (-v.array()).exp()).inverse().matrix();
}

}  // namespace webnav::internal
