#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "webnav/dataset.hpp"
#include "webnav/embeddings.hpp"
#include "webnav/graph.hpp"

namespace webnav {

enum class CoreType { kFeedForward, kRecurrent };
enum class QueryMode { kBagOfWords, kAttention };

std::string_view CoreTypeName(CoreType core);
std::string_view QueryModeName(QueryMode mode);
CoreType ParseCoreType(std::string_view name);
QueryMode ParseQueryMode(std::string_view name);

struct AgentConfig {
  CoreType core = CoreType::kRecurrent;
  int layers = 1;
  int units = 512;  // H
  int dim = 64;     // d, must match the word vectors
  QueryMode query = QueryMode::kBagOfWords;
  int window = 0;   // u, even
  int beam_width = 4;
  std::uint64_t seed = 0;

  void Validate() const;
  bool operator==(const AgentConfig&) const = default;
};

struct TensorView {
  std::string name;
  double* data = nullptr;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  Eigen::Index size() const { return rows * cols; }
};

struct ConstTensorView {
  std::string name;
  const double* data = nullptr;
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  Eigen::Index size() const { return rows * cols; }
};

// All trainable tensors. Feedforward layers are `tanh(W x + b)`; recurrent
// layers are LSTMs whose stacked gate rows are ordered input, forget, output,
// candidate. The top layer is projected to d so it can be compared with
// content vectors. Attention tensors are empty in bag-of-words mode.
struct AgentParameters {
  std::vector<Eigen::MatrixXd> layer_in;   // FF: H x in, REC: 4H x in
  std::vector<Eigen::MatrixXd> layer_rec;  // REC only: 4H x H
  std::vector<Eigen::VectorXd> layer_bias;
  Eigen::MatrixXd projection;              // d x H
  Eigen::VectorXd stop;                    // stop action vector, d
  std::vector<Eigen::MatrixXd> context;    // one d x d matrix per offset -u/2..u/2
  Eigen::MatrixXd att_hidden;              // d x d, applied to h_{t-1}
  Eigen::MatrixXd att_context;             // d x d, applied to c_k
  Eigen::VectorXd att_score;               // d

  // Correct shapes, all zero.
  static AgentParameters Zeros(const AgentConfig& config);
  // Glorot-uniform weights, zero biases except +1 on LSTM forget gates.
  static AgentParameters Initialize(const AgentConfig& config);

  std::vector<TensorView> Views();
  std::vector<ConstTensorView> Views() const;

  double SquaredNorm() const;
  bool AllFinite() const;
  bool operator==(const AgentParameters& other) const;
};

struct Agent {
  AgentConfig config;
  AgentParameters params;
  std::uint64_t graph_checksum = 0;
};

// Checkpoint: magic, version, graph checksum, config as JSON, then named
// float32 tensor sections.
std::string SerializeCheckpoint(const Agent& agent);
Agent DeserializeCheckpoint(std::string_view bytes);
void SaveCheckpoint(const std::filesystem::path& path, const Agent& agent);
Agent LoadCheckpoint(const std::filesystem::path& path);

// Everything the agent reads from the world: adjacency, precomputed content
// vectors and the fixed word vectors.
struct World {
  const NavGraph& graph;
  const PhiTable& phi;
  const WordVectors& words;
};

// Bag-of-words query vector; identical to ContentVector. Warns when no
// query token is in the vocabulary.
Eigen::VectorXd EncodeQueryBow(std::string_view query, const WordVectors& wv);

// Embeddings of the in-vocabulary query tokens, d x K in query order.
// Throws DataError when K is zero.
Eigen::MatrixXd QueryEmbeddings(std::string_view query, const WordVectors& wv);

// c_k = sum over offsets j in [-u/2, u/2] of W_j e_{k+j}; positions outside
// the query are skipped.
Eigen::MatrixXd QueryContextVectors(const Eigen::MatrixXd& embeddings,
                                    const AgentParameters& params, int window);

struct AttentionResult {
  Eigen::VectorXd phi_q;
  Eigen::VectorXd alpha;
  Eigen::VectorXd scores;  // beta
};

// beta_k = w . tanh(U_h h_prev + U_c c_k), alpha = softmax(beta),
// phi_q = (1/K) sum_k alpha_k c_k.
AttentionResult AttentionPool(const AgentParameters& params,
                              const Eigen::VectorXd& h_prev,
                              const Eigen::MatrixXd& contexts);

struct QueryEncoding {
  Eigen::VectorXd bow;
  Eigen::MatrixXd contexts;  // attention mode only
  Eigen::MatrixXd embeddings;
};

QueryEncoding EncodeQuery(const Agent& agent, const WordVectors& wv,
                          std::string_view query);

// Agent memory carried between steps. `output` is the last projected hidden
// state h_{t-1} (zero before the first step); `hidden`/`cell` are per-layer
// LSTM states (unused by the feedforward core).
struct AgentState {
  Eigen::VectorXd output;
  std::vector<Eigen::VectorXd> hidden;
  std::vector<Eigen::VectorXd> cell;
};

AgentState InitialState(const AgentConfig& config);

// One application of the core: returns the new state whose `output` is h_t.
AgentState CoreStep(const AgentConfig& config, const AgentParameters& params,
                    const AgentState& previous, const Eigen::VectorXd& phi_c,
                    const Eigen::VectorXd& phi_q);

// Softmax over [phi_c(s_j) . h for each neighbor j, v_stop . h]. The stop
// action is the last entry. `neighbors` is d x m.
Eigen::VectorXd ActionDistribution(const Eigen::VectorXd& h,
                                   const Eigen::MatrixXd& neighbors,
                                   const Eigen::VectorXd& stop);
Eigen::VectorXd ActionLogProbabilities(const Eigen::VectorXd& h,
                                       const Eigen::MatrixXd& neighbors,
                                       const Eigen::VectorXd& stop);

Eigen::MatrixXd NeighborContent(const World& world, NodeId node);

struct PolicyOutput {
  AgentState state;
  Eigen::VectorXd log_probs;  // out-degree + 1 entries, stop last
};

// Reads `node`, updates the agent state and scores every action there.
PolicyOutput PolicyStep(const Agent& agent, const World& world,
                        const AgentState& previous, NodeId node,
                        const QueryEncoding& query);

struct LossResult {
  double cost = 0;
  AgentParameters gradient;
};

// Teacher-forced negative log-likelihood of the example's path followed by
// the stop action at its target, with exact gradients for every tensor.
LossResult SupervisedLoss(const Agent& agent, const World& world,
                          const Example& example);

struct TrainConfig {
  double learning_rate = 0.05;
  int epochs = 1;
  double clip = 5.0;  // global gradient-norm clip; <= 0 disables
  std::uint64_t seed = 0;
};

struct TrainLog {
  std::vector<double> epoch_cost;  // mean cost per example
};

// Plain per-example SGD with seeded epoch shuffling. Starts from the
// agent's current parameters, so a loaded checkpoint can be fine-tuned.
TrainLog Train(Agent& agent, const World& world,
               const std::vector<Example>& examples, const TrainConfig& config,
               const std::function<void(int, double)>& on_epoch = {});

inline constexpr std::size_t kStopAction = std::numeric_limits<std::size_t>::max();

struct Trace {
  std::vector<NodeId> nodes;
  std::vector<std::size_t> actions;  // edge indices; kStopAction for stop
  double log_prob = 0;
  bool stopped = false;  // false: force-finished at the hop limit
  AgentState state;
  NodeId End() const { return nodes.back(); }
};

// Forward-only beam search. Each depth expands every live trace over all its
// actions; the `width` most likely candidates are kept, those that chose stop
// join the finished pool. After `max_hops` moves a trace is finished without
// stopping. Returns at most `width` finished traces, most likely first.
std::vector<Trace> BeamSearch(const Agent& agent, const World& world,
                              std::string_view query, int width, int max_hops);

}  // namespace webnav
