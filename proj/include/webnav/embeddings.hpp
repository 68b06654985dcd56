#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "webnav/graph.hpp"

namespace webnav {

// Token -> d-dimensional float32 vector. Immutable after construction.
class WordVectors {
 public:
  WordVectors() = default;
  // `data` holds tokens.size() * dim values, row-major per token.
  WordVectors(int dim, std::vector<std::string> tokens,
              std::vector<float> data);

  int Dim() const { return dim_; }
  std::size_t Size() const { return tokens_.size(); }
  const std::vector<std::string>& Tokens() const { return tokens_; }

  // nullptr for out-of-vocabulary tokens.
  const float* Find(std::string_view token) const;
  std::span<const float> Vector(std::size_t row) const;

  // Text format: "count dim" header, then "token v1 ... vd" per line.
  std::string ToText() const;
  void Save(const std::filesystem::path& path) const;
  // Header line optional; duplicate tokens keep the last vector (warning).
  static WordVectors Parse(std::string_view text);
  static WordVectors Load(const std::filesystem::path& path);

  bool operator==(const WordVectors& other) const {
    return dim_ == other.dim_ && tokens_ == other.tokens_ &&
           data_ == other.data_;
  }

 private:
  int dim_ = 0;
  std::vector<std::string> tokens_;
  std::vector<float> data_;
  std::unordered_map<std::string, std::size_t> rows_;
};

// Mean of the vectors of in-vocabulary tokens of `text`, accumulated in
// double. Unknown tokens are skipped; no known tokens gives the zero vector.
Eigen::VectorXd ContentVector(std::string_view text, const WordVectors& wv);

// Precomputed content vectors of every node, stored as float32.
class PhiTable {
 public:
  PhiTable() = default;
  PhiTable(int dim, std::size_t nodes, std::vector<float> data);

  static PhiTable Compute(const NavGraph& graph, const WordVectors& wv);

  int Dim() const { return dim_; }
  std::size_t Nodes() const { return nodes_; }
  // Column `node` of a d x N matrix.
  Eigen::Ref<const Eigen::VectorXd> Column(NodeId node) const {
    return matrix_.col(node);
  }
  const Eigen::MatrixXd& Matrix() const { return matrix_; }

  // phi.bin: uint32 d, then N*d little-endian float32 values.
  std::string Serialize() const;
  void Save(const std::filesystem::path& path) const;
  static PhiTable Load(const std::filesystem::path& path,
                       std::size_t expected_nodes);

 private:
  int dim_ = 0;
  std::size_t nodes_ = 0;
  std::vector<float> data_;
  Eigen::MatrixXd matrix_;
};

struct CbowConfig {
  int dim = 64;
  int window = 5;
  int epochs = 30;
  double learning_rate = 0.05;
  int negatives = 5;
  std::uint64_t seed = 1;
};

// Continuous bag-of-words with negative sampling over the shared tokenizer's
// stream. Context windows never cross document boundaries. Single-threaded
// and deterministic for a fixed seed.
WordVectors TrainCbow(const std::vector<std::string>& texts,
                      const CbowConfig& config);

}  // namespace webnav
