#include "webnav/agent.hpp"

#include <cmath>
#include <random>

#include <json.hpp>

#include "agent_internal.hpp"
#include "binary_io.hpp"
#include "webnav/error.hpp"
#include "webnav/log.hpp"
#include "webnav/text.hpp"

namespace webnav {

std::string_view CoreTypeName(CoreType core) {
  return core == CoreType::kFeedForward ? "ff" : "rec";
}

std::string_view QueryModeName(QueryMode mode) {
  return mode == QueryMode::kBagOfWords ? "bow" : "att";
}

CoreType ParseCoreType(std::string_view name) {
  if (name == "ff") return CoreType::kFeedForward;
  if (name == "rec") return CoreType::kRecurrent;
  throw DataError("unknown core type '" + std::string(name) + "'");
}

QueryMode ParseQueryMode(std::string_view name) {
  if (name == "bow") return QueryMode::kBagOfWords;
  if (name == "att") return QueryMode::kAttention;
  throw DataError("unknown query mode '" + std::string(name) + "'");
}

void AgentConfig::Validate() const {
  if (layers < 1) throw DataError("agent: layers must be >= 1");
  if (units < 1) throw DataError("agent: units must be >= 1");
  if (dim < 1) throw DataError("agent: dim must be >= 1");
  if (window < 0 || window % 2 != 0) {
    throw DataError("agent: window u must be even and >= 0");
  }
  if (beam_width < 1) throw DataError("agent: beam width must be >= 1");
}

AgentParameters AgentParameters::Zeros(const AgentConfig& config) {
  config.Validate();
  const int d = config.dim, h = config.units;
  const bool rec = config.core == CoreType::kRecurrent;
  const int gates = rec ? 4 * h : h;
  AgentParameters p;
  for (int l = 0; l < config.layers; ++l) {
    const int in = l == 0 ? 2 * d : h;
    p.layer_in.push_back(Eigen::MatrixXd::Zero(gates, in));
    if (rec) p.layer_rec.push_back(Eigen::MatrixXd::Zero(gates, h));
    p.layer_bias.push_back(Eigen::VectorXd::Zero(gates));
  }
  p.projection = Eigen::MatrixXd::Zero(d, h);
  p.stop = Eigen::VectorXd::Zero(d);
  if (config.query == QueryMode::kAttention) {
    for (int j = 0; j <= config.window; ++j) {
      p.context.push_back(Eigen::MatrixXd::Zero(d, d));
    }
    p.att_hidden = Eigen::MatrixXd::Zero(d, d);
    p.att_context = Eigen::MatrixXd::Zero(d, d);
    p.att_score = Eigen::VectorXd::Zero(d);
  }
  return p;
}

AgentParameters AgentParameters::Initialize(const AgentConfig& config) {
  AgentParameters p = Zeros(config);
  std::mt19937_64 rng(config.seed);
  auto glorot = [&](double* data, Eigen::Index rows, Eigen::Index cols) {
    const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
    for (Eigen::Index i = 0; i < rows * cols; ++i) {
      data[i] = (2.0 * UniformReal(rng) - 1.0) * a;
    }
  };
  for (auto& view : p.Views()) {
    if (view.name.find("bias") != std::string::npos) continue;
    glorot(view.data, view.rows, view.cols);
  }
  if (config.core == CoreType::kRecurrent) {
    const int h = config.units;
    for (auto& b : p.layer_bias) b.segment(h, h).setOnes();
  }
  return p;
}

namespace {

template <typename View, typename Params>
std::vector<View> CollectViews(Params& p) {
  std::vector<View> views;
  auto add = [&](std::string name, auto& m) {
    if (m.size() == 0) return;
    views.push_back({std::move(name), m.data(), m.rows(), m.cols()});
  };
  for (std::size_t l = 0; l < p.layer_in.size(); ++l) {
    add("layer" + std::to_string(l) + ".in", p.layer_in[l]);
  }
  for (std::size_t l = 0; l < p.layer_rec.size(); ++l) {
    add("layer" + std::to_string(l) + ".rec", p.layer_rec[l]);
  }
  for (std::size_t l = 0; l < p.layer_bias.size(); ++l) {
    add("layer" + std::to_string(l) + ".bias", p.layer_bias[l]);
  }
  add("projection", p.projection);
  add("stop", p.stop);
  for (std::size_t j = 0; j < p.context.size(); ++j) {
    add("context" + std::to_string(j), p.context[j]);
  }
  add("att.hidden", p.att_hidden);
  add("att.context", p.att_context);
  add("att.score", p.att_score);
  return views;
}

}  // namespace

std::vector<TensorView> AgentParameters::Views() {
  return CollectViews<TensorView>(*this);
}

std::vector<ConstTensorView> AgentParameters::Views() const {
  return CollectViews<ConstTensorView>(*this);
}

double AgentParameters::SquaredNorm() const {
  double sum = 0;
  for (const auto& v : Views()) {
    for (Eigen::Index i = 0; i < v.size(); ++i) sum += v.data[i] * v.data[i];
  }
  return sum;
}

bool AgentParameters::AllFinite() const {
  for (const auto& v : Views()) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (!std::isfinite(v.data[i])) return false;
    }
  }
  return true;
}

bool AgentParameters::operator==(const AgentParameters& other) const {
  const auto a = Views();
  const auto b = other.Views();
  if (a.size() != b.size()) return false;
  for (std::size_t t = 0; t < a.size(); ++t) {
    if (a[t].name != b[t].name || a[t].rows != b[t].rows ||
        a[t].cols != b[t].cols) {
      return false;
    }
    for (Eigen::Index i = 0; i < a[t].size(); ++i) {
      if (a[t].data[i] != b[t].data[i]) return false;
    }
  }
  return true;
}

namespace {

constexpr std::string_view kCheckpointMagic = "WEBNAVCK";
constexpr std::uint32_t kCheckpointVersion = 1;

nlohmann::ordered_json ConfigToJson(const AgentConfig& c) {
  nlohmann::ordered_json j;
  j["core"] = CoreTypeName(c.core);
  j["layers"] = c.layers;
  j["units"] = c.units;
  j["dim"] = c.dim;
  j["query"] = QueryModeName(c.query);
  j["window"] = c.window;
  j["beam_width"] = c.beam_width;
  j["seed"] = c.seed;
  return j;
}

AgentConfig ConfigFromJson(const nlohmann::json& j) {
  AgentConfig c;
  c.core = ParseCoreType(j.at("core").get<std::string>());
  c.layers = j.at("layers").get<int>();
  c.units = j.at("units").get<int>();
  c.dim = j.at("dim").get<int>();
  c.query = ParseQueryMode(j.at("query").get<std::string>());
  c.window = j.at("window").get<int>();
  c.beam_width = j.at("beam_width").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.Validate();
  return c;
}

}  // namespace

std::string SerializeCheckpoint(const Agent& agent) {
  internal::ByteWriter w;
  w.Raw(kCheckpointMagic.data(), kCheckpointMagic.size());
  w.U32(kCheckpointVersion);
  w.U64(agent.graph_checksum);
  w.Bytes(ConfigToJson(agent.config).dump());
  const auto views = agent.params.Views();
  w.U32(static_cast<std::uint32_t>(views.size()));
  for (const auto& v : views) {
    w.Bytes(v.name);
    w.U32(static_cast<std::uint32_t>(v.rows));
    w.U32(static_cast<std::uint32_t>(v.cols));
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      w.F32(static_cast<float>(v.data[i]));
    }
  }
  return w.Take();
}

Agent DeserializeCheckpoint(std::string_view bytes) {
  internal::ByteReader r(bytes, "checkpoint");
  if (r.Fixed(kCheckpointMagic.size()) != kCheckpointMagic) r.Fail("bad magic");
  const std::uint32_t version = r.U32();
  if (version != kCheckpointVersion) {
    r.Fail("unsupported version " + std::to_string(version));
  }
  Agent agent;
  agent.graph_checksum = r.U64();
  try {
    agent.config = ConfigFromJson(nlohmann::json::parse(r.Bytes()));
  } catch (const nlohmann::json::exception& e) {
    r.Fail(std::string("bad config: ") + e.what());
  }
  agent.params = AgentParameters::Zeros(agent.config);
  auto views = agent.params.Views();
  if (r.U32() != views.size()) r.Fail("tensor count does not match config");
  for (auto& v : views) {
    const std::string name = r.Bytes();
    const std::uint32_t rows = r.U32(), cols = r.U32();
    if (name != v.name || rows != v.rows || cols != v.cols) {
      r.Fail("tensor '" + name + "' does not match config");
    }
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      const float f = r.F32();
      if (!std::isfinite(f)) r.Fail("non-finite value in '" + name + "'");
      v.data[i] = f;
    }
  }
  if (!r.AtEnd()) r.Fail("trailing bytes");
  return agent;
}

void SaveCheckpoint(const std::filesystem::path& path, const Agent& agent) {
  internal::WriteFile(path, SerializeCheckpoint(agent));
}

Agent LoadCheckpoint(const std::filesystem::path& path) {
  return DeserializeCheckpoint(internal::ReadFile(path));
}

Eigen::VectorXd EncodeQueryBow(std::string_view query, const WordVectors& wv) {
  Eigen::VectorXd v = ContentVector(query, wv);
  if (v.isZero(0.0)) {
    bool any_known = false;
    for (const auto& t : Tokenize(query)) any_known |= wv.Find(t) != nullptr;
    if (!any_known) Warn("query has no in-vocabulary tokens; using zero vector");
  }
  return v;
}

Eigen::MatrixXd QueryEmbeddings(std::string_view query, const WordVectors& wv) {
  std::vector<const float*> known;
  for (const auto& t : Tokenize(query)) {
    if (const float* v = wv.Find(t)) known.push_back(v);
  }
  if (known.empty()) {
    throw DataError("query has no in-vocabulary tokens for attention");
  }
  Eigen::MatrixXd e(wv.Dim(), static_cast<Eigen::Index>(known.size()));
  for (std::size_t k = 0; k < known.size(); ++k) {
    for (int i = 0; i < wv.Dim(); ++i) e(i, k) = known[k][i];
  }
  return e;
}

Eigen::MatrixXd QueryContextVectors(const Eigen::MatrixXd& embeddings,
                                    const AgentParameters& params, int window) {
  const Eigen::Index k_count = embeddings.cols();
  const int half = window / 2;
  Eigen::MatrixXd contexts = Eigen::MatrixXd::Zero(embeddings.rows(), k_count);
  for (Eigen::Index k = 0; k < k_count; ++k) {
    for (int j = -half; j <= half; ++j) {
      const Eigen::Index src = k + j;
      if (src < 0 || src >= k_count) continue;
      contexts.col(k).noalias() += params.context[j + half] * embeddings.col(src);
    }
  }
  return contexts;
}

namespace {

Eigen::VectorXd Softmax(const Eigen::VectorXd& logits) {
  const double m = logits.maxCoeff();
  Eigen::VectorXd e = (logits.array() - m).exp().matrix();
  return e / e.sum();
}

Eigen::VectorXd Attend(const AgentParameters& params,
                       const Eigen::VectorXd& h_prev,
                       const Eigen::MatrixXd& contexts,
                       Eigen::MatrixXd* hidden_out, Eigen::VectorXd* alpha_out,
                       Eigen::VectorXd* scores_out) {
  const Eigen::VectorXd from_h = params.att_hidden * h_prev;
  Eigen::MatrixXd hidden = params.att_context * contexts;
  hidden.colwise() += from_h;
  hidden = hidden.array().tanh().matrix();
  const Eigen::VectorXd scores = hidden.transpose() * params.att_score;
  const Eigen::VectorXd alpha = Softmax(scores);
  Eigen::VectorXd phi_q =
      contexts * alpha / static_cast<double>(contexts.cols());
  if (hidden_out) *hidden_out = std::move(hidden);
  if (alpha_out) *alpha_out = alpha;
  if (scores_out) *scores_out = scores;
  return phi_q;
}

}  // namespace

AttentionResult AttentionPool(const AgentParameters& params,
                              const Eigen::VectorXd& h_prev,
                              const Eigen::MatrixXd& contexts) {
  AttentionResult r;
  r.phi_q = Attend(params, h_prev, contexts, nullptr, &r.alpha, &r.scores);
  return r;
}

QueryEncoding EncodeQuery(const Agent& agent, const WordVectors& wv,
                          std::string_view query) {
  if (wv.Dim() != agent.config.dim) {
    throw DataError("word vector dimension " + std::to_string(wv.Dim()) +
                    " does not match agent dim " +
                    std::to_string(agent.config.dim));
  }
  QueryEncoding enc;
  if (agent.config.query == QueryMode::kBagOfWords) {
    enc.bow = EncodeQueryBow(query, wv);
  } else {
    enc.embeddings = QueryEmbeddings(query, wv);
    enc.contexts =
        QueryContextVectors(enc.embeddings, agent.params, agent.config.window);
  }
  return enc;
}

AgentState InitialState(const AgentConfig& config) {
  AgentState s;
  s.output = Eigen::VectorXd::Zero(config.dim);
  if (config.core == CoreType::kRecurrent) {
    s.hidden.assign(config.layers, Eigen::VectorXd::Zero(config.units));
    s.cell.assign(config.layers, Eigen::VectorXd::Zero(config.units));
  }
  return s;
}

namespace internal {

AgentState ForwardStep(const AgentConfig& config, const AgentParameters& params,
                       const AgentState& previous, const Eigen::VectorXd& phi_c,
                       const QueryEncoding& query, StepCache* cache) {
  const int d = config.dim;
  Eigen::VectorXd phi_q;
  if (config.query == QueryMode::kBagOfWords) {
    phi_q = query.bow;
  } else if (cache) {
    cache->h_prev = previous.output;
    phi_q = Attend(params, previous.output, query.contexts, &cache->att_hidden,
                   &cache->alpha, nullptr);
  } else {
    phi_q = Attend(params, previous.output, query.contexts, nullptr, nullptr,
                   nullptr);
  }
  if (phi_c.size() != d || phi_q.size() != d) {
    throw DataError("core step: input dimension mismatch");
  }
  Eigen::VectorXd x(2 * d);
  x << phi_c, phi_q;

  AgentState next;
  Eigen::VectorXd top;
  if (config.core == CoreType::kFeedForward) {
    Eigen::VectorXd a = x;
    for (int l = 0; l < config.layers; ++l) {
      a = (params.layer_in[l] * a + params.layer_bias[l]).array().tanh().matrix();
      if (cache) cache->ff.push_back(a);
    }
    top = std::move(a);
  } else {
    const int h = config.units;
    if (static_cast<int>(previous.hidden.size()) != config.layers) {
      throw DataError("core step: recurrent state has wrong layer count");
    }
    next.hidden.resize(config.layers);
    next.cell.resize(config.layers);
    Eigen::VectorXd input = x;
    for (int l = 0; l < config.layers; ++l) {
      const Eigen::VectorXd pre = params.layer_in[l] * input +
                                  params.layer_rec[l] * previous.hidden[l] +
                                  params.layer_bias[l];
      const Eigen::VectorXd i = Sigmoid(pre.segment(0, h));
      const Eigen::VectorXd f = Sigmoid(pre.segment(h, h));
      const Eigen::VectorXd o = Sigmoid(pre.segment(2 * h, h));
      const Eigen::VectorXd g = pre.segment(3 * h, h).array().tanh().matrix();
      const Eigen::VectorXd c =
          f.cwiseProduct(previous.cell[l]) + i.cwiseProduct(g);
      const Eigen::VectorXd tanh_c = c.array().tanh().matrix();
      const Eigen::VectorXd hl = o.cwiseProduct(tanh_c);
      if (cache) {
        cache->lstm.push_back({input, previous.hidden[l], previous.cell[l], i, f,
                               o, g, c, tanh_c, hl});
      }
      next.hidden[l] = hl;
      next.cell[l] = c;
      input = hl;
    }
    top = std::move(input);
  }
  next.output = params.projection * top;
  if (cache) {
    cache->phi_q = phi_q;
    cache->x = std::move(x);
    cache->top = std::move(top);
    cache->output = next.output;
  }
  return next;
}

}  // namespace internal

AgentState CoreStep(const AgentConfig& config, const AgentParameters& params,
                    const AgentState& previous, const Eigen::VectorXd& phi_c,
                    const Eigen::VectorXd& phi_q) {
  QueryEncoding enc;
  enc.bow = phi_q;
  AgentConfig bow = config;
  bow.query = QueryMode::kBagOfWords;
  return internal::ForwardStep(bow, params, previous, phi_c, enc, nullptr);
}

Eigen::VectorXd ActionLogProbabilities(const Eigen::VectorXd& h,
                                       const Eigen::MatrixXd& neighbors,
                                       const Eigen::VectorXd& stop) {
  const Eigen::Index m = neighbors.cols();
  Eigen::VectorXd logits(m + 1);
  if (m > 0) logits.head(m) = neighbors.transpose() * h;
  logits[m] = stop.dot(h);
  const double top = logits.maxCoeff();
  const double lse = top + std::log((logits.array() - top).exp().sum());
  return (logits.array() - lse).matrix();
}

Eigen::VectorXd ActionDistribution(const Eigen::VectorXd& h,
                                   const Eigen::MatrixXd& neighbors,
                                   const Eigen::VectorXd& stop) {
  const Eigen::Index m = neighbors.cols();
  Eigen::VectorXd logits(m + 1);
  if (m > 0) logits.head(m) = neighbors.transpose() * h;
  logits[m] = stop.dot(h);
  return Softmax(logits);
}

Eigen::MatrixXd NeighborContent(const World& world, NodeId node) {
  const auto edges = world.graph.Edges(node);
  Eigen::MatrixXd m(world.phi.Dim(), static_cast<Eigen::Index>(edges.size()));
  for (std::size_t j = 0; j < edges.size(); ++j) {
    m.col(static_cast<Eigen::Index>(j)) = world.phi.Column(edges[j]);
  }
  return m;
}

PolicyOutput PolicyStep(const Agent& agent, const World& world,
                        const AgentState& previous, NodeId node,
                        const QueryEncoding& query) {
  PolicyOutput out;
  out.state = internal::ForwardStep(agent.config, agent.params, previous,
                                    world.phi.Column(node), query, nullptr);
  out.log_probs = ActionLogProbabilities(
      out.state.output, NeighborContent(world, node), agent.params.stop);
  return out;
}

}  // namespace webnav
