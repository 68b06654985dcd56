#include "webnav/embeddings.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <random>
#include <sstream>

#include "binary_io.hpp"
#include "webnav/error.hpp"
#include "webnav/log.hpp"
#include "webnav/text.hpp"

namespace webnav {

WordVectors::WordVectors(int dim, std::vector<std::string> tokens,
                         std::vector<float> data)
    : dim_(dim), tokens_(std::move(tokens)), data_(std::move(data)) {
  if (dim_ < 1) throw DataError("word vectors: dimension must be >= 1");
  if (data_.size() != tokens_.size() * static_cast<std::size_t>(dim_)) {
    throw DataError("word vectors: data size does not match vocabulary");
  }
  for (float v : data_) {
    if (!std::isfinite(v)) throw DataError("word vectors: non-finite value");
  }
  rows_.reserve(tokens_.size());
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!rows_.emplace(tokens_[i], i).second) {
      throw DataError("word vectors: duplicate token '" + tokens_[i] + "'");
    }
  }
}

const float* WordVectors::Find(std::string_view token) const {
  auto it = rows_.find(std::string(token));
  return it == rows_.end() ? nullptr : data_.data() + it->second * dim_;
}

std::span<const float> WordVectors::Vector(std::size_t row) const {
  return {data_.data() + row * dim_, static_cast<std::size_t>(dim_)};
}

std::string WordVectors::ToText() const {
  std::string out =
      std::to_string(tokens_.size()) + " " + std::to_string(dim_) + "\n";
  char buf[32];
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    out += tokens_[i];
    for (float v : Vector(i)) {
      std::snprintf(buf, sizeof buf, " %.9g", static_cast<double>(v));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

void WordVectors::Save(const std::filesystem::path& path) const {
  internal::WriteFile(path, ToText());
}

namespace {

std::vector<std::string_view> Fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool IsInteger(std::string_view s) {
  long long v;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && p == s.data() + s.size();
}

}  // namespace

WordVectors WordVectors::Parse(std::string_view text) {
  int dim = -1;
  std::vector<std::string> tokens;
  std::vector<float> data;
  std::unordered_map<std::string, std::size_t> rows;
  std::size_t line_no = 0;
  bool seen_content = false;

  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    const auto fields = Fields(line);
    if (fields.empty()) continue;
    const std::string where = "vectors line " + std::to_string(line_no);
    if (!seen_content && fields.size() == 2 && IsInteger(fields[0]) &&
        IsInteger(fields[1])) {
      seen_content = true;
      dim = std::atoi(std::string(fields[1]).c_str());
      if (dim < 1) throw DataError(where + ": bad dimension in header");
      continue;
    }
    seen_content = true;
    const int values = static_cast<int>(fields.size()) - 1;
    if (dim < 0) dim = values;
    if (values != dim || dim < 1) {
      throw DataError(where + ": expected " + std::to_string(dim) +
                      " values, found " + std::to_string(values));
    }
    std::vector<float> vec(dim);
    for (int k = 0; k < dim; ++k) {
      const std::string field(fields[k + 1]);
      char* parse_end = nullptr;
      vec[k] = std::strtof(field.c_str(), &parse_end);
      if (parse_end != field.c_str() + field.size() || !std::isfinite(vec[k])) {
        throw DataError(where + ": bad value '" + field + "'");
      }
    }
    std::string token(fields[0]);
    if (auto it = rows.find(token); it != rows.end()) {
      Warn("duplicate token '" + token + "' at " + where + "; keeping last");
      std::copy(vec.begin(), vec.end(), data.begin() + it->second * dim);
    } else {
      rows.emplace(token, tokens.size());
      tokens.push_back(std::move(token));
      data.insert(data.end(), vec.begin(), vec.end());
    }
  }
  if (tokens.empty()) throw DataError("vectors file has no vectors");
  return WordVectors(dim, std::move(tokens), std::move(data));
}

WordVectors WordVectors::Load(const std::filesystem::path& path) {
  return Parse(internal::ReadFile(path));
}

Eigen::VectorXd ContentVector(std::string_view text, const WordVectors& wv) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(wv.Dim());
  std::size_t known = 0;
  for (const auto& token : Tokenize(text)) {
    const float* v = wv.Find(token);
    if (!v) continue;
    for (int k = 0; k < wv.Dim(); ++k) sum[k] += v[k];
    ++known;
  }
  if (known > 0) sum /= static_cast<double>(known);
  return sum;
}

PhiTable::PhiTable(int dim, std::size_t nodes, std::vector<float> data)
    : dim_(dim), nodes_(nodes), data_(std::move(data)), matrix_(dim, nodes) {
  if (data_.size() != nodes * static_cast<std::size_t>(dim)) {
    throw DataError("phi table: size mismatch");
  }
  for (std::size_t n = 0; n < nodes; ++n) {
    for (int k = 0; k < dim; ++k) matrix_(k, n) = data_[n * dim + k];
  }
}

PhiTable PhiTable::Compute(const NavGraph& graph, const WordVectors& wv) {
  std::vector<float> data;
  data.reserve(graph.NodeCount() * wv.Dim());
  for (NodeId id = 0; id < graph.NodeCount(); ++id) {
    const Eigen::VectorXd v = ContentVector(graph.GetNode(id).clean_text, wv);
    for (int k = 0; k < wv.Dim(); ++k) data.push_back(static_cast<float>(v[k]));
  }
  return PhiTable(wv.Dim(), graph.NodeCount(), std::move(data));
}

std::string PhiTable::Serialize() const {
  internal::ByteWriter w;
  w.U32(static_cast<std::uint32_t>(dim_));
  w.Raw(data_.data(), data_.size() * sizeof(float));
  return w.Take();
}

void PhiTable::Save(const std::filesystem::path& path) const {
  internal::WriteFile(path, Serialize());
}

PhiTable PhiTable::Load(const std::filesystem::path& path,
                        std::size_t expected_nodes) {
  const std::string bytes = internal::ReadFile(path);
  internal::ByteReader r(bytes, path.string());
  const std::uint32_t dim = r.U32();
  if (dim == 0) r.Fail("zero dimension");
  const std::size_t floats = r.Remaining() / sizeof(float);
  if (r.Remaining() % (sizeof(float) * dim) != 0) r.Fail("size not a multiple of d");
  const std::size_t nodes = floats / dim;
  if (nodes != expected_nodes) {
    r.Fail("has " + std::to_string(nodes) + " rows but graph has " +
           std::to_string(expected_nodes) + " nodes");
  }
  std::vector<float> data(floats);
  const auto raw = r.Fixed(floats * sizeof(float));
  std::memcpy(data.data(), raw.data(), raw.size());
  return PhiTable(static_cast<int>(dim), nodes, std::move(data));
}

WordVectors TrainCbow(const std::vector<std::string>& texts,
                      const CbowConfig& config) {
  if (config.dim < 2) throw DataError("cbow: dimension must be >= 2");
  if (config.window < 1 || config.epochs < 1 || config.negatives < 1) {
    throw DataError("cbow: window, epochs and negatives must be >= 1");
  }

  std::map<std::string, std::uint64_t> counts;
  std::vector<std::vector<std::string>> docs;
  docs.reserve(texts.size());
  for (const auto& text : texts) {
    docs.push_back(Tokenize(text));
    for (const auto& t : docs.back()) ++counts[t];
  }
  if (counts.size() < 2) throw DataError("cbow: corpus needs >= 2 distinct tokens");

  // Vocabulary ordered by frequency, then lexicographically.
  std::vector<std::pair<std::string, std::uint64_t>> vocab(counts.begin(),
                                                           counts.end());
  std::stable_sort(vocab.begin(), vocab.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::unordered_map<std::string, std::uint32_t> ids;
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    ids.emplace(vocab[i].first, static_cast<std::uint32_t>(i));
  }
  std::vector<std::vector<std::uint32_t>> streams;
  std::uint64_t total_words = 0;
  for (const auto& doc : docs) {
    std::vector<std::uint32_t> s;
    s.reserve(doc.size());
    for (const auto& t : doc) s.push_back(ids.at(t));
    total_words += s.size();
    streams.push_back(std::move(s));
  }

  // Negative-sampling table with the usual 3/4 power.
  constexpr std::size_t kTableSize = 1 << 20;
  std::vector<std::uint32_t> table(kTableSize);
  {
    double norm = 0;
    for (const auto& [t, c] : vocab) norm += std::pow(static_cast<double>(c), 0.75);
    std::size_t word = 0;
    double cumulative = std::pow(static_cast<double>(vocab[0].second), 0.75) / norm;
    for (std::size_t i = 0; i < kTableSize; ++i) {
      table[i] = static_cast<std::uint32_t>(word);
      if (static_cast<double>(i + 1) / kTableSize > cumulative &&
          word + 1 < vocab.size()) {
        ++word;
        cumulative += std::pow(static_cast<double>(vocab[word].second), 0.75) / norm;
      }
    }
  }

  const int d = config.dim;
  const std::size_t v = vocab.size();
  std::mt19937_64 rng(config.seed);
  std::vector<float> input(v * d), output(v * d, 0.0f);
  for (auto& x : input) {
    x = static_cast<float>((UniformReal(rng) - 0.5) / d);
  }

  std::vector<float> hidden(d), grad(d);
  const double total_steps = static_cast<double>(total_words) * config.epochs;
  double processed = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (const auto& stream : streams) {
      const int n = static_cast<int>(stream.size());
      for (int pos = 0; pos < n; ++pos, processed += 1) {
        const float alpha = static_cast<float>(
            config.learning_rate * std::max(1e-4, 1.0 - processed / total_steps));
        const int shrink = static_cast<int>(UniformIndex(rng, config.window));
        const int lo = std::max(0, pos - config.window + shrink);
        const int hi = std::min(n - 1, pos + config.window - shrink);
        std::fill(hidden.begin(), hidden.end(), 0.0f);
        int context = 0;
        for (int c = lo; c <= hi; ++c) {
          if (c == pos) continue;
          const float* in = &input[stream[c] * d];
          for (int k = 0; k < d; ++k) hidden[k] += in[k];
          ++context;
        }
        if (context == 0) continue;
        for (auto& h : hidden) h /= static_cast<float>(context);
        std::fill(grad.begin(), grad.end(), 0.0f);

        for (int sample = 0; sample <= config.negatives; ++sample) {
          std::uint32_t target;
          float label;
          if (sample == 0) {
            target = stream[pos];
            label = 1.0f;
          } else {
            target = table[UniformIndex(rng, kTableSize)];
            if (target == stream[pos]) continue;
            label = 0.0f;
          }
          float* out = &output[target * d];
          float dot = 0;
          for (int k = 0; k < d; ++k) dot += hidden[k] * out[k];
          const float sigma = 1.0f / (1.0f + std::exp(-std::clamp(dot, -30.0f, 30.0f)));
          const float g = (label - sigma) * alpha;
          for (int k = 0; k < d; ++k) grad[k] += g * out[k];
          for (int k = 0; k < d; ++k) out[k] += g * hidden[k];
        }
        for (int c = lo; c <= hi; ++c) {
          if (c == pos) continue;
          float* in = &input[stream[c] * d];
          for (int k = 0; k < d; ++k) in[k] += grad[k];
        }
      }
    }
  }

  std::vector<std::string> tokens;
  tokens.reserve(v);
  for (auto& [t, c] : vocab) tokens.push_back(t);
  return WordVectors(d, std::move(tokens), std::move(input));
}

}  // namespace webnav
