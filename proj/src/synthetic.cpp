#include "webnav/synthetic.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <unordered_set>

#include "webnav/error.hpp"
#include "webnav/text.hpp"
#include "webnav/tfidf.hpp"

namespace webnav {
namespace {

class WordFactory {
 public:
  explicit WordFactory(Rng& rng) : rng_(rng) {}

  std::string Next() {
    static constexpr const char* kOnsets[] = {"b", "d", "f", "g", "k", "l", "m",
                                             "n", "p", "r", "s", "t", "v", "z",
                                             "br", "st", "tr", "pl", "gr", "sh"};
    static constexpr const char* kVowels[] = {"a", "e", "i", "o", "u", "ai", "ou"};
    for (;;) {
      std::string word;
      const int syllables = 2 + static_cast<int>(UniformIndex(rng_, 2));
      for (int s = 0; s < syllables; ++s) {
        word += kOnsets[UniformIndex(rng_, std::size(kOnsets))];
        word += kVowels[UniformIndex(rng_, std::size(kVowels))];
      }
      if (UniformIndex(rng_, 3) == 0) word += "n";
      if (used_.insert(word).second) return word;
    }
  }

  std::vector<std::string> Many(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(Next());
    return out;
  }

 private:
  Rng& rng_;
  std::unordered_set<std::string> used_;
};

std::string Capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

struct Page {
  int parent = -1;
  int depth = 0;
  int topic = -1;     // index of the depth-1 ancestor
  int subtopic = -1;  // index of the depth-2 ancestor
  std::vector<int> children;
  std::vector<int> extra_links;
  std::vector<std::string> own_words;
  std::string title;
};

}  // namespace

std::vector<RawDocument> GenerateSyntheticCorpus(const SyntheticConfig& config) {
  if (config.nodes < 2) throw DataError("synthetic: need at least 2 nodes");
  if (config.min_branch < 1 || config.max_branch < config.min_branch) {
    throw DataError("synthetic: bad branching range");
  }
  if (config.start_branch < 1) throw DataError("synthetic: bad start branching");
  if (config.min_sentences < 1 || config.max_sentences < config.min_sentences) {
    throw DataError("synthetic: bad sentence range");
  }
  Rng rng(config.seed);
  WordFactory words(rng);
  auto uniform = [&](int lo, int hi) {
    return lo + static_cast<int>(UniformIndex(rng, hi - lo + 1));
  };

  // Tree skeleton in breadth-first order.
  std::vector<Page> pages(config.nodes);
  {
    std::deque<int> queue{0};
    int next = 1;
    while (!queue.empty() && next < static_cast<int>(config.nodes)) {
      const int u = queue.front();
      queue.pop_front();
      const int branch =
          u == 0 ? config.start_branch : uniform(config.min_branch, config.max_branch);
      for (int b = 0; b < branch && next < static_cast<int>(config.nodes); ++b) {
        Page& child = pages[next];
        child.parent = u;
        child.depth = pages[u].depth + 1;
        pages[u].children.push_back(next);
        queue.push_back(next++);
      }
    }
  }
  int topics = 0, subtopics = 0;
  for (auto& p : pages) {
    if (p.depth == 1) p.topic = topics++;
    if (p.depth >= 2) p.topic = pages[p.parent].topic;
    if (p.depth == 2) p.subtopic = subtopics++;
    if (p.depth >= 3) p.subtopic = pages[p.parent].subtopic;
  }

  const auto filler = words.Many(40);
  std::vector<std::vector<std::string>> topic_words(topics), subtopic_words(subtopics);
  for (auto& t : topic_words) t = words.Many(30);
  for (auto& s : subtopic_words) s = words.Many(15);
  for (std::size_t i = 0; i < pages.size(); ++i) {
    pages[i].own_words = words.Many(6);
    pages[i].title = i == 0 ? kSyntheticStartTitle
                            : Capitalize(pages[i].own_words[0]) + " " +
                                  Capitalize(pages[i].own_words[1]);
  }

  // Same-topic pool for extra links.
  std::vector<std::vector<int>> by_topic(topics);
  for (std::size_t i = 1; i < pages.size(); ++i) by_topic[pages[i].topic].push_back(i);

  for (std::size_t i = 0; i < pages.size(); ++i) {
    Page& p = pages[i];
    const int wanted = i == 0 ? 0 : uniform(config.min_branch, config.max_branch);
    std::set<int> linked(p.children.begin(), p.children.end());
    int guard = 0;
    while (static_cast<int>(linked.size()) < wanted && guard++ < 1000) {
      int target;
      if (i != 0 && UniformIndex(rng, 5) != 0) {
        const auto& pool = by_topic[p.topic];
        target = pool[UniformIndex(rng, pool.size())];
      } else {
        target = 1 + static_cast<int>(UniformIndex(rng, pages.size() - 1));
      }
      if (target == static_cast<int>(i) || linked.count(target)) continue;
      linked.insert(target);
      p.extra_links.push_back(target);
    }
  }

  auto pick = [&](const std::vector<std::string>& v) -> const std::string& {
    return v[UniformIndex(rng, v.size())];
  };
  auto sentence_about = [&](const Page& p, int length) {
    std::string s;
    for (int w = 0; w < length; ++w) {
      const std::size_t roll = UniformIndex(rng, 20);
      std::string word;
      if (roll < 7 || p.topic < 0) {
        word = p.topic < 0 && roll >= 7 && topics > 0
                   ? pick(topic_words[UniformIndex(rng, topics)])
                   : pick(filler);
      } else if (roll < 12 || p.subtopic < 0) {
        word = pick(topic_words[p.topic]);
      } else if (roll < 16) {
        word = pick(subtopic_words[p.subtopic]);
      } else {
        word = pick(p.own_words);
      }
      if (w == 0) word = Capitalize(word);
      s += (w ? " " : "") + word;
    }
    return s;
  };

  std::vector<RawDocument> docs;
  docs.reserve(pages.size());
  for (std::size_t i = 0; i < pages.size(); ++i) {
    const Page& p = pages[i];
    std::string body;
    const int sentences = uniform(config.min_sentences, config.max_sentences);
    for (int s = 0; s < sentences; ++s) {
      body += sentence_about(p, uniform(8, 12)) + ". ";
    }
    body.pop_back();
    body += "\n";
    for (int c : p.children) {
      const Page& child = pages[c];
      std::string line = Capitalize(pick(filler)) + " [[" + child.title + "]] " +
                         pick(child.own_words) + " " + pick(child.own_words);
      if (child.subtopic >= 0) line += " " + pick(subtopic_words[child.subtopic]);
      if (child.topic >= 0) line += " " + pick(topic_words[child.topic]);
      body += line + ".\n";
    }
    if (!p.extra_links.empty()) {
      body += "== See also ==\n";
      for (std::size_t k = 0; k < p.extra_links.size(); ++k) {
        const Page& other = pages[p.extra_links[k]];
        body += (k ? " Also [[" : "Related [[") + other.title + "|" +
                Capitalize(other.own_words[0]) + "]] " + pick(filler) + ".";
      }
      body += "\n";
    }
    body += "== References ==\n";
    body += Capitalize(pick(filler)) + " [[" +
            pages[UniformIndex(rng, pages.size())].title + "]] " +
            pick(filler) + ".\n";
    docs.push_back({p.title, body});
  }
  return docs;
}

std::vector<QaPair> GenerateSyntheticQa(const NavGraph& graph,
                                        std::size_t count,
                                        std::size_t unresolvable,
                                        std::uint64_t seed) {
  Rng rng(seed);
  const TfIdfIndex index(graph);
  const auto dist = graph.DistancesFromStart();
  std::vector<NodeId> candidates;
  for (NodeId id = 0; id < graph.NodeCount(); ++id) {
    if (dist[id] >= 2) candidates.push_back(id);
  }
  if (candidates.empty()) throw DataError("synthetic qa: no node 2+ hops away");

  std::vector<QaPair> pairs;
  for (std::size_t q = 0; q < count; ++q) {
    const NodeId target = candidates[UniformIndex(rng, candidates.size())];
    auto tokens = Tokenize(graph.GetNode(target).clean_text);
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
    std::stable_sort(tokens.begin(), tokens.end(),
                     [&](const std::string& a, const std::string& b) {
                       return index.Weight(a, target) > index.Weight(b, target);
                     });
    tokens.resize(std::min<std::size_t>(tokens.size(), 10));
    for (std::size_t i = tokens.size(); i > 1; --i) {
      std::swap(tokens[i - 1], tokens[UniformIndex(rng, i)]);
    }
    tokens.resize(std::min<std::size_t>(tokens.size(), 6));
    std::string question = "This page mentions";
    for (const auto& t : tokens) question += " " + t;
    pairs.push_back({question + ".", graph.GetNode(target).title});
  }
  for (std::size_t u = 0; u < unresolvable; ++u) {
    const std::size_t at = UniformIndex(rng, pairs.size() + 1);
    pairs.insert(pairs.begin() + static_cast<std::ptrdiff_t>(at),
                 QaPair{"Which page does not exist number " + std::to_string(u) + "?",
                        "NoSuchPage " + std::to_string(u)});
  }
  return pairs;
}

}  // namespace webnav
