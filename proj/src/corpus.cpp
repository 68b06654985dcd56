#include "webnav/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "webnav/error.hpp"

namespace webnav {
namespace {

std::string_view Trim(std::string_view s) {
  const auto ws = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n';
  };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

std::string AsciiLower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

struct Heading {
  int level = 0;
  std::string_view text;
};

// `== Text ==` with at least two '=' on each side.
std::optional<Heading> ParseHeading(std::string_view line) {
  line = Trim(line);
  std::size_t lead = 0;
  while (lead < line.size() && line[lead] == '=') ++lead;
  if (lead < 2 || lead == line.size()) return std::nullopt;
  std::size_t trail = 0;
  while (trail < line.size() - lead && line[line.size() - 1 - trail] == '=') {
    ++trail;
  }
  if (trail < 2) return std::nullopt;
  const std::size_t level = std::min(lead, trail);
  std::string_view inner =
      Trim(line.substr(level, line.size() - 2 * level));
  if (inner.empty()) return std::nullopt;
  return Heading{static_cast<int>(level), inner};
}

// Replaces link markup on one line. `base` is the line's byte offset in the
// body, for error reporting.
void SubstituteLinks(const std::string& title, std::string_view line,
                     std::size_t base, std::string& out,
                     std::vector<std::string>& links) {
  std::size_t i = 0;
  while (i < line.size()) {
    if (line.compare(i, 2, "]]") == 0) {
      throw ParseError(title, base + i, "']]' without matching '[['");
    }
    if (line.compare(i, 2, "[[") != 0) {
      out.push_back(line[i++]);
      continue;
    }
    const std::size_t close = line.find("]]", i + 2);
    if (close == std::string_view::npos) {
      throw ParseError(title, base + i, "unclosed '[['");
    }
    std::string_view content = line.substr(i + 2, close - i - 2);
    if (const auto nested = content.find("[["); nested != content.npos) {
      throw ParseError(title, base + i + 2 + nested, "nested '[['");
    }
    std::string_view target = content;
    std::string_view anchor = content;
    if (const auto bar = content.find('|'); bar != content.npos) {
      target = content.substr(0, bar);
      anchor = content.substr(bar + 1);
    }
    target = Trim(target);
    if (target.empty()) throw ParseError(title, base + i, "empty link target");
    links.emplace_back(target);
    out.append(anchor);
    i = close + 2;
  }
}

}  // namespace

ParseResult ParseDocument(const RawDocument& doc,
                          const std::vector<std::string>& excluded_sections,
                          const std::vector<std::string>& excluded_prefixes) {
  if (doc.title.empty()) throw DataError("document with empty title");
  for (const auto& prefix : excluded_prefixes) {
    if (doc.title.starts_with(prefix)) return Excluded{};
  }

  std::unordered_set<std::string> excluded;
  for (const auto& s : excluded_sections) {
    excluded.insert(AsciiLower(Trim(s)));
  }

  ParsedDocument parsed;
  std::string& text = parsed.clean_text;
  int excluded_level = 0;  // 0: not inside an excluded section
  bool first_line = true;

  const std::string_view body = doc.body;
  std::size_t line_start = 0;
  while (line_start <= body.size()) {
    std::size_t line_end = body.find('\n', line_start);
    if (line_end == std::string_view::npos) line_end = body.size();
    const std::string_view line =
        body.substr(line_start, line_end - line_start);

    std::optional<Heading> heading = ParseHeading(line);
    if (heading && excluded_level && heading->level <= excluded_level) {
      excluded_level = 0;
    }
    if (!excluded_level) {
      if (heading && excluded.count(AsciiLower(heading->text))) {
        excluded_level = heading->level;
      } else {
        if (!first_line) text.push_back('\n');
        first_line = false;
        if (heading) {
          const std::size_t offset = static_cast<std::size_t>(
              heading->text.data() - body.data());
          SubstituteLinks(doc.title, heading->text, offset, text,
                          parsed.out_links);
        } else {
          SubstituteLinks(doc.title, line, line_start, text, parsed.out_links);
        }
      }
    }
    if (line_end == body.size()) break;
    line_start = line_end + 1;
  }

  // Juxtaposed anchors can still form markup, e.g. "[[A|[]][x".
  for (std::string_view marker : {"[[", "]]"}) {
    if (const auto at = text.find(marker); at != std::string::npos) {
      throw ParseError(doc.title, 0,
                       "link substitution leaves '" + std::string(marker) +
                           "' in text at clean offset " + std::to_string(at));
    }
  }
  parsed.sentences = SplitSentences(text);
  return parsed;
}

CompileResult CompileGraph(const std::vector<RawDocument>& corpus,
                           const std::string& start_title,
                           const CompileConfig& config) {
  {
    std::unordered_map<std::string_view, int> seen;
    std::vector<std::string> duplicates;
    for (const auto& doc : corpus) {
      if (++seen[doc.title] == 2) duplicates.push_back(doc.title);
    }
    if (!duplicates.empty()) {
      std::string list;
      for (const auto& d : duplicates) list += (list.empty() ? "" : ", ") + d;
      throw DataError("duplicate document titles: " + list);
    }
  }

  CompileResult result;
  std::vector<Node> nodes;
  std::vector<std::vector<std::string>> links;
  std::unordered_map<std::string, NodeId> ids;
  for (const auto& doc : corpus) {
    ParseResult parsed = ParseDocument(doc, config.excluded_sections,
                                       config.excluded_title_prefixes);
    if (std::holds_alternative<Excluded>(parsed)) {
      ++result.excluded_documents;
      continue;
    }
    auto& p = std::get<ParsedDocument>(parsed);
    ids.emplace(doc.title, static_cast<NodeId>(nodes.size()));
    nodes.push_back({doc.title, std::move(p.clean_text), std::move(p.sentences)});
    links.push_back(std::move(p.out_links));
  }

  const auto start = ids.find(start_title);
  if (start == ids.end()) {
    throw DataError("start title '" + start_title +
                    "' is absent or excluded from the corpus");
  }

  std::vector<std::vector<NodeId>> edges(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (const auto& target : links[i]) {
      auto it = ids.find(target);
      if (it == ids.end()) {
        ++result.dropped_links;
      } else {
        edges[i].push_back(it->second);
      }
    }
  }
  result.graph = NavGraph(std::move(nodes), std::move(edges), start->second);
  return result;
}

std::vector<RawDocument> ReadCorpus(std::istream& in) {
  std::vector<RawDocument> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      RawDocument doc{j.at("title").get<std::string>(),
                      j.at("body").get<std::string>()};
      if (doc.title.empty()) throw DataError("empty title");
      docs.push_back(std::move(doc));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("corpus line " + std::to_string(line_no) + ": " +
                      e.what());
    } catch (const DataError& e) {
      throw DataError("corpus line " + std::to_string(line_no) + ": " +
                      e.what());
    }
  }
  return docs;
}

std::vector<RawDocument> ReadCorpusFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus " + path);
  return ReadCorpus(in);
}

}  // namespace webnav
