#pragma once

#include <cstddef>
#include <istream>
#include <string>
#include <variant>
#include <vector>

#include "webnav/graph.hpp"
#include "webnav/text.hpp"

namespace webnav {

struct RawDocument {
  std::string title;
  std::string body;
};

struct ParsedDocument {
  std::string clean_text;
  std::vector<Span> sentences;
  std::vector<std::string> out_links;  // textual order, duplicates kept
};

struct Excluded {};

using ParseResult = std::variant<ParsedDocument, Excluded>;

struct CompileConfig {
  std::vector<std::string> excluded_sections = {
      "References", "External Links", "Bibliography", "Partial Bibliography"};
  std::vector<std::string> excluded_title_prefixes = {"Wikipedia"};
};

// Strips link markup and excluded sections from one document. Heading match
// is exact and case-insensitive on the trimmed heading text. An excluded
// section runs until the next heading of the same or a higher level.
// Links may not span lines.
ParseResult ParseDocument(const RawDocument& doc,
                          const std::vector<std::string>& excluded_sections,
                          const std::vector<std::string>& excluded_prefixes);

struct CompileResult {
  NavGraph graph;
  std::size_t dropped_links = 0;
  std::size_t excluded_documents = 0;
};

CompileResult CompileGraph(const std::vector<RawDocument>& corpus,
                           const std::string& start_title,
                           const CompileConfig& config);

// JSON-lines corpus: one {"title": ..., "body": ...} object per line.
std::vector<RawDocument> ReadCorpus(std::istream& in);
std::vector<RawDocument> ReadCorpusFile(const std::string& path);

}  // namespace webnav
