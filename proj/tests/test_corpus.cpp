#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "webnav/corpus.hpp"
#include "webnav/error.hpp"
#include "webnav/graph.hpp"
#include "webnav/synthetic.hpp"
#include "webnav/text.hpp"

namespace webnav {
namespace {

const CompileConfig kDefaults;

ParsedDocument Parse(const std::string& title, const std::string& body) {
  auto result = ParseDocument({title, body}, kDefaults.excluded_sections,
                              kDefaults.excluded_title_prefixes);
  EXPECT_TRUE(std::holds_alternative<ParsedDocument>(result));
  return std::get<ParsedDocument>(result);
}

std::vector<std::string> SentenceTexts(const std::string& text) {
  std::vector<std::string> out;
  for (const auto& s : SplitSentences(text)) out.push_back(text.substr(s.start, s.end - s.start));
  return out;
}

TEST(Tokenize, LowercasesAndSplitsOnNonAlphanumerics) {
  EXPECT_EQ(Tokenize("Hello, World! x2-y"), (std::vector<std::string>{"hello", "world", "x2", "y"}));
  EXPECT_TRUE(Tokenize("  ... --- ").empty());
  EXPECT_EQ(CountTokens("Hello, World! x2-y"), 4u);
}

TEST(Tokenize, KeepsUtf8BytesInsideTokens) {
  EXPECT_EQ(Tokenize("Caf\xc3\xa9 ok"), (std::vector<std::string>{"caf\xc3\xa9", "ok"}));
}

TEST(SplitSentences, EndsAtPunctuationBeforeUppercaseOrEnd) {
  EXPECT_EQ(SentenceTexts("One two. Three four! Five? six. Seven"),
            (std::vector<std::string>{"One two.", "Three four!", "Five? six.", "Seven"}));
  EXPECT_EQ(SentenceTexts("Dr. who went home."), (std::vector<std::string>{"Dr. who went home."}));
}

TEST(SplitSentences, NewlinesAlwaysEndSentences) {
  EXPECT_EQ(SentenceTexts("Intro line\nsecond line.\n\n  Third."),
            (std::vector<std::string>{"Intro line", "second line.", "Third."}));
}

TEST(UniformIndex, StaysInRangeAndHitsEveryValue) {
  std::mt19937_64 rng(7);
  std::vector<int> seen(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto v = UniformIndex(rng, 7);
    ASSERT_LT(v, 7u);
    ++seen[v];
  }
  for (int c : seen) EXPECT_GT(c, 800);
}

TEST(Fnv1a64, KnownVectors) {
  EXPECT_EQ(Fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(Fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(ToHex(0xabcULL), "0000000000000abc");
}

TEST(ParseDocument, SubstitutesLinks) {
  const auto doc = Parse("T", "See [[Copernicus|him]] now.");
  EXPECT_EQ(doc.clean_text, "See him now.");
  EXPECT_EQ(doc.out_links, std::vector<std::string>{"Copernicus"});
}

TEST(ParseDocument, BareLinkKeepsTitleAndDuplicatesArePreserved) {
  const auto doc = Parse("T", "[[ A ]] and [[A|a]] and [[B]].");
  EXPECT_EQ(doc.clean_text, " A  and a and B.");
  EXPECT_EQ(doc.out_links, (std::vector<std::string>{"A", "A", "B"}));
}

TEST(ParseDocument, ExcludedTitlePrefix) {
  const auto result = ParseDocument({"Wikipedia:About", "x"}, kDefaults.excluded_sections,
                                    kDefaults.excluded_title_prefixes);
  EXPECT_TRUE(std::holds_alternative<Excluded>(result));
}

TEST(ParseDocument, RemovesExcludedSectionUntilSameLevelHeading) {
  const auto doc = Parse("T", "Intro.\n== References ==\nr1 [[X]]\n== Later ==\ntail");
  EXPECT_EQ(doc.clean_text, "Intro.\nLater\ntail");
  EXPECT_TRUE(doc.out_links.empty());
}

TEST(ParseDocument, DeeperHeadingsStayInsideExcludedSection) {
  const auto doc = Parse(
      "T", "a\n== External links ==\nx [[X]]\n=== Sub ===\ny [[Y]]\n= Top =\n== Next ==\nz [[Z]]");
  // "= Top =" is not a heading (one '=' per side), so it stays excluded text.
  EXPECT_EQ(doc.clean_text, "a\nNext\nz Z");
  EXPECT_EQ(doc.out_links, std::vector<std::string>{"Z"});
}

TEST(ParseDocument, MalformedMarkupReportsOffset) {
  try {
    Parse("T", "ok\nbad [[open");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 7u);
  }
  EXPECT_THROW(Parse("T", "stray ]] here"), ParseError);
  EXPECT_THROW(Parse("T", "[[a [[b]] ]]"), ParseError);
  EXPECT_THROW(Parse("T", "[[ |x]]"), ParseError);
  EXPECT_THROW(Parse("T", "[[A|[]][x"), ParseError);
}

std::vector<RawDocument> ThreeDocs() {
  return {{"A", "Links to [[B]]."}, {"B", "On to [[C|see]]."}, {"C", "Dangling [[Z]]."}};
}

// Adjacency oracle: resolve every link target by linear title search.
std::vector<std::vector<NodeId>> ManualAdjacency(const std::vector<RawDocument>& docs,
                                                 std::size_t* dropped) {
  std::vector<std::vector<NodeId>> adj(docs.size());
  *dropped = 0;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    const auto links = Parse(docs[i].title, docs[i].body).out_links;
    for (const auto& link : links) {
      bool found = false;
      for (std::size_t j = 0; j < docs.size(); ++j) {
        if (docs[j].title == link) {
          adj[i].push_back(static_cast<NodeId>(j));
          found = true;
        }
      }
      if (!found) ++*dropped;
    }
  }
  return adj;
}

TEST(CompileGraph, ThreeDocumentFixtureMatchesManualAdjacency) {
  const auto docs = ThreeDocs();
  const auto result = CompileGraph(docs, "A", kDefaults);
  std::size_t dropped = 0;
  const auto oracle = ManualAdjacency(docs, &dropped);
  ASSERT_EQ(result.graph.NodeCount(), 3u);
  for (NodeId n = 0; n < 3; ++n) {
    const auto edges = result.graph.Edges(n);
    EXPECT_EQ(std::vector<NodeId>(edges.begin(), edges.end()), oracle[n]);
  }
  EXPECT_EQ(result.dropped_links, 1u);
  EXPECT_EQ(dropped, 1u);
  EXPECT_EQ(result.graph.EdgeCount(), 2u);
}

TEST(CompileGraph, SingleDocument) {
  const auto result = CompileGraph({{"Only", "No links."}}, "Only", kDefaults);
  EXPECT_EQ(result.graph.NodeCount(), 1u);
  EXPECT_EQ(result.graph.EdgeCount(), 0u);
}

TEST(CompileGraph, LinkInsideExternalLinksIsNotAnEdge) {
  const auto result = CompileGraph(
      {{"A", "Body.\n== External Links ==\n[[B]]"}, {"B", "Leaf."}}, "A", kDefaults);
  EXPECT_EQ(result.graph.OutDegree(0), 0u);
}

TEST(CompileGraph, LinksToExcludedDocumentsAreDropped) {
  const auto result =
      CompileGraph({{"A", "[[Wikipedia:Help]] [[B]]"}, {"Wikipedia:Help", "x"}, {"B", "y"}},
                   "A", kDefaults);
  EXPECT_EQ(result.graph.NodeCount(), 2u);
  EXPECT_EQ(result.excluded_documents, 1u);
  EXPECT_EQ(result.dropped_links, 1u);
  EXPECT_EQ(result.graph.Edges(0)[0], 1u);
}

TEST(CompileGraph, SelfLoopsAreKept) {
  const auto result = CompileGraph({{"A", "[[A]] [[A]]"}}, "A", kDefaults);
  EXPECT_EQ(result.graph.EdgeCount(), 2u);
}

TEST(CompileGraph, Errors) {
  EXPECT_THROW(CompileGraph(ThreeDocs(), "Missing", kDefaults), DataError);
  EXPECT_THROW(CompileGraph({{"A", "x"}, {"A", "y"}}, "A", kDefaults), DataError);
  EXPECT_THROW(CompileGraph({{"Wikipedia:Start", "x"}}, "Wikipedia:Start", kDefaults), DataError);
}

TEST(GraphStats, SingleNode) {
  const auto graph = CompileGraph({{"A", "a b c"}}, "A", kDefaults).graph;
  const auto stats = ComputeGraphStats(graph);
  EXPECT_EQ(stats.hyperlinks.mean, 0);
  EXPECT_EQ(stats.words.mean, 3);
}

TEST(GraphStats, OutDegreeArithmetic) {
  std::vector<Node> nodes;
  for (int i = 0; i < 4; ++i) nodes.push_back(testing::MakeNode("n" + std::to_string(i), "x"));
  const NavGraph graph(std::move(nodes), {{}, {0}, {0, 1}, {0, 1, 2, 3, 3}}, 0);
  const auto stats = ComputeGraphStats(graph);
  EXPECT_DOUBLE_EQ(stats.hyperlinks.mean, 2.0);
  EXPECT_EQ(stats.hyperlinks.max, 5);
  EXPECT_EQ(stats.hyperlinks.min, 0);
  // Population sd of (0,1,2,5).
  EXPECT_DOUBLE_EQ(stats.hyperlinks.sd, std::sqrt((4.0 + 1 + 0 + 9) / 4));
  EXPECT_DOUBLE_EQ(stats.hyperlinks.mean * graph.NodeCount(), graph.EdgeCount());
}

TEST(GraphStats, WordsCountWhitespaceTokens) {
  const auto graph = CompileGraph({{"A", "it's a well-known fact"}}, "A", kDefaults).graph;
  EXPECT_EQ(ComputeGraphStats(graph).words.mean, 4);
}

TEST(NavGraph, SerializationRoundTripAndDeterminism) {
  const auto docs = GenerateSyntheticCorpus({.nodes = 60, .seed = 4});
  const auto a = CompileGraph(docs, kSyntheticStartTitle, kDefaults).graph;
  const auto b = CompileGraph(docs, kSyntheticStartTitle, kDefaults).graph;
  EXPECT_EQ(a.Serialize(), b.Serialize());
  const auto c = NavGraph::Deserialize(a.Serialize());
  EXPECT_EQ(c.Serialize(), a.Serialize());
  EXPECT_EQ(c.Checksum(), a.Checksum());
  ASSERT_EQ(c.NodeCount(), a.NodeCount());
  for (NodeId n = 0; n < a.NodeCount(); ++n) {
    EXPECT_EQ(c.GetNode(n).title, a.GetNode(n).title);
    EXPECT_EQ(c.GetNode(n).clean_text, a.GetNode(n).clean_text);
    EXPECT_EQ(c.GetNode(n).sentences, a.GetNode(n).sentences);
    const auto ea = a.Edges(n), ec = c.Edges(n);
    EXPECT_TRUE(std::equal(ea.begin(), ea.end(), ec.begin(), ec.end()));
  }
}

TEST(NavGraph, CorruptBytesAreRejected) {
  const auto graph = testing::SmallGraph();
  std::string bytes = graph.Serialize();
  EXPECT_THROW(NavGraph::Deserialize(bytes.substr(0, bytes.size() - 3)), DataError);
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(NavGraph::Deserialize(bad_magic), DataError);
  EXPECT_THROW(NavGraph::Deserialize(bytes + "junk"), DataError);
}

TEST(NavGraph, InvalidEdgeTargetIsRejected) {
  std::vector<Node> nodes{testing::MakeNode("a", "x")};
  EXPECT_THROW(NavGraph(std::move(nodes), {{3}}, 0), DataError);
}

TEST(NavGraph, SaveLoadFile) {
  testing::TempDir dir;
  const auto graph = testing::SmallGraph();
  graph.Save(dir / "g.navg");
  EXPECT_EQ(NavGraph::Load(dir / "g.navg").Serialize(), graph.Serialize());
  EXPECT_THROW(NavGraph::Load(dir / "missing.navg"), DataError);
}

TEST(ReadCorpus, JsonLines) {
  std::istringstream in("{\"title\":\"A\",\"body\":\"x\"}\n\n{\"title\":\"B\",\"body\":\"y\"}\n");
  const auto docs = ReadCorpus(in);
  ASSERT_EQ(docs.size(), 2u);
  EXPECT_EQ(docs[1].title, "B");
  std::istringstream bad("{\"title\":1}\n");
  EXPECT_THROW(ReadCorpus(bad), DataError);
}

// Properties over a synthetic corpus.
TEST(CompileGraph, SyntheticCorpusInvariants) {
  const auto docs = GenerateSyntheticCorpus({.nodes = 200, .seed = 9});
  const auto result = CompileGraph(docs, kSyntheticStartTitle, kDefaults);
  const auto& g = result.graph;
  EXPECT_EQ(g.NodeCount(), 200u);
  for (NodeId n = 0; n < g.NodeCount(); ++n) {
    const auto& text = g.GetNode(n).clean_text;
    EXPECT_EQ(text.find("[["), std::string::npos);
    EXPECT_EQ(text.find("]]"), std::string::npos);
    EXPECT_EQ(text.find("References"), std::string::npos);
    for (NodeId m : g.Edges(n)) EXPECT_LT(m, g.NodeCount());
    if (n != g.Start()) {
      EXPECT_GE(g.OutDegree(n), 3u);
      EXPECT_LE(g.OutDegree(n), 6u);
    }
  }
  const auto dist = g.DistancesFromStart();
  EXPECT_EQ(std::count(dist.begin(), dist.end(), -1), 0);
}

}  // namespace
}  // namespace webnav
