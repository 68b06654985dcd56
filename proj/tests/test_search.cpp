#include <gtest/gtest.h>

#include "oracles.hpp"
#include "webnav/error.hpp"
#include "webnav/search.hpp"
#include "webnav/text.hpp"

namespace webnav {
namespace {

using testing::FiftyDocs;
using testing::FullScanSearch;

TEST(Search, MatchesFullScanScoring) {
  const NavGraph graph = FiftyDocs();
  const InvertedIndex index(graph);
  EXPECT_EQ(index.NodeCount(), 50u);
  for (const auto& q : testing::SearchQueries()) {
    for (std::size_t k : {1u, 5u, 40u, 100u}) {
      const auto got = Search(index, q, k);
      const auto want = FullScanSearch(graph, q, k);
      EXPECT_EQ(got, want) << q << " k=" << k;
    }
  }
}

TEST(Search, SmallerKIsAPrefix) {
  const InvertedIndex index(FiftyDocs());
  for (const char* q : {"alpha beta", "gamma", "oscar nova mike"}) {
    const auto all = Search(index, q, 50);
    for (std::size_t k = 1; k < all.size(); ++k) {
      const auto top = Search(index, q, k);
      EXPECT_TRUE(std::equal(top.begin(), top.end(), all.begin())) << q << " k=" << k;
    }
  }
}

TEST(Search, NoMatchesGivesEmptyList) {
  const InvertedIndex index(FiftyDocs());
  EXPECT_TRUE(Search(index, "zulu yankee", 10).empty());
  EXPECT_EQ(index.DocumentFrequency("zulu"), 0u);
  EXPECT_EQ(index.Postings("zulu"), nullptr);
}

TEST(Search, RejectsBadArguments) {
  const InvertedIndex index(FiftyDocs());
  EXPECT_THROW(Search(index, "alpha", 0), DataError);
  EXPECT_THROW(Search(index, "", 5), DataError);
  EXPECT_THROW(Search(index, " ,.; ", 5), DataError);
}

}  // namespace
}  // namespace webnav
