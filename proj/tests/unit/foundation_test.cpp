#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "collex/error.hpp"
#include "collex/io.hpp"
#include "collex/parallel.hpp"
#include "collex/phrase_matcher.hpp"
#include "collex/rng.hpp"
#include "collex/text.hpp"
#include "oracles.hpp"

using namespace collex;

TEST(Text, Utf8RoundTrip) {
  const std::string s = "caf\xC3\xA9 \xF0\x9F\x98\xB7 ok";
  EXPECT_EQ(text::encode_utf8(text::decode_utf8(s)), s);
  EXPECT_EQ(text::codepoint_count(s), 9u);
}

TEST(Text, InvalidBytesBecomeReplacement) {
  const auto cps = text::decode_utf8("a\xFFz");
  ASSERT_EQ(cps.size(), 3u);
  EXPECT_EQ(cps[1], text::replacement_char);
}

TEST(Text, PhraseKeyFoldsAndCollapses) {
  EXPECT_EQ(text::phrase_key("  Dry\t\tCOUGH \n"), "dry cough");
  EXPECT_EQ(text::phrase_key("\xC3\x89t\xC3\xA9"), "\xC3\xA9t\xC3\xA9");
}

TEST(Io, FieldEscapingRoundTrips) {
  const std::string raw = "a\tb\\c\nd\re";
  EXPECT_EQ(io::unescape_field(io::escape_field(raw)), raw);
  EXPECT_EQ(io::escape_field(raw).find('\t'), std::string::npos);
}

TEST(Io, JoinEscapedRoundTrips) {
  const std::vector<std::string> items{"a;b", "c\\d", "", "plain"};
  EXPECT_EQ(io::split_escaped(io::join_escaped(items, ';'), ';'), items);
}

TEST(Io, TsvReaderSkipsCommentsAndChecksColumns) {
  std::istringstream in("a\tb\n# note\n\n1\t2\n");
  io::TsvReader reader(in, "mem");
  EXPECT_EQ(reader.column("b"), 1u);
  io::TsvRow row;
  ASSERT_TRUE(reader.next(row));
  EXPECT_EQ(row.at(1), "2");
  EXPECT_FALSE(reader.next(row));
  try {
    reader.column("missing");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::validation);
  }
}

TEST(Rng, SameSeedSameStream) {
  Rng a(7), b(7);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a.uniform_index(13), b.uniform_index(13));
}

TEST(Rng, SampleIndicesAreDistinctAndInRange) {
  Rng rng(3);
  for (std::size_t n = 1; n < 40; ++n) {
    for (std::size_t k = 0; k <= n; ++k) {
      auto s = rng.sample_indices(n, k);
      ASSERT_EQ(s.size(), k);
      std::sort(s.begin(), s.end());
      ASSERT_TRUE(std::adjacent_find(s.begin(), s.end()) == s.end());
      if (k > 0) ASSERT_LT(s.back(), n);
    }
  }
}

TEST(Parallel, ChunksCoverRangeOnce) {
  std::vector<int> seen(1000, 0);
  parallel_chunks(seen.size(), 4, [&](std::size_t, std::size_t b, std::size_t e) {
    for (auto i = b; i < e; ++i) ++seen[i];
  });
  EXPECT_TRUE(std::all_of(seen.begin(), seen.end(), [](int v) { return v == 1; }));
}

TEST(Parallel, RethrowsWorkerFailure) {
  EXPECT_THROW(parallel_chunks(10, 3,
                               [](std::size_t w, std::size_t, std::size_t) {
                                 if (w == 1) throw Error(ErrorCode::io, "boom");
                               }),
               Error);
}

TEST(PhraseMatcher, LeftmostLongestWithBoundaries) {
  PhraseMatcher m;
  const auto cough = m.add("cough");
  const auto dry = m.add("Dry Cough");
  const auto ache = m.add("ache");
  const auto hits = m.find_all("a DRY COUGH and headache, ache.");
  ASSERT_EQ(hits.size(), 2u);
  EXPECT_EQ(hits[0].pattern, dry);
  EXPECT_EQ(hits[0].begin, 2u);
  EXPECT_EQ(hits[0].end, 11u);
  EXPECT_EQ(hits[1].pattern, ache);
  EXPECT_EQ(hits[1].begin, 26u);
  (void)cough;
}

TEST(PhraseMatcher, ReAddingReturnsSameId) {
  PhraseMatcher m;
  EXPECT_EQ(m.add("Fever"), m.add("fever"));
  EXPECT_EQ(m.size(), 1u);
  EXPECT_THROW(m.add("   "), Error);
}

TEST(PhraseMatcher, MatchesBruteForceOracle) {
  std::mt19937_64 gen(11);
  const std::vector<std::string> words{"a", "ab", "b", "ba", "abc", "c", "it's", "x"};
  auto random_phrase = [&](int max_words) {
    std::uniform_int_distribution<int> nw(1, max_words), w(0, static_cast<int>(words.size()) - 1);
    std::string s;
    const int n = nw(gen);
    for (int i = 0; i < n; ++i) {
      if (i) s += (gen() % 5 == 0) ? ", " : " ";
      std::string word = words[w(gen)];
      if (gen() % 4 == 0) word[0] = static_cast<char>(std::toupper(word[0]));
      s += word;
    }
    return s;
  };
  for (int round = 0; round < 300; ++round) {
    std::vector<std::string> patterns;
    PhraseMatcher m;
    std::vector<PhraseMatcher::PatternId> ids;
    for (int i = 0; i < 6; ++i) {
      auto p = random_phrase(3);
      patterns.push_back(p);
      ids.push_back(m.add(p));
    }
    const std::string t = random_phrase(12);
    const auto expected = oracle::find_all(t, patterns);
    const auto got = m.find_all(t);
    ASSERT_EQ(got.size(), expected.size()) << t;
    for (std::size_t i = 0; i < got.size(); ++i) {
      EXPECT_EQ(got[i].begin, expected[i].begin) << t;
      EXPECT_EQ(got[i].end, expected[i].end) << t;
      EXPECT_EQ(got[i].pattern, ids[expected[i].pattern]) << t;
    }
  }
}
