// Copyright 2026 The Unigen Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "unigen/fm_index.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>
#include <vector>

#include "gtest/gtest.h"
#include "testing/fixtures.hpp"
#include "testing/naive.hpp"

namespace unigen {
namespace {

using testing::naive_contexts;
using testing::naive_count;
using testing::naive_successors;
using testing::random_corpus;
using testing::random_pattern;

constexpr TokenId a = 2, b = 3, c = 4;

FmIndex index_of(std::vector<TokenId> stream, std::vector<std::uint64_t> boundaries, std::size_t vocab,
                 FmIndexOptions opts = {}) {
  return FmIndex::build(stream, std::move(boundaries), vocab, opts);
}

TEST(SuffixArrayTest, MatchesSortedSuffixes) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::uint32_t> text(1 + rng() % 60);
    for (auto& t : text) t = static_cast<std::uint32_t>(rng() % 4);
    std::vector<std::uint64_t> expected(text.size());
    std::iota(expected.begin(), expected.end(), 0);
    std::sort(expected.begin(), expected.end(), [&](std::uint64_t x, std::uint64_t y) {
      return std::lexicographical_compare(text.begin() + static_cast<long>(x), text.end(),
                                          text.begin() + static_cast<long>(y), text.end());
    });
    EXPECT_EQ(build_suffix_array(text, 4), expected);
  }
}

TEST(FmIndexTest, BwtLengthIsStreamPlusSentinel) {
  const auto idx = index_of({a, b, kSeparatorId}, {0}, 4);
  EXPECT_EQ(idx.bwt().size(), 4u);
  EXPECT_EQ(idx.size(), 4u);
  EXPECT_EQ(idx.stream_size(), 3u);
}

TEST(FmIndexTest, CountRepeatedBigram) {
  const auto idx = index_of({a, b, a, b, c, kSeparatorId}, {0}, 5);
  EXPECT_EQ(idx.count(Ngram{a, b}), 2u);
  EXPECT_EQ(idx.count(Ngram{b, a}), 1u);
  EXPECT_EQ(idx.count(Ngram{c, a}), 0u);
}

TEST(FmIndexTest, SuccessorsOfSingleToken) {
  const auto idx = index_of({a, b, a, c, kSeparatorId}, {0}, 5);
  const auto s = idx.successors(idx.match(Ngram{a}));
  std::set<TokenId> next;
  for (const auto& [t, r] : s.next) next.insert(t);
  EXPECT_EQ(next, (std::set<TokenId>{b, c}));
  EXPECT_FALSE(s.end_of_context);
}

TEST(FmIndexTest, SeparatorAtEndSetsEndOfContext) {
  const auto idx = index_of({a, b, kSeparatorId, b, c, kSeparatorId}, {0, 3}, 5);
  const auto s = idx.successors(idx.match(Ngram{b}));
  EXPECT_TRUE(s.end_of_context);
  ASSERT_EQ(s.next.size(), 1u);
  EXPECT_EQ(s.next[0].first, c);
}

TEST(FmIndexTest, UnknownTokenNeverMatches) {
  const auto idx = index_of({a, b, kSeparatorId}, {0}, 4);
  EXPECT_EQ(idx.count(Ngram{kUnknownId}), 0u);
  EXPECT_EQ(idx.count(Ngram{a, kUnknownId}), 0u);
}

TEST(FmIndexTest, ExtendRejectsOutOfVocabulary) {
  const auto idx = index_of({a, b, kSeparatorId}, {0}, 4);
  EXPECT_THROW(idx.extend(idx.full_range(), 4), Error);
  EXPECT_THROW(idx.match(Ngram{}), Error);
  EXPECT_THROW(idx.successors(IndexRange{1, 1}), Error);
}

TEST(FmIndexTest, BuildRejectsBadStreams) {
  EXPECT_THROW(index_of({}, {0}, 4), Error);
  EXPECT_THROW(index_of({a, b}, {0}, 4), Error);
  EXPECT_THROW(index_of({a, 9, kSeparatorId}, {0}, 4), Error);
}

TEST(FmIndexTest, TablesAgreeWithNaiveCounts) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto rc = random_corpus(rng, 300 + rng() % 500, 3 + rng() % 20, 12);
    FmIndexOptions opts{1u + static_cast<std::uint32_t>(rng() % 8), 1u + static_cast<std::uint32_t>(rng() % 40)};
    const auto idx = index_of(rc.stream, rc.boundaries, rc.vocab_size, opts);
    const auto bwt = idx.bwt();
    const auto ct = idx.c_table();
    EXPECT_EQ(ct.back(), bwt.size());
    for (TokenId t = 0; t <= idx.sentinel(); ++t) {
      EXPECT_EQ(ct[t + 1] - ct[t], static_cast<std::uint64_t>(std::count(bwt.begin(), bwt.end(), t)));
      std::uint64_t running = 0;
      for (std::uint64_t p = 0; p <= bwt.size(); ++p) {
        ASSERT_EQ(idx.occ(t, p), running);
        if (p < bwt.size()) running += bwt[p] == t;
      }
    }
    // LF is a permutation of the rows.
    std::vector<bool> hit(idx.size());
    for (std::uint64_t r = 0; r < idx.size(); ++r) hit[idx.lf(r)] = true;
    EXPECT_TRUE(std::all_of(hit.begin(), hit.end(), [](bool h) { return h; }));
  }
}

TEST(FmIndexTest, CountSuccessorsAndLocateMatchNaive) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 8; ++trial) {
    const auto rc = random_corpus(rng, 2000, 4 + rng() % 30, 25);
    const auto idx = index_of(rc.stream, rc.boundaries, rc.vocab_size, {4, 16});
    for (int q = 0; q < 200; ++q) {
      const Ngram p = random_pattern(rng, rc, 6, q % 3 != 0);
      ASSERT_EQ(idx.count(p), naive_count(rc.stream, p));
      EXPECT_EQ(idx.locate_contexts(p), naive_contexts(rc.stream, rc.boundaries, p));
      auto offsets = idx.locate_offsets(p);
      std::sort(offsets.begin(), offsets.end());
      std::vector<std::uint64_t> expected;
      for (std::size_t pos = 0; pos < rc.stream.size(); ++pos) {
        if (testing::occurs_at(rc.stream, pos, p)) expected.push_back(pos);
      }
      EXPECT_EQ(offsets, expected);
      const IndexRange r = idx.match(p);
      if (!r.empty()) {
        const auto s = idx.successors(r);
        const auto ns = naive_successors(rc.stream, p);
        std::set<TokenId> next;
        for (const auto& [t, sub] : s.next) {
          next.insert(t);
          Ngram longer = p;
          longer.push_back(t);
          EXPECT_EQ(sub, idx.match(longer));
        }
        EXPECT_EQ(next, ns.next);
        EXPECT_EQ(s.end_of_context, ns.end_of_context);
      }
    }
  }
}

TEST(FmIndexTest, LocateLimitTakesDistinctContexts) {
  const auto idx = index_of({a, kSeparatorId, a, b, kSeparatorId, a, kSeparatorId}, {0, 2, 5}, 4);
  EXPECT_EQ(idx.locate_contexts(Ngram{a}).size(), 3u);
  const auto two = idx.locate_contexts(Ngram{a}, 2);
  EXPECT_EQ(two.size(), 2u);
  EXPECT_TRUE(std::is_sorted(two.begin(), two.end()));
  EXPECT_EQ(idx.locate_offsets(Ngram{a}, 1).size(), 1u);
}

TEST(FmIndexTest, NgramPositionsMatchNaive) {
  std::mt19937_64 rng(21);
  const auto rc = random_corpus(rng, 800, 10, 15);
  const auto idx = index_of(rc.stream, rc.boundaries, rc.vocab_size);
  for (std::size_t k = 1; k <= 20; ++k) EXPECT_EQ(idx.ngram_positions(k), testing::naive_positions(rc.stream, k));
}

TEST(FmIndexTest, SerializationRoundTripAndDeterminism) {
  std::mt19937_64 rng(2);
  const auto rc = random_corpus(rng, 1500, 40);
  const auto idx = index_of(rc.stream, rc.boundaries, rc.vocab_size);
  const auto bytes = idx.serialize();
  EXPECT_EQ(bytes, index_of(rc.stream, rc.boundaries, rc.vocab_size).serialize());
  const auto back = FmIndex::deserialize(bytes);
  EXPECT_EQ(back.serialize(), bytes);
  for (int q = 0; q < 100; ++q) {
    const Ngram p = random_pattern(rng, rc, 4, true);
    EXPECT_EQ(back.count(p), idx.count(p));
    EXPECT_EQ(back.locate_contexts(p), idx.locate_contexts(p));
  }
  std::vector<char> truncated(bytes.begin(), bytes.end() - 8);
  EXPECT_THROW(FmIndex::deserialize(truncated), Error);
}

}  // namespace
}  // namespace unigen
