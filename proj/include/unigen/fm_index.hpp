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

// FM-index over the reversed token stream.
//
// The indexed text is T = reverse(stream) + [sentinel]. Backward search on T
// prepends a symbol to the reversed pattern, which is the same as appending a
// token on the right of the n-gram in stream order. A match range for an
// n-gram M therefore extends to the range for M+[t] in one LF step, and the
// BWT symbols inside the range are exactly the tokens that follow M in the
// stream.
//
// Row r of the conceptual sorted rotation matrix has suffix array value
// SA[r] = p; an n-gram of length k matched at row r starts at stream offset
// |stream| - p - k.

#ifndef UNIGEN_FM_INDEX_HPP_
#define UNIGEN_FM_INDEX_HPP_

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "unigen/common.hpp"
#include "unigen/corpus.hpp"
#include "unigen/io.hpp"

namespace unigen {

struct IndexRange {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;

  std::uint64_t size() const { return hi - lo; }
  bool empty() const { return lo == hi; }
  bool operator==(const IndexRange&) const = default;
};

// Suffix array by prefix doubling with radix passes, O(n log n). Symbols must
// be < alphabet and the last symbol must be unique.
inline std::vector<std::uint64_t> build_suffix_array(std::span<const std::uint32_t> text,
                                                     std::uint64_t alphabet) {
  const std::uint64_t n = text.size();
  std::vector<std::uint64_t> sa(n), rank(n), tmp(n), second(n);
  if (n == 0) return sa;
  const std::uint64_t buckets = std::max<std::uint64_t>(alphabet, n) + 1;
  std::vector<std::uint64_t> count(buckets);

  auto counting_sort_by_rank = [&](const std::vector<std::uint64_t>& order) {
    std::fill(count.begin(), count.end(), 0);
    for (std::uint64_t i : order) ++count[rank[i]];
    std::uint64_t sum = 0;
    for (auto& c : count) sum += std::exchange(c, sum);
    for (std::uint64_t i : order) sa[count[rank[i]]++] = i;
  };

  for (std::uint64_t i = 0; i < n; ++i) rank[i] = text[i];
  std::iota(second.begin(), second.end(), 0);
  counting_sort_by_rank(second);
  {
    tmp[sa[0]] = 0;
    for (std::uint64_t i = 1; i < n; ++i) {
      tmp[sa[i]] = tmp[sa[i - 1]] + (text[sa[i]] != text[sa[i - 1]]);
    }
    rank.swap(tmp);
  }

  for (std::uint64_t k = 1; rank[sa[n - 1]] + 1 < n; k <<= 1) {
    // Order by the second key: suffixes without a k-offset partner first.
    std::uint64_t m = 0;
    for (std::uint64_t i = k >= n ? 0 : n - k; i < n; ++i) second[m++] = i;
    for (std::uint64_t j = 0; j < n; ++j) {
      if (sa[j] >= k) second[m++] = sa[j] - k;
    }
    counting_sort_by_rank(second);
    auto key2 = [&](std::uint64_t i) -> std::uint64_t { return i + k < n ? rank[i + k] + 1 : 0; };
    tmp[sa[0]] = 0;
    for (std::uint64_t i = 1; i < n; ++i) {
      const std::uint64_t a = sa[i - 1], b = sa[i];
      tmp[b] = tmp[a] + (rank[a] != rank[b] || key2(a) != key2(b));
    }
    rank.swap(tmp);
  }
  return sa;
}

// Plain bitvector with constant-time rank1.
class RankBitVector {
 public:
  RankBitVector() = default;
  explicit RankBitVector(std::uint64_t n) : size_(n), words_((n + 63) / 64, 0) {}

  void set(std::uint64_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
  bool get(std::uint64_t i) const { return (words_[i / 64] >> (i % 64)) & 1; }

  void build_rank() {
    ranks_.assign(words_.size() + 1, 0);
    for (std::size_t w = 0; w < words_.size(); ++w) {
      ranks_[w + 1] = ranks_[w] + static_cast<std::uint64_t>(std::popcount(words_[w]));
    }
  }

  // Number of set bits in [0, i).
  std::uint64_t rank1(std::uint64_t i) const {
    const std::uint64_t w = i / 64, b = i % 64;
    std::uint64_t r = ranks_[w];
    if (b != 0) r += static_cast<std::uint64_t>(std::popcount(words_[w] & ((std::uint64_t{1} << b) - 1)));
    return r;
  }

  std::uint64_t size() const { return size_; }
  const std::vector<std::uint64_t>& words() const { return words_; }

  static RankBitVector from_words(std::uint64_t n, std::vector<std::uint64_t> words) {
    if (words.size() != (n + 63) / 64) throw Error(ErrorCode::kFormat, "bitvector size mismatch");
    RankBitVector bv;
    bv.size_ = n;
    bv.words_ = std::move(words);
    bv.build_rank();
    return bv;
  }

  std::size_t memory_bytes() const {
    return (words_.size() + ranks_.size()) * sizeof(std::uint64_t);
  }

 private:
  std::uint64_t size_ = 0;
  std::vector<std::uint64_t> words_;
  std::vector<std::uint64_t> ranks_;
};

struct FmIndexOptions {
  std::uint32_t sample_rate = 32;
  std::uint32_t checkpoint_stride = 128;
};

struct Successors {
  std::vector<std::pair<TokenId, IndexRange>> next;  // ascending token id
  bool end_of_context = false;
};

class FmIndex {
 public:
  FmIndex() = default;

  static FmIndex build(const TokenizedCorpus& tc, FmIndexOptions options = {}) {
    return build(tc.stream, tc.boundaries, tc.vocab_size(), options);
  }

  static FmIndex build(std::span<const TokenId> stream, std::vector<std::uint64_t> boundaries,
                       std::size_t vocab_size, FmIndexOptions options = {}) {
    if (stream.empty()) throw Error(ErrorCode::kInvalidArgument, "cannot index an empty stream");
    if (stream.back() != kSeparatorId) {
      throw Error(ErrorCode::kInvalidArgument, "stream must end with a separator");
    }
    if (options.sample_rate == 0 || options.checkpoint_stride == 0) {
      throw Error(ErrorCode::kInvalidArgument, "sample rate and checkpoint stride must be positive");
    }
    FmIndex idx;
    idx.sample_rate_ = options.sample_rate;
    idx.stride_ = options.checkpoint_stride;
    idx.vocab_size_ = static_cast<std::uint32_t>(vocab_size);
    idx.boundaries_ = std::move(boundaries);

    const std::uint64_t n = stream.size();
    const TokenId sentinel = idx.vocab_size_;
    std::vector<std::uint32_t> text(n + 1);
    for (std::uint64_t i = 0; i < n; ++i) {
      if (stream[n - 1 - i] >= vocab_size) {
        throw Error(ErrorCode::kInvalidArgument, "stream token outside vocabulary");
      }
      text[i] = stream[n - 1 - i];
    }
    text[n] = sentinel;

    const auto sa = build_suffix_array(text, std::uint64_t{sentinel} + 1);
    idx.bwt_.resize(n + 1);
    for (std::uint64_t r = 0; r <= n; ++r) idx.bwt_[r] = text[(sa[r] + n) % (n + 1)];

    idx.c_table_.assign(idx.sigma() + 1, 0);
    for (TokenId t : idx.bwt_) ++idx.c_table_[t + 1];
    for (std::size_t t = 1; t < idx.c_table_.size(); ++t) idx.c_table_[t] += idx.c_table_[t - 1];

    idx.build_checkpoints();

    idx.sampled_ = RankBitVector(n + 1);
    for (std::uint64_t r = 0; r <= n; ++r) {
      if (sa[r] % idx.sample_rate_ == 0) idx.sampled_.set(r);
    }
    idx.sampled_.build_rank();
    for (std::uint64_t r = 0; r <= n; ++r) {
      if (sa[r] % idx.sample_rate_ == 0) idx.samples_.push_back(sa[r]);
    }
    idx.build_length_table();
    return idx;
  }

  std::uint64_t size() const { return bwt_.size(); }
  std::uint64_t stream_size() const { return bwt_.size() - 1; }
  std::uint32_t vocab_size() const { return vocab_size_; }
  TokenId sentinel() const { return vocab_size_; }
  std::uint32_t sample_rate() const { return sample_rate_; }
  std::uint32_t checkpoint_stride() const { return stride_; }
  std::size_t num_contexts() const { return boundaries_.size(); }
  std::span<const TokenId> bwt() const { return bwt_; }
  std::span<const std::uint64_t> c_table() const { return c_table_; }
  std::span<const std::uint64_t> boundaries() const { return boundaries_; }

  // Occurrences of symbol t in bwt[0, p).
  std::uint64_t occ(TokenId t, std::uint64_t p) const {
    const std::uint64_t block = p / stride_;
    std::uint64_t r = checkpoints_[block * sigma() + t];
    for (std::uint64_t i = block * stride_; i < p; ++i) r += (bwt_[i] == t);
    return r;
  }

  std::uint64_t lf(std::uint64_t row) const {
    const TokenId t = bwt_[row];
    return c_table_[t] + occ(t, row);
  }

  IndexRange full_range() const { return {0, size()}; }

  // Rows whose suffix starts with symbol t; t may be the sentinel.
  IndexRange symbol_range(TokenId t) const {
    if (t > sentinel()) throw Error(ErrorCode::kOutOfRange, "symbol outside alphabet");
    return {c_table_[t], c_table_[t + 1]};
  }

  IndexRange extend(IndexRange range, TokenId token) const {
    if (token >= vocab_size_) {
      throw Error(ErrorCode::kOutOfRange, "token " + std::to_string(token) + " >= vocab size");
    }
    if (range.lo > range.hi || range.hi > size()) {
      throw Error(ErrorCode::kOutOfRange, "invalid index range");
    }
    return {c_table_[token] + occ(token, range.lo), c_table_[token] + occ(token, range.hi)};
  }

  IndexRange match(std::span<const TokenId> ngram) const {
    if (ngram.empty()) throw Error(ErrorCode::kInvalidArgument, "empty n-gram");
    IndexRange r = full_range();
    for (TokenId t : ngram) {
      r = extend(r, t);
      if (r.empty()) break;
    }
    return r;
  }

  std::uint64_t count(std::span<const TokenId> ngram) const { return match(ngram).size(); }

  // Tokens that can follow the matched n-gram. Separator and sentinel are
  // folded into end_of_context.
  Successors successors(IndexRange range) const {
    if (range.empty()) throw Error(ErrorCode::kInvalidArgument, "successors of an empty range");
    if (range.hi > size()) throw Error(ErrorCode::kOutOfRange, "invalid index range");
    Successors out;
    if (range == full_range()) {
      out.end_of_context = true;
      for (TokenId t = kSeparatorId + 1; t < vocab_size_; ++t) {
        if (c_table_[t + 1] > c_table_[t]) out.next.push_back({t, {c_table_[t], c_table_[t + 1]}});
      }
      return out;
    }
    std::vector<TokenId> seen(bwt_.begin() + static_cast<std::ptrdiff_t>(range.lo),
                              bwt_.begin() + static_cast<std::ptrdiff_t>(range.hi));
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    for (TokenId t : seen) {
      if (t == kSeparatorId || t == sentinel()) {
        out.end_of_context = true;
      } else {
        out.next.push_back({t, extend(range, t)});
      }
    }
    return out;
  }

  // Position in the indexed (reversed) text of the suffix at `row`.
  std::uint64_t locate_row(std::uint64_t row) const {
    std::uint64_t steps = 0;
    while (!sampled_.get(row)) {
      row = lf(row);
      ++steps;
    }
    return samples_[sampled_.rank1(row)] + steps;
  }

  // Stream start offsets of an n-gram's occurrences, in row order.
  std::vector<std::uint64_t> locate_offsets(std::span<const TokenId> ngram,
                                            std::optional<std::size_t> limit = {}) const {
    const IndexRange r = match(ngram);
    std::vector<std::uint64_t> out;
    const std::uint64_t n = stream_size();
    for (std::uint64_t row = r.lo; row < r.hi; ++row) {
      if (limit && out.size() >= *limit) break;
      out.push_back(n - locate_row(row) - ngram.size());
    }
    return out;
  }

  std::uint32_t context_of(std::uint64_t offset) const {
    return context_of_offset(boundaries_, stream_size(), offset);
  }

  // Sorted ids of contexts containing the n-gram. With a limit, rows are
  // resolved lowest first until `limit` distinct contexts are found.
  std::vector<std::uint32_t> locate_contexts(std::span<const TokenId> ngram,
                                             std::optional<std::size_t> limit = {}) const {
    const IndexRange r = match(ngram);
    const std::uint64_t n = stream_size();
    std::vector<std::uint32_t> out;
    for (std::uint64_t row = r.lo; row < r.hi; ++row) {
      const std::uint32_t c = context_of(n - locate_row(row) - ngram.size());
      if (std::find(out.begin(), out.end(), c) == out.end()) {
        if (limit && out.size() >= *limit) break;
        out.push_back(c);
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  std::uint64_t context_length(std::size_t i) const {
    const std::uint64_t end = i + 1 < boundaries_.size() ? boundaries_[i + 1] : stream_size();
    return end - boundaries_[i] - 1;
  }

  // Number of separator-free windows of length k across all contexts.
  std::uint64_t ngram_positions(std::uint64_t k) const {
    if (k == 0) return 0;
    // lengths_ is ascending; windows = sum over len >= k of (len - k + 1).
    auto it = std::lower_bound(lengths_.begin(), lengths_.end(), k);
    const auto idx = static_cast<std::size_t>(std::distance(lengths_.begin(), it));
    const std::uint64_t num = lengths_.size() - idx;
    return length_suffix_sums_[idx] - num * (k - 1);
  }

  std::size_t memory_bytes() const {
    return bwt_.size() * sizeof(TokenId) + c_table_.size() * sizeof(std::uint64_t) +
           checkpoints_.size() * sizeof(std::uint32_t) + sampled_.memory_bytes() +
           samples_.size() * sizeof(std::uint64_t) + boundaries_.size() * sizeof(std::uint64_t) +
           (lengths_.size() + length_suffix_sums_.size()) * sizeof(std::uint64_t);
  }

  std::vector<char> serialize() const {
    BinaryWriter w;
    w.put_bytes(kMagic);
    w.put<std::uint32_t>(kVersion);
    w.put<std::uint32_t>(sample_rate_);
    w.put<std::uint32_t>(stride_);
    w.put<std::uint32_t>(vocab_size_);
    w.put_array<TokenId>(bwt_);
    w.put_array<std::uint64_t>(c_table_);
    w.put_array<std::uint32_t>(checkpoints_);
    w.put<std::uint64_t>(sampled_.size());
    w.put_array<std::uint64_t>(sampled_.words());
    w.put_array<std::uint64_t>(samples_);
    w.put_array<std::uint64_t>(boundaries_);
    return w.bytes();
  }

  static FmIndex deserialize(std::span<const char> bytes) {
    BinaryReader r(bytes);
    r.expect_magic(kMagic);
    if (r.get<std::uint32_t>() != kVersion) throw Error(ErrorCode::kFormat, "unsupported index version");
    FmIndex idx;
    idx.sample_rate_ = r.get<std::uint32_t>();
    idx.stride_ = r.get<std::uint32_t>();
    idx.vocab_size_ = r.get<std::uint32_t>();
    if (idx.sample_rate_ == 0 || idx.stride_ == 0) throw Error(ErrorCode::kFormat, "bad index header");
    idx.bwt_ = r.get_array<TokenId>();
    idx.c_table_ = r.get_array<std::uint64_t>();
    idx.checkpoints_ = r.get_array<std::uint32_t>();
    const auto bits = r.get<std::uint64_t>();
    idx.sampled_ = RankBitVector::from_words(bits, r.get_array<std::uint64_t>());
    idx.samples_ = r.get_array<std::uint64_t>();
    idx.boundaries_ = r.get_array<std::uint64_t>();
    if (!r.at_end()) throw Error(ErrorCode::kFormat, "trailing bytes in index file");
    const std::uint64_t n = idx.bwt_.size();
    if (n == 0 || bits != n || idx.c_table_.size() != idx.sigma() + 1 ||
        idx.c_table_.back() != n ||
        idx.checkpoints_.size() != (n / idx.stride_ + 1) * idx.sigma() ||
        idx.samples_.size() != idx.sampled_.rank1(n) || idx.boundaries_.empty()) {
      throw Error(ErrorCode::kFormat, "inconsistent index sections");
    }
    idx.build_length_table();
    return idx;
  }

  void save(const std::string& path) const { write_file_bytes(path, serialize()); }

  static FmIndex load(const std::string& path) {
    const auto bytes = read_file_bytes(path);
    return deserialize(bytes);
  }

 private:
  static constexpr std::string_view kMagic = "UNGF";
  static constexpr std::uint32_t kVersion = 1;

  std::uint64_t sigma() const { return std::uint64_t{vocab_size_} + 1; }

  void build_checkpoints() {
    const std::uint64_t n = bwt_.size();
    const std::uint64_t blocks = n / stride_ + 1;
    checkpoints_.assign(blocks * sigma(), 0);
    std::vector<std::uint32_t> running(sigma(), 0);
    for (std::uint64_t b = 0; b < blocks; ++b) {
      std::copy(running.begin(), running.end(),
                checkpoints_.begin() + static_cast<std::ptrdiff_t>(b * sigma()));
      const std::uint64_t end = std::min(n, (b + 1) * stride_);
      for (std::uint64_t i = b * stride_; i < end; ++i) ++running[bwt_[i]];
    }
  }

  void build_length_table() {
    lengths_.clear();
    for (std::size_t i = 0; i < boundaries_.size(); ++i) lengths_.push_back(context_length(i));
    std::sort(lengths_.begin(), lengths_.end());
    length_suffix_sums_.assign(lengths_.size() + 1, 0);
    for (std::size_t i = lengths_.size(); i-- > 0;) {
      length_suffix_sums_[i] = length_suffix_sums_[i + 1] + lengths_[i];
    }
  }

  std::uint32_t sample_rate_ = 32;
  std::uint32_t stride_ = 128;
  std::uint32_t vocab_size_ = 0;
  std::vector<TokenId> bwt_;
  std::vector<std::uint64_t> c_table_;
  // Block-major: checkpoints_[b * sigma + t] = occ(t, b * stride).
  std::vector<std::uint32_t> checkpoints_;
  RankBitVector sampled_;
  std::vector<std::uint64_t> samples_;
  std::vector<std::uint64_t> boundaries_;
  std::vector<std::uint64_t> lengths_;
  std::vector<std::uint64_t> length_suffix_sums_;
};

}  // namespace unigen

#endif  // UNIGEN_FM_INDEX_HPP_
