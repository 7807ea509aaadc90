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

// Next-token models for constrained decoding. Every model returns
// log-probabilities normalized over the allowed set it is given; the
// separator id in an allowed set stands for "end the n-gram here".

#ifndef UNIGEN_MODEL_HPP_
#define UNIGEN_MODEL_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "unigen/common.hpp"
#include "unigen/corpus.hpp"
#include "unigen/fm_index.hpp"
#include "unigen/io.hpp"
#include "unigen/prompts.hpp"

namespace unigen {

struct PromptedQuery {
  std::string query_id;
  Ngram tokens;  // prompt tokens followed by query tokens
};

class SequenceModel {
 public:
  virtual ~SequenceModel() = default;

  // Log-probabilities aligned with `allowed`; exp-sum is 1.
  virtual std::vector<double> next_token_logprobs(const PromptedQuery& input,
                                                  std::span<const TokenId> prefix,
                                                  std::span<const TokenId> allowed) const = 0;

  // Size reporting for benchmarks; models without tables report zero.
  virtual std::size_t parameter_count() const { return 0; }
  virtual std::size_t memory_bytes() const { return 0; }
};

inline std::vector<double> normalized_logs(std::span<const double> masses) {
  double z = 0;
  for (double m : masses) z += m;
  std::vector<double> out;
  out.reserve(masses.size());
  for (double m : masses) out.push_back(std::log(m / z));
  return out;
}

class UniformModel final : public SequenceModel {
 public:
  std::vector<double> next_token_logprobs(const PromptedQuery&, std::span<const TokenId>,
                                          std::span<const TokenId> allowed) const override {
    return std::vector<double>(allowed.size(), -std::log(static_cast<double>(allowed.size())));
  }
};

// Closed-form lexical translation model mixed with a corpus bigram model:
//   p(w) ~ lambda * p_trans(w | Q) + (1 - lambda) * p_bigram(w | prev)
// with additive smoothing mu over the allowed set.
class CountTranslationModel final : public SequenceModel {
 public:
  CountTranslationModel() = default;
  CountTranslationModel(double lambda, double mu) : lambda_(lambda), mu_(mu) { validate(); }

  double lambda() const { return lambda_; }
  double mu() const { return mu_; }

  void add_translation(TokenId q, TokenId w, std::uint64_t n = 1) {
    trans_[key(q, w)] += n;
    trans_rows_[q] += n;
  }
  void add_bigram(TokenId a, TokenId b, std::uint64_t n = 1) {
    bigram_[key(a, b)] += n;
    bigram_rows_[a] += n;
  }
  void add_unigram(TokenId t, std::uint64_t n = 1) { unigram_[t] += n; }

  std::uint64_t trans_count(TokenId q, TokenId w) const { return lookup(trans_, key(q, w)); }
  std::uint64_t bigram_count(TokenId a, TokenId b) const { return lookup(bigram_, key(a, b)); }
  std::uint64_t unigram_count(TokenId t) const { return lookup(unigram_, t); }

  // Task prompt token sequences. They prefix every input identically, so they
  // are removed before counting or scoring query tokens.
  void set_prompts(std::vector<Ngram> prompts) {
    std::erase_if(prompts, [](const Ngram& p) { return p.empty(); });
    std::sort(prompts.begin(), prompts.end(),
              [](const Ngram& a, const Ngram& b) { return a.size() > b.size() || (a.size() == b.size() && a < b); });
    prompts_ = std::move(prompts);
  }
  const std::vector<Ngram>& prompts() const { return prompts_; }

  // Input tokens after the longest matching prompt prefix.
  std::span<const TokenId> query_tokens(std::span<const TokenId> input) const {
    for (const Ngram& p : prompts_) {
      if (p.size() <= input.size() && std::equal(p.begin(), p.end(), input.begin())) {
        return input.subspan(p.size());
      }
    }
    return input;
  }

  std::size_t translation_entries() const { return trans_.size(); }
  std::size_t bigram_entries() const { return bigram_.size(); }
  std::size_t unigram_entries() const { return unigram_.size(); }
  std::size_t parameter_count() const override {
    return translation_entries() + bigram_entries() + unigram_entries();
  }

  std::vector<double> next_token_logprobs(const PromptedQuery& input,
                                          std::span<const TokenId> prefix,
                                          std::span<const TokenId> allowed) const override {
    if (allowed.empty()) return {};
    const double a = static_cast<double>(allowed.size());

    std::map<TokenId, std::uint64_t> query_counts;
    for (TokenId q : query_tokens(input.tokens)) ++query_counts[q];
    double trans_total = 0;
    for (const auto& [q, mult] : query_counts) {
      trans_total += static_cast<double>(mult) * static_cast<double>(lookup(trans_rows_, q));
    }
    const double trans_denominator = trans_total + mu_ * a;

    const bool has_prev = !prefix.empty();
    const TokenId prev = has_prev ? prefix.back() : 0;
    const double bigram_denominator =
        has_prev ? static_cast<double>(lookup(bigram_rows_, prev)) + mu_ * a : 0;

    std::vector<double> mass;
    mass.reserve(allowed.size());
    for (TokenId w : allowed) {
      double co = 0;
      for (const auto& [q, mult] : query_counts) {
        co += static_cast<double>(mult) * static_cast<double>(trans_count(q, w));
      }
      const double p_trans = (co + mu_) / trans_denominator;
      const double p_bigram =
          has_prev ? (static_cast<double>(bigram_count(prev, w)) + mu_) / bigram_denominator
                   : 1.0 / a;
      mass.push_back(lambda_ * p_trans + (1.0 - lambda_) * p_bigram);
    }
    return normalized_logs(mass);
  }

  std::vector<char> serialize() const {
    BinaryWriter w;
    w.put_bytes(kMagic);
    w.put<std::uint32_t>(kVersion);
    w.put<double>(lambda_);
    w.put<double>(mu_);
    put_table(w, trans_);
    put_table(w, bigram_);
    put_table(w, unigram_);
    w.put<std::uint64_t>(prompts_.size());
    for (const Ngram& p : prompts_) w.put_array<TokenId>(p);
    return w.bytes();
  }

  static CountTranslationModel deserialize(std::span<const char> bytes) {
    BinaryReader r(bytes);
    r.expect_magic(kMagic);
    if (r.get<std::uint32_t>() != kVersion) throw Error(ErrorCode::kFormat, "unsupported model version");
    const double lambda = r.get<double>();
    const double mu = r.get<double>();
    CountTranslationModel m(lambda, mu);
    for (const auto& [k, n] : get_table(r)) m.add_translation(first(k), second(k), n);
    for (const auto& [k, n] : get_table(r)) m.add_bigram(first(k), second(k), n);
    for (const auto& [k, n] : get_table(r)) m.add_unigram(static_cast<TokenId>(k), n);
    std::vector<Ngram> prompts(r.get<std::uint64_t>());
    for (auto& p : prompts) p = r.get_array<TokenId>();
    m.set_prompts(std::move(prompts));
    if (!r.at_end()) throw Error(ErrorCode::kFormat, "trailing bytes in model file");
    return m;
  }

  void save(const std::string& path) const { write_file_bytes(path, serialize()); }
  static CountTranslationModel load(const std::string& path) {
    const auto bytes = read_file_bytes(path);
    return deserialize(bytes);
  }

  std::size_t memory_bytes() const override {
    // Rough hash-table footprint: key, value and one pointer per entry.
    constexpr std::size_t kEntry = 3 * sizeof(std::uint64_t);
    return (trans_.size() + trans_rows_.size() + bigram_.size() + bigram_rows_.size() +
            unigram_.size()) * kEntry;
  }

 private:
  using Table = std::unordered_map<std::uint64_t, std::uint64_t>;
  static constexpr std::string_view kMagic = "UNGM";
  static constexpr std::uint32_t kVersion = 1;

  static std::uint64_t key(TokenId a, TokenId b) { return (std::uint64_t{a} << 32) | b; }
  static TokenId first(std::uint64_t k) { return static_cast<TokenId>(k >> 32); }
  static TokenId second(std::uint64_t k) { return static_cast<TokenId>(k & 0xffffffffu); }

  template <typename Map, typename K>
  static std::uint64_t lookup(const Map& m, K k) {
    auto it = m.find(k);
    return it == m.end() ? 0 : it->second;
  }

  template <typename Map>
  static void put_table(BinaryWriter& w, const Map& m) {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> sorted(m.begin(), m.end());
    std::sort(sorted.begin(), sorted.end());
    w.put<std::uint64_t>(sorted.size());
    for (const auto& [k, n] : sorted) {
      w.put<std::uint64_t>(k);
      w.put<std::uint64_t>(n);
    }
  }

  static std::vector<std::pair<std::uint64_t, std::uint64_t>> get_table(BinaryReader& r) {
    const auto n = r.get<std::uint64_t>();
    std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
    for (std::uint64_t i = 0; i < n; ++i) {
      const auto k = r.get<std::uint64_t>();
      out.emplace_back(k, r.get<std::uint64_t>());
    }
    return out;
  }

  void validate() const {
    if (!(lambda_ >= 0 && lambda_ <= 1)) throw Error(ErrorCode::kInvalidArgument, "lambda must be in [0,1]");
    if (!(mu_ > 0)) throw Error(ErrorCode::kInvalidArgument, "mu must be positive");
  }

  double lambda_ = 0.5;
  double mu_ = 0.1;
  Table trans_;
  std::unordered_map<TokenId, std::uint64_t> trans_rows_;
  Table bigram_;
  std::unordered_map<TokenId, std::uint64_t> bigram_rows_;
  std::unordered_map<TokenId, std::uint64_t> unigram_;
  std::vector<Ngram> prompts_;
};

// Single pass over the mixture and the corpus stream; separators break bigrams.
inline CountTranslationModel train_count_model(std::span<const TrainingRecord> mixture,
                                               const TokenizedCorpus& tc, double lambda = 0.5,
                                               double mu = 0.1) {
  if (mixture.empty()) throw Error(ErrorCode::kInvalidArgument, "empty training mixture");
  CountTranslationModel m(lambda, mu);
  std::vector<Ngram> prompts;
  for (const auto& spec : task_registry()) prompts.push_back(tc.tokenizer.encode(spec.discrete_prompt));
  m.set_prompts(std::move(prompts));
  for (const auto& r : mixture) {
    for (TokenId q : m.query_tokens(r.input)) {
      for (TokenId w : r.target) m.add_translation(q, w);
    }
  }
  for (std::size_t i = 0; i < tc.stream.size(); ++i) {
    const TokenId t = tc.stream[i];
    if (t == kSeparatorId) continue;
    m.add_unigram(t);
    if (i + 1 < tc.stream.size() && tc.stream[i + 1] != kSeparatorId) m.add_bigram(t, tc.stream[i + 1]);
  }
  return m;
}

// Test double: puts 0.99 of the mass on tokens that continue one of the
// query's gold n-grams (the separator continues a completed gold n-gram).
class OracleModel final : public SequenceModel {
 public:
  static constexpr double kGoldMass = 0.99;

  explicit OracleModel(std::map<std::string, std::vector<Ngram>> gold) : gold_(std::move(gold)) {
    if (gold_.empty()) throw Error(ErrorCode::kInvalidArgument, "oracle needs gold n-grams");
  }

  std::vector<double> next_token_logprobs(const PromptedQuery& input,
                                          std::span<const TokenId> prefix,
                                          std::span<const TokenId> allowed) const override {
    std::vector<char> is_gold(allowed.size(), 0);
    std::size_t num_gold = 0;
    if (auto it = gold_.find(input.query_id); it != gold_.end()) {
      for (const Ngram& g : it->second) {
        if (g.size() < prefix.size() || !std::equal(prefix.begin(), prefix.end(), g.begin())) continue;
        const TokenId next = g.size() > prefix.size() ? g[prefix.size()] : kSeparatorId;
        auto pos = std::find(allowed.begin(), allowed.end(), next);
        if (pos == allowed.end()) continue;
        auto& flag = is_gold[static_cast<std::size_t>(pos - allowed.begin())];
        if (!flag) {
          flag = 1;
          ++num_gold;
        }
      }
    }
    const std::size_t num_other = allowed.size() - num_gold;
    if (num_gold == 0 || num_other == 0) {
      return std::vector<double>(allowed.size(), -std::log(static_cast<double>(allowed.size())));
    }
    const double gold_lp = std::log(kGoldMass / static_cast<double>(num_gold));
    const double other_lp = std::log((1.0 - kGoldMass) / static_cast<double>(num_other));
    std::vector<double> out(allowed.size());
    for (std::size_t i = 0; i < allowed.size(); ++i) out[i] = is_gold[i] ? gold_lp : other_lp;
    return out;
  }

 private:
  std::map<std::string, std::vector<Ngram>> gold_;
};

// Tokens a decoder may emit after a match: the valid successors, plus the
// separator (meaning "stop") when the n-gram can end a context. Ascending.
inline std::vector<TokenId> allowed_tokens(const Successors& succ, bool allow_end) {
  std::vector<TokenId> out;
  out.reserve(succ.next.size() + 1);
  if (allow_end && succ.end_of_context) out.push_back(kSeparatorId);
  for (const auto& [t, r] : succ.next) out.push_back(t);
  return out;
}

// log p(M | S, Q) by the chain rule, each step normalized over the index
// successors of the prefix.
inline double sequence_logprob(const SequenceModel& model, const PromptedQuery& input,
                               std::span<const TokenId> ngram, const FmIndex& index) {
  if (ngram.empty() || index.count(ngram) == 0) {
    throw Error(ErrorCode::kInvalidArgument, "n-gram does not occur in the corpus");
  }
  double total = 0;
  IndexRange range = index.full_range();
  for (std::size_t k = 0; k < ngram.size(); ++k) {
    const auto succ = index.successors(range);
    const auto allowed = allowed_tokens(succ, k > 0);
    const auto lps = model.next_token_logprobs(input, ngram.first(k), allowed);
    auto pos = std::lower_bound(allowed.begin(), allowed.end(), ngram[k]);
    total += lps[static_cast<std::size_t>(pos - allowed.begin())];
    range = index.extend(range, ngram[k]);
  }
  return total;
}

}  // namespace unigen

#endif  // UNIGEN_MODEL_HPP_
