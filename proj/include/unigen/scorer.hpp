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

// Interactive context scoring: every generated n-gram gets a log-odds weight
// against its corpus frequency, and a context's score sums the weights of the
// generated n-grams it contains, discounted when an n-gram adds no tokens
// beyond the best-scoring n-grams.

#ifndef UNIGEN_SCORER_HPP_
#define UNIGEN_SCORER_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include "json.hpp"
#include "unigen/common.hpp"
#include "unigen/decoder.hpp"
#include "unigen/fm_index.hpp"

namespace unigen {

struct ScoringParams {
  double alpha = 2.0;
  double beta = 0.8;
  std::size_t g = 5;

  void validate() const {
    if (!(alpha > 0)) throw Error(ErrorCode::kInvalidArgument, "alpha must be positive");
    if (!(beta >= 0 && beta <= 1)) throw Error(ErrorCode::kInvalidArgument, "beta must be in [0,1]");
    if (g == 0) throw Error(ErrorCode::kInvalidArgument, "g must be at least 1");
  }
};

inline constexpr double kProbClamp = 1e-9;

// Corpus frequency of the n-gram over all separator-free windows of its length.
inline double unconditional_prob(const FmIndex& index, std::span<const TokenId> ngram) {
  const std::uint64_t c = index.count(ngram);
  if (c == 0) throw Error(ErrorCode::kInvalidArgument, "n-gram does not occur in the corpus");
  const std::uint64_t positions = index.ngram_positions(ngram.size());
  // An n-gram spanning a separator has no window of its own; it then counts
  // against its own occurrences.
  return static_cast<double>(c) / static_cast<double>(std::max(positions, c));
}

inline double ngram_weight(double p_unconditional, double p_conditional) {
  if (!(p_unconditional > 0 && p_unconditional < 1)) {
    throw Error(ErrorCode::kInvalidArgument, "unconditional probability must lie in (0,1)");
  }
  const double q = std::clamp(p_conditional, kProbClamp, 1.0 - kProbClamp);
  const double log_odds =
      std::log(q * (1.0 - p_unconditional) / (p_unconditional * (1.0 - q)));
  return std::max(0.0, log_odds);
}

struct WeightedNgram {
  Ngram ngram;
  double weight = 0;
};

// V(K): union of the tokens of the g highest-weight n-grams, sorted.
inline std::vector<TokenId> top_token_union(std::span<const WeightedNgram> k, std::size_t g) {
  std::vector<const WeightedNgram*> order;
  for (const auto& m : k) order.push_back(&m);
  std::sort(order.begin(), order.end(), [](const WeightedNgram* a, const WeightedNgram* b) {
    if (a->weight != b->weight) return a->weight > b->weight;
    return a->ngram < b->ngram;
  });
  std::vector<TokenId> v;
  for (std::size_t i = 0; i < std::min(g, order.size()); ++i) {
    v.insert(v.end(), order[i]->ngram.begin(), order[i]->ngram.end());
  }
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

inline double coverage_factor(std::span<const TokenId> r, std::span<const TokenId> top_tokens,
                              double beta) {
  std::vector<TokenId> set_r(r.begin(), r.end());
  std::sort(set_r.begin(), set_r.end());
  set_r.erase(std::unique(set_r.begin(), set_r.end()), set_r.end());
  if (set_r.empty()) throw Error(ErrorCode::kInvalidArgument, "empty n-gram");
  std::size_t novel = 0;
  for (TokenId t : set_r) novel += !std::binary_search(top_tokens.begin(), top_tokens.end(), t);
  return 1.0 - beta + beta * static_cast<double>(novel) / static_cast<double>(set_r.size());
}

inline double coverage_factor(std::span<const TokenId> r, std::span<const WeightedNgram> k,
                              const ScoringParams& params) {
  const auto v = top_token_union(k, params.g);
  return coverage_factor(r, v, params.beta);
}

// w(M, Q) for every generated n-gram, in canonical (n-gram) order.
inline std::vector<WeightedNgram> weigh_generated(const FmIndex& index, const GeneratedSet& k) {
  std::vector<WeightedNgram> out;
  for (const auto& e : k.entries) {
    const double p_m = unconditional_prob(index, e.tokens);
    const double w = p_m >= 1.0 ? 0.0 : ngram_weight(p_m, std::exp(e.logprob));
    out.push_back({e.tokens, w});
  }
  std::sort(out.begin(), out.end(),
            [](const WeightedNgram& a, const WeightedNgram& b) { return a.ngram < b.ngram; });
  return out;
}

struct Contributor {
  Ngram ngram;
  double weight = 0;
  double cover = 0;
};

struct ScoredContext {
  std::uint32_t context_id = 0;
  double score = 0;
  std::vector<Contributor> contributors;
};

inline std::vector<ScoredContext> rank_contexts(const FmIndex& index, const GeneratedSet& k,
                                                const ScoringParams& params,
                                                std::size_t limit = std::numeric_limits<std::size_t>::max()) {
  params.validate();
  const auto weighted = weigh_generated(index, k);
  const auto top_tokens = top_token_union(weighted, params.g);
  std::map<std::uint32_t, ScoredContext> by_context;
  for (const auto& m : weighted) {
    const double cover = coverage_factor(m.ngram, top_tokens, params.beta);
    const double term = std::pow(m.weight, params.alpha) * cover;
    for (std::uint32_t c : index.locate_contexts(m.ngram)) {
      auto& sc = by_context[c];
      sc.context_id = c;
      sc.score += term;
      sc.contributors.push_back({m.ngram, m.weight, cover});
    }
  }
  std::vector<ScoredContext> out;
  out.reserve(by_context.size());
  for (auto& [id, sc] : by_context) out.push_back(std::move(sc));
  std::stable_sort(out.begin(), out.end(), [](const ScoredContext& a, const ScoredContext& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.context_id < b.context_id;
  });
  if (out.size() > limit) out.resize(limit);
  return out;
}

inline nlohmann::json to_json(std::span<const ScoredContext> ranked) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : ranked) arr.push_back({{"context_id", s.context_id}, {"score", s.score}});
  return arr;
}

}  // namespace unigen

#endif  // UNIGEN_SCORER_HPP_
