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

// N-gram identifiers: token importance -> span importance -> per-n-gram
// saturated importance -> softmax distribution -> v sampled n-grams.

#ifndef UNIGEN_IDENTIFIERS_HPP_
#define UNIGEN_IDENTIFIERS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include "unigen/common.hpp"
#include "unigen/corpus.hpp"
#include "unigen/io.hpp"

namespace unigen {

enum class WeightProvider { kExternalFile, kSurrogate };

struct TokenWeightVector {
  std::uint32_t context_id = 0;
  std::vector<double> weights;
  WeightProvider provider = WeightProvider::kSurrogate;
};

struct IdentifierParams {
  std::size_t n = 10;
  std::size_t v = 10;
  double rho = 0.01;
};

struct NgramDistribution {
  std::uint32_t context_id = 0;
  std::vector<std::pair<Ngram, double>> entries;  // sorted by n-gram
  double saturation_rho = 0.01;
};

struct IdentifierSet {
  std::uint32_t context_id = 0;
  std::vector<Ngram> ngrams;
  std::size_t v = 0;
  std::size_t n = 0;
};

inline void validate_weights(std::span<const double> weights, std::size_t expected_len) {
  if (weights.size() != expected_len) {
    throw Error(ErrorCode::kInvalidArgument,
                "weight vector has " + std::to_string(weights.size()) + " entries, context has " +
                    std::to_string(expected_len) + " tokens");
  }
  for (double w : weights) {
    if (!std::isfinite(w) || w < 0) {
      throw Error(ErrorCode::kInvalidArgument, "token weights must be finite and non-negative");
    }
  }
}

// Mean token weight of every window of length n, indexed by start position.
// A context shorter than n yields one window covering all of it.
inline std::vector<double> span_importance(std::span<const double> weights, std::size_t n) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "n-gram length must be positive");
  if (weights.empty()) throw Error(ErrorCode::kInvalidArgument, "context has no tokens");
  const std::size_t len = std::min(n, weights.size());
  std::vector<double> out;
  out.reserve(weights.size() - len + 1);
  for (std::size_t j = 0; j + len <= weights.size(); ++j) {
    double sum = 0;
    for (std::size_t i = j; i < j + len; ++i) sum += weights[i];
    out.push_back(sum / static_cast<double>(len));
  }
  return out;
}

inline double saturate(double importance, double rho) { return importance / (rho + importance); }

// Sums span importance over repeated positions of the same n-gram, then
// applies the saturation curve.
inline std::map<Ngram, double> aggregate_saturate(std::span<const double> spans,
                                                  std::span<const TokenId> tokens,
                                                  std::size_t n, double rho) {
  if (!(rho > 0)) throw Error(ErrorCode::kInvalidArgument, "rho must be positive");
  const std::size_t len = std::min(n, tokens.size());
  if (spans.size() != tokens.size() - len + 1) {
    throw Error(ErrorCode::kInvalidArgument, "span count does not match context length");
  }
  std::map<Ngram, double> summed;
  for (std::size_t j = 0; j < spans.size(); ++j) {
    summed[Ngram(tokens.begin() + static_cast<std::ptrdiff_t>(j),
                 tokens.begin() + static_cast<std::ptrdiff_t>(j + len))] += spans[j];
  }
  for (auto& [ngram, value] : summed) value = saturate(value, rho);
  return summed;
}

inline NgramDistribution ngram_distribution(const std::map<Ngram, double>& saturated, double rho,
                                            std::uint32_t context_id = 0) {
  if (saturated.empty()) throw Error(ErrorCode::kInvalidArgument, "no n-grams to normalize");
  NgramDistribution dist;
  dist.context_id = context_id;
  dist.saturation_rho = rho;
  double max_score = -INFINITY;
  for (const auto& [ngram, score] : saturated) max_score = std::max(max_score, score);
  double z = 0;
  for (const auto& [ngram, score] : saturated) {
    const double e = std::exp(score - max_score);
    dist.entries.emplace_back(ngram, e);
    z += e;
  }
  for (auto& [ngram, p] : dist.entries) p /= z;
  return dist;
}

// Uniform double in [0, 1) from the standard-specified mt19937_64 stream, so
// samples are identical across standard libraries.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Draws up to v distinct n-grams without replacement, renormalizing over the
// remaining mass after each draw.
inline IdentifierSet sample_identifiers(const NgramDistribution& dist, std::size_t v,
                                        std::uint64_t seed, std::size_t n = 0) {
  if (v == 0) throw Error(ErrorCode::kInvalidArgument, "v must be at least 1");
  IdentifierSet out;
  out.context_id = dist.context_id;
  out.v = v;
  out.n = n;
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> remaining(dist.entries.size());
  for (std::size_t i = 0; i < remaining.size(); ++i) remaining[i] = i;
  while (out.ngrams.size() < v && !remaining.empty()) {
    double total = 0;
    for (std::size_t i : remaining) total += dist.entries[i].second;
    const double target = uniform01(rng) * total;
    double acc = 0;
    std::size_t pick = remaining.size() - 1;
    for (std::size_t k = 0; k < remaining.size(); ++k) {
      acc += dist.entries[remaining[k]].second;
      if (target < acc) {
        pick = k;
        break;
      }
    }
    out.ngrams.push_back(dist.entries[remaining[pick]].first);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return out;
}

inline constexpr double kQueryOverlapBonus = 1.0;

// idf-based stand-in for attention weights, boosted for query tokens and
// normalized to sum 1. Falls back to uniform when every idf is zero.
inline TokenWeightVector surrogate_weights(std::span<const TokenId> query,
                                           std::span<const TokenId> context_tokens,
                                           std::span<const std::uint32_t> document_frequency,
                                           std::size_t num_contexts,
                                           std::uint32_t context_id = 0) {
  if (context_tokens.empty()) throw Error(ErrorCode::kInvalidArgument, "context has no tokens");
  std::vector<TokenId> q(query.begin(), query.end());
  std::sort(q.begin(), q.end());
  TokenWeightVector out{context_id, {}, WeightProvider::kSurrogate};
  out.weights.reserve(context_tokens.size());
  double sum = 0;
  for (TokenId t : context_tokens) {
    const double df = t < document_frequency.size() ? document_frequency[t] : 0.0;
    const double idf = std::log((1.0 + static_cast<double>(num_contexts)) / (1.0 + df));
    const bool in_query = std::binary_search(q.begin(), q.end(), t);
    const double w = std::max(0.0, idf) * (1.0 + (in_query ? kQueryOverlapBonus : 0.0));
    out.weights.push_back(w);
    sum += w;
  }
  for (auto& w : out.weights) w = sum > 0 ? w / sum : 1.0 / static_cast<double>(out.weights.size());
  return out;
}

inline NgramDistribution context_distribution(std::span<const TokenId> tokens,
                                              std::span<const double> weights, std::size_t n,
                                              double rho, std::uint32_t context_id = 0) {
  validate_weights(weights, tokens.size());
  const auto spans = span_importance(weights, n);
  return ngram_distribution(aggregate_saturate(spans, tokens, n, rho), rho, context_id);
}

inline std::uint64_t context_seed(std::uint64_t global_seed, std::uint32_t context_id) {
  return global_seed ^ context_id;
}

inline IdentifierSet build_identifiers(std::span<const TokenId> tokens,
                                       std::span<const double> weights,
                                       const IdentifierParams& params, std::uint64_t global_seed,
                                       std::uint32_t context_id) {
  const auto dist = context_distribution(tokens, weights, params.n, params.rho, context_id);
  return sample_identifiers(dist, params.v, context_seed(global_seed, context_id), params.n);
}

// Entities are identified by their full title.
inline IdentifierSet entity_identifier(std::span<const TokenId> title_tokens,
                                       std::uint32_t context_id) {
  if (title_tokens.empty()) throw Error(ErrorCode::kInvalidArgument, "empty entity title");
  return {context_id, {Ngram(title_tokens.begin(), title_tokens.end())}, 1, title_tokens.size()};
}

// Fraction of contexts that share at least one identifier n-gram with a
// different context.
inline double repetition_rate(std::span<const IdentifierSet> sets) {
  if (sets.empty()) throw Error(ErrorCode::kInvalidArgument, "no identifier sets");
  std::map<Ngram, std::set<std::uint32_t>> owners;
  for (const auto& s : sets) {
    for (const auto& g : s.ngrams) owners[g].insert(s.context_id);
  }
  std::size_t repeated = 0;
  for (const auto& s : sets) {
    const bool shared = std::any_of(s.ngrams.begin(), s.ngrams.end(),
                                    [&](const Ngram& g) { return owners[g].size() > 1; });
    repeated += shared;
  }
  return static_cast<double>(repeated) / static_cast<double>(sets.size());
}

// Attention-weight exchange file: {"context_id": int, "weights": [float, ...]} per line.
inline std::unordered_map<std::uint32_t, std::vector<double>> read_weight_file(const std::string& path) {
  std::unordered_map<std::uint32_t, std::vector<double>> out;
  for_each_jsonl_file(path, [&](const nlohmann::json& j, std::size_t line) {
    try {
      out[j.at("context_id").get<std::uint32_t>()] = j.at("weights").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kFormat, path + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  return out;
}

inline void write_identifier_file(const std::string& path, std::span<const IdentifierSet> sets) {
  auto out = open_output(path);
  for (const auto& s : sets) {
    nlohmann::json j;
    j["context_id"] = s.context_id;
    j["ngrams"] = s.ngrams;
    out << j.dump() << '\n';
  }
}

inline std::map<std::uint32_t, IdentifierSet> read_identifier_file(const std::string& path) {
  std::map<std::uint32_t, IdentifierSet> out;
  for_each_jsonl_file(path, [&](const nlohmann::json& j, std::size_t line) {
    try {
      IdentifierSet s;
      s.context_id = j.at("context_id").get<std::uint32_t>();
      s.ngrams = j.at("ngrams").get<std::vector<Ngram>>();
      s.v = s.ngrams.size();
      for (const auto& g : s.ngrams) s.n = std::max(s.n, g.size());
      out[s.context_id] = std::move(s);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kFormat, path + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  return out;
}

}  // namespace unigen

#endif  // UNIGEN_IDENTIFIERS_HPP_
