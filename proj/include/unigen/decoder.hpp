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

// Constrained beam search over the FM-index: each beam carries the match
// range of its prefix, so the allowed next tokens are exactly the tokens that
// extend the prefix to an n-gram still present in the corpus.

#ifndef UNIGEN_DECODER_HPP_
#define UNIGEN_DECODER_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "unigen/common.hpp"
#include "unigen/fm_index.hpp"
#include "unigen/model.hpp"

namespace unigen {

struct DecodeOptions {
  std::size_t beam_width = 15;
  std::size_t steps = 10;
  // Rank beams by mean per-token log-probability instead of the raw sum.
  bool length_normalize = false;
};

struct Beam {
  Ngram prefix;
  double cum_logprob = 0;
  // Match ranges of the prefix. Ordinary beams have one; title-anchored beams
  // carry one range per anchor (after a separator, after the text start).
  std::vector<IndexRange> ranges;
  bool terminated = false;
};

struct GeneratedNgram {
  Ngram tokens;
  double logprob = 0;  // log p(M | S, Q)

  bool operator==(const GeneratedNgram&) const = default;
};

struct GeneratedSet {
  std::vector<GeneratedNgram> entries;  // best first
  std::size_t beam_width = 0;
  std::size_t steps = 0;
  std::string warning;
};

namespace detail {

inline double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

inline Successors merged_successors(const FmIndex& index, std::span<const IndexRange> ranges,
                                    std::vector<std::vector<IndexRange>>* next_ranges) {
  std::map<TokenId, std::vector<IndexRange>> by_token;
  Successors out;
  for (const IndexRange& r : ranges) {
    const auto s = index.successors(r);
    out.end_of_context |= s.end_of_context;
    for (const auto& [t, nr] : s.next) by_token[t].push_back(nr);
  }
  next_ranges->clear();
  for (auto& [t, rs] : by_token) {
    out.next.push_back({t, rs.front()});
    next_ranges->push_back(std::move(rs));
  }
  return out;
}

inline GeneratedSet beam_search(const FmIndex& index, const SequenceModel& model,
                                const PromptedQuery& input, const DecodeOptions& options,
                                std::vector<IndexRange> start, bool require_end) {
  if (options.beam_width == 0 || options.steps == 0) {
    throw Error(ErrorCode::kInvalidArgument, "beam width and steps must be at least 1");
  }
  GeneratedSet result;
  result.beam_width = options.beam_width;
  result.steps = options.steps;
  std::erase_if(start, [](const IndexRange& r) { return r.empty(); });
  if (start.empty()) {
    result.warning = "no admissible start position";
    return result;
  }

  auto score = [&](const Beam& b) {
    if (!options.length_normalize || b.prefix.empty()) return b.cum_logprob;
    return b.cum_logprob / static_cast<double>(b.prefix.size());
  };
  auto better = [&](const Beam& a, const Beam& b) {
    const double sa = score(a), sb = score(b);
    if (sa != sb) return sa > sb;
    return a.prefix < b.prefix;  // lower token ids first; a proper prefix sorts first
  };

  std::vector<Beam> live{Beam{{}, 0.0, std::move(start), false}};
  std::vector<Beam> finished;
  std::vector<std::vector<IndexRange>> next_ranges;
  for (std::size_t step = 1; step <= options.steps && !live.empty(); ++step) {
    std::vector<Beam> candidates;
    for (const Beam& beam : live) {
      const auto succ = merged_successors(index, beam.ranges, &next_ranges);
      const auto allowed = allowed_tokens(succ, !beam.prefix.empty());
      if (allowed.empty()) continue;
      const auto lps = model.next_token_logprobs(input, beam.prefix, allowed);
      const std::size_t offset = allowed.size() - succ.next.size();
      for (std::size_t i = 0; i < allowed.size(); ++i) {
        if (allowed[i] == kSeparatorId && i < offset) {
          candidates.push_back({beam.prefix, beam.cum_logprob + lps[i], beam.ranges, true});
          continue;
        }
        if (require_end && step == options.steps) continue;
        Beam b{beam.prefix, beam.cum_logprob + lps[i], next_ranges[i - offset],
               !require_end && step == options.steps};
        b.prefix.push_back(allowed[i]);
        candidates.push_back(std::move(b));
      }
    }
    std::sort(candidates.begin(), candidates.end(), better);
    if (candidates.size() > options.beam_width) candidates.resize(options.beam_width);
    live.clear();
    for (auto& c : candidates) (c.terminated ? finished : live).push_back(std::move(c));
  }

  std::map<Ngram, double> merged;
  for (const Beam& b : finished) {
    auto [it, inserted] = merged.try_emplace(b.prefix, b.cum_logprob);
    if (!inserted) it->second = log_add(it->second, b.cum_logprob);
  }
  std::vector<Beam> ranked;
  for (auto& [ngram, lp] : merged) ranked.push_back({ngram, lp, {}, true});
  std::sort(ranked.begin(), ranked.end(), better);
  if (ranked.size() > options.beam_width) ranked.resize(options.beam_width);
  for (auto& b : ranked) result.entries.push_back({std::move(b.prefix), b.cum_logprob});
  if (result.entries.empty()) result.warning = "all beams died before terminating";
  return result;
}

}  // namespace detail

// Generates up to beam_width n-grams that each occur in the corpus. Beams end
// after `steps` tokens or when they choose to stop at the end of a context.
inline GeneratedSet constrained_beam_search(const FmIndex& index, const SequenceModel& model,
                                            const PromptedQuery& input,
                                            const DecodeOptions& options = {}) {
  return detail::beam_search(index, model, input, options, {index.full_range()}, false);
}

struct RankedEntity {
  std::uint32_t context_id = 0;
  double logprob = 0;
};

struct EntityDecodeResult {
  std::vector<RankedEntity> ranked;
  GeneratedSet generated;
  std::string warning;
};

inline std::uint64_t max_context_length(const FmIndex& index) {
  std::uint64_t m = 0;
  for (std::size_t i = 0; i < index.num_contexts(); ++i) m = std::max(m, index.context_length(i));
  return m;
}

// Decodes complete titles over an index whose contexts are entity titles.
// Beams are anchored at context starts and must stop at a context end.
inline EntityDecodeResult decode_entity(const FmIndex& index, const SequenceModel& model,
                                        const PromptedQuery& input, std::size_t beam_width,
                                        std::size_t max_steps = 0) {
  DecodeOptions options;
  options.beam_width = beam_width;
  options.steps = max_steps != 0 ? max_steps : max_context_length(index) + 1;
  std::vector<IndexRange> anchors{index.extend(index.full_range(), kSeparatorId),
                                  index.symbol_range(index.sentinel())};
  EntityDecodeResult out;
  out.generated = detail::beam_search(index, model, input, options, std::move(anchors), true);
  for (const auto& g : out.generated.entries) {
    std::vector<std::uint32_t> ids;
    for (std::uint64_t offset : index.locate_offsets(g.tokens)) {
      const std::uint32_t c = index.context_of(offset);
      if (index.boundaries()[c] == offset && index.context_length(c) == g.tokens.size()) {
        ids.push_back(c);
      }
    }
    if (ids.empty()) continue;
    out.ranked.push_back({*std::min_element(ids.begin(), ids.end()), g.logprob});
  }
  if (out.ranked.empty()) {
    out.warning = out.generated.warning.empty() ? "no beam reached a complete title"
                                                : out.generated.warning;
  }
  return out;
}

inline nlohmann::json to_json(const GeneratedSet& set) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : set.entries) arr.push_back({{"tokens", e.tokens}, {"logprob", e.logprob}});
  return arr;
}

}  // namespace unigen

#endif  // UNIGEN_DECODER_HPP_
