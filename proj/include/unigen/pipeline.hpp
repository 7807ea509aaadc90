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

// Per-query retrieval: prompt rendering, constrained decoding and ranking.

#ifndef UNIGEN_PIPELINE_HPP_
#define UNIGEN_PIPELINE_HPP_

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "unigen/common.hpp"
#include "unigen/corpus.hpp"
#include "unigen/decoder.hpp"
#include "unigen/fm_index.hpp"
#include "unigen/model.hpp"
#include "unigen/prompts.hpp"
#include "unigen/scorer.hpp"

namespace unigen {

struct RankedContext {
  std::uint32_t context_id = 0;
  double score = 0;

  bool operator==(const RankedContext&) const = default;
};

struct RunRecord {
  std::string query_id;
  Task task = Task::kDR;
  std::vector<GeneratedNgram> ngrams;
  std::vector<RankedContext> ranked;
  std::string warning;
};

struct RetrievalOptions {
  DecodeOptions decode;
  ScoringParams scoring;
  std::size_t limit = 100;
};

inline PromptedQuery prompt_query(const QueryRecord& q, const Tokenizer& tokenizer) {
  return {q.query_id, render_input(task_spec(q.task), q.text, tokenizer)};
}

// Entity queries decode complete titles; every other task decodes n-grams and
// ranks their contexts with the interactive score.
inline RunRecord retrieve_query(const FmIndex& index, const SequenceModel& model,
                                const PromptedQuery& input, Task task,
                                const RetrievalOptions& options) {
  RunRecord rec;
  rec.query_id = input.query_id;
  rec.task = task;
  if (task == Task::kER) {
    auto res = decode_entity(index, model, input, options.decode.beam_width);
    rec.ngrams = std::move(res.generated.entries);
    rec.warning = res.warning;
    for (const auto& e : res.ranked) {
      if (rec.ranked.size() >= options.limit) break;
      const bool seen = std::any_of(rec.ranked.begin(), rec.ranked.end(),
                                    [&](const RankedContext& r) { return r.context_id == e.context_id; });
      if (!seen) rec.ranked.push_back({e.context_id, e.logprob});
    }
    return rec;
  }
  auto k = constrained_beam_search(index, model, input, options.decode);
  rec.warning = k.warning;
  if (!k.entries.empty()) {
    for (const auto& s : rank_contexts(index, k, options.scoring, options.limit)) {
      rec.ranked.push_back({s.context_id, s.score});
    }
  }
  rec.ngrams = std::move(k.entries);
  return rec;
}

inline nlohmann::json to_json(const RunRecord& r) {
  nlohmann::json j;
  j["query_id"] = r.query_id;
  j["task"] = task_name(r.task);
  nlohmann::json ngrams = nlohmann::json::array();
  for (const auto& g : r.ngrams) ngrams.push_back({{"tokens", g.tokens}, {"logprob", g.logprob}});
  j["ngrams"] = std::move(ngrams);
  nlohmann::json ranked = nlohmann::json::array();
  for (const auto& c : r.ranked) ranked.push_back({{"context_id", c.context_id}, {"score", c.score}});
  j["ranked"] = std::move(ranked);
  return j;
}

inline RunRecord run_record_from_json(const nlohmann::json& j) {
  RunRecord r;
  r.query_id = j.at("query_id").get<std::string>();
  r.task = parse_task(j.value("task", std::string("DR")));
  for (const auto& g : j.at("ngrams")) {
    r.ngrams.push_back({g.at("tokens").get<Ngram>(), g.at("logprob").get<double>()});
  }
  for (const auto& c : j.at("ranked")) {
    r.ranked.push_back({c.at("context_id").get<std::uint32_t>(), c.at("score").get<double>()});
  }
  return r;
}

inline void write_run_file(const std::string& path, std::span<const RunRecord> records) {
  auto out = open_output(path);
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

inline std::vector<RunRecord> read_run_file(const std::string& path) {
  std::vector<RunRecord> out;
  for_each_jsonl_file(path, [&](const nlohmann::json& j, std::size_t line) {
    try {
      out.push_back(run_record_from_json(j));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kFormat, path + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  return out;
}

}  // namespace unigen

#endif  // UNIGEN_PIPELINE_HPP_
