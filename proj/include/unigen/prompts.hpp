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

#ifndef UNIGEN_PROMPTS_HPP_
#define UNIGEN_PROMPTS_HPP_

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "unigen/common.hpp"
#include "unigen/corpus.hpp"
#include "unigen/identifiers.hpp"
#include "unigen/io.hpp"

namespace unigen {

struct TaskSpec {
  Task task;
  Granularity granularity;
  std::string_view discrete_prompt;
  // Anchor word of the hybrid prompt; only recorded, continuous prompt
  // embeddings are not trained here.
  std::string_view anchor_text;
};

// Length of the continuous/hybrid prompt token block, kept for format
// compatibility with prompt-encoder checkpoints.
inline constexpr std::size_t kPromptTokenLength = 6;

inline const std::array<TaskSpec, 4>& task_registry() {
  static constexpr std::array<TaskSpec, 4> kRegistry = {{
      {Task::kDR, Granularity::kDocument, "Find the relevant document:", "document"},
      {Task::kPR, Granularity::kPassage, "Find the relevant passage:", "passage"},
      {Task::kSR, Granularity::kSentence, "Find the relevant sentence:", "sentence"},
      {Task::kER, Granularity::kEntity, "Find the relevant entity:", "entity"},
  }};
  return kRegistry;
}

inline const TaskSpec& task_spec(Task t) { return task_registry()[static_cast<std::size_t>(t)]; }

inline Ngram render_input(const TaskSpec& spec, std::string_view query, const Tokenizer& tokenizer) {
  if (normalize_whitespace(query).empty()) {
    throw Error(ErrorCode::kInvalidArgument, "empty query");
  }
  Ngram ids = tokenizer.encode(spec.discrete_prompt);
  const Ngram q = tokenizer.encode(query);
  ids.insert(ids.end(), q.begin(), q.end());
  return ids;
}

struct QueryRecord {
  std::string query_id;
  Task task = Task::kDR;
  std::string text;
  std::vector<std::uint32_t> gold;
};

struct TrainingRecord {
  Task task = Task::kDR;
  std::string query_id;
  Ngram input;
  Ngram target;

  bool operator==(const TrainingRecord&) const = default;
};

// One dataset of the mixture: queries of one task plus the identifiers and
// vocabulary of the corpus they retrieve from.
struct TaskDataset {
  std::vector<QueryRecord> queries;
  const std::map<std::uint32_t, IdentifierSet>* identifiers = nullptr;
  const Tokenizer* tokenizer = nullptr;
};

// Emits one record per (query, gold identifier n-gram), taking one query from
// each dataset in turn.
inline std::vector<TrainingRecord> compile_mixture(std::span<const TaskDataset> datasets) {
  std::vector<TrainingRecord> out;
  std::size_t longest = 0;
  for (const auto& d : datasets) longest = std::max(longest, d.queries.size());
  for (std::size_t i = 0; i < longest; ++i) {
    for (const auto& d : datasets) {
      if (i >= d.queries.size()) continue;
      const QueryRecord& q = d.queries[i];
      const Ngram input = render_input(task_spec(q.task), q.text, *d.tokenizer);
      for (std::uint32_t gold : q.gold) {
        auto it = d.identifiers->find(gold);
        if (it == d.identifiers->end()) {
          throw Error(ErrorCode::kNotFound,
                      "no identifier set for context " + std::to_string(gold) + " (query " +
                          q.query_id + ")");
        }
        for (const auto& g : it->second.ngrams) out.push_back({q.task, q.query_id, input, g});
      }
    }
  }
  return out;
}

// Single-corpus convenience: groups queries by task in order of first
// appearance and interleaves the groups.
inline std::vector<TrainingRecord> compile_mixture(
    std::span<const QueryRecord> queries, const std::map<std::uint32_t, IdentifierSet>& identifiers,
    const Tokenizer& tokenizer) {
  std::vector<TaskDataset> datasets;
  std::array<int, 4> slot{-1, -1, -1, -1};
  for (const auto& q : queries) {
    auto& s = slot[static_cast<std::size_t>(q.task)];
    if (s < 0) {
      s = static_cast<int>(datasets.size());
      datasets.push_back({{}, &identifiers, &tokenizer});
    }
    datasets[static_cast<std::size_t>(s)].queries.push_back(q);
  }
  return compile_mixture(datasets);
}

// Query file: {"query_id", "task", "query", "gold": [context_id, ...]} per line.
inline std::vector<QueryRecord> read_query_file(const std::string& path) {
  std::vector<QueryRecord> out;
  for_each_jsonl_file(path, [&](const nlohmann::json& j, std::size_t line) {
    try {
      QueryRecord q;
      const auto& id = j.at("query_id");
      q.query_id = id.is_string() ? id.get<std::string>() : id.dump();
      q.task = parse_task(j.at("task").get<std::string>());
      q.text = j.at("query").get<std::string>();
      if (auto g = j.find("gold"); g != j.end()) q.gold = g->get<std::vector<std::uint32_t>>();
      out.push_back(std::move(q));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kFormat, path + ":" + std::to_string(line) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorCode::kFormat, path + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  return out;
}

inline void write_query_file(const std::string& path, std::span<const QueryRecord> queries) {
  auto out = open_output(path);
  for (const auto& q : queries) {
    nlohmann::json j;
    j["query_id"] = q.query_id;
    j["task"] = task_name(q.task);
    j["query"] = q.text;
    j["gold"] = q.gold;
    out << j.dump() << '\n';
  }
}

// Mixture file: {"task", "query_id", "input_tokens", "target_tokens"} per line.
inline void write_mixture_file(const std::string& path, std::span<const TrainingRecord> records) {
  auto out = open_output(path);
  for (const auto& r : records) {
    nlohmann::json j;
    j["task"] = task_name(r.task);
    j["query_id"] = r.query_id;
    j["input_tokens"] = r.input;
    j["target_tokens"] = r.target;
    out << j.dump() << '\n';
  }
}

inline std::vector<TrainingRecord> read_mixture_file(const std::string& path) {
  std::vector<TrainingRecord> out;
  for_each_jsonl_file(path, [&](const nlohmann::json& j, std::size_t line) {
    try {
      out.push_back({parse_task(j.at("task").get<std::string>()),
                     j.at("query_id").get<std::string>(), j.at("input_tokens").get<Ngram>(),
                     j.at("target_tokens").get<Ngram>()});
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kFormat, path + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  return out;
}

}  // namespace unigen

#endif  // UNIGEN_PROMPTS_HPP_
