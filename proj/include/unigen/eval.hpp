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

// R-precision evaluation of run files and the memory/latency benchmark.

#ifndef UNIGEN_EVAL_HPP_
#define UNIGEN_EVAL_HPP_

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "unigen/common.hpp"
#include "unigen/fm_index.hpp"
#include "unigen/io.hpp"
#include "unigen/model.hpp"
#include "unigen/pipeline.hpp"

namespace unigen {

struct ProvenanceSet {
  std::string query_id;
  std::vector<std::uint32_t> gold;
};

// |top-R of ranked intersected with gold| / R where R = |gold|.
inline double r_precision(std::span<const std::uint32_t> ranked, std::span<const std::uint32_t> gold) {
  std::vector<std::uint32_t> g(gold.begin(), gold.end());
  std::sort(g.begin(), g.end());
  g.erase(std::unique(g.begin(), g.end()), g.end());
  if (g.empty()) throw Error(ErrorCode::kInvalidArgument, "provenance set is empty");
  const std::size_t r = g.size();
  std::vector<std::uint32_t> top(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(std::min(r, ranked.size())));
  std::sort(top.begin(), top.end());
  top.erase(std::unique(top.begin(), top.end()), top.end());
  std::size_t hits = 0;
  for (std::uint32_t c : top) hits += std::binary_search(g.begin(), g.end(), c);
  return static_cast<double>(hits) / static_cast<double>(r);
}

struct QueryEval {
  std::string query_id;
  Task task = Task::kDR;
  double r_precision = 0;
};

struct EvalReport {
  std::string dataset;
  std::vector<QueryEval> per_query;
  double mean = 0;
  std::map<std::string, double> per_task;  // task name -> macro mean

  std::string to_text() const {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(2);
    os << "dataset: " << (dataset.empty() ? "-" : dataset) << "\n";
    os << "queries: " << per_query.size() << "\n";
    for (const auto& [task, m] : per_task) os << "R-precision[" << task << "]: " << 100.0 * m << "\n";
    os << "R-precision[all]: " << 100.0 * mean << "\n";
    return os.str();
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["dataset"] = dataset;
    j["queries"] = per_query.size();
    j["mean_r_precision"] = mean;
    j["per_task"] = per_task;
    nlohmann::json pq = nlohmann::json::array();
    for (const auto& q : per_query) {
      pq.push_back({{"query_id", q.query_id}, {"task", task_name(q.task)}, {"r_precision", q.r_precision}});
    }
    j["per_query"] = std::move(pq);
    return j;
  }
};

inline EvalReport evaluate_run(std::span<const RunRecord> run,
                               const std::map<std::string, ProvenanceSet>& provenance,
                               std::string dataset = {}) {
  std::vector<std::string> missing;
  for (const auto& r : run) {
    if (!provenance.contains(r.query_id)) missing.push_back(r.query_id);
  }
  if (!missing.empty()) {
    std::string ids;
    for (const auto& m : missing) ids += (ids.empty() ? "" : ", ") + m;
    throw Error(ErrorCode::kNotFound, "no provenance for queries: " + ids);
  }
  EvalReport report;
  report.dataset = std::move(dataset);
  std::map<std::string, std::pair<double, std::size_t>> task_sums;
  double total = 0;
  for (const auto& r : run) {
    std::vector<std::uint32_t> ids;
    for (const auto& c : r.ranked) {
      if (std::find(ids.begin(), ids.end(), c.context_id) == ids.end()) ids.push_back(c.context_id);
    }
    const double rp = r_precision(ids, provenance.at(r.query_id).gold);
    report.per_query.push_back({r.query_id, r.task, rp});
    total += rp;
    auto& ts = task_sums[std::string(task_name(r.task))];
    ts.first += rp;
    ++ts.second;
  }
  report.mean = run.empty() ? 0.0 : total / static_cast<double>(run.size());
  for (const auto& [task, s] : task_sums) report.per_task[task] = s.first / static_cast<double>(s.second);
  return report;
}

// Provenance file: {"query_id", "gold": [context_id, ...]} per line. Query
// files carry the same two fields and are accepted as well.
inline std::map<std::string, ProvenanceSet> read_provenance_file(const std::string& path) {
  std::map<std::string, ProvenanceSet> out;
  for_each_jsonl_file(path, [&](const nlohmann::json& j, std::size_t line) {
    try {
      const auto& id = j.at("query_id");
      ProvenanceSet p{id.is_string() ? id.get<std::string>() : id.dump(),
                      j.at("gold").get<std::vector<std::uint32_t>>()};
      if (p.gold.empty()) throw Error(ErrorCode::kFormat, "empty provenance set");
      out[p.query_id] = std::move(p);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::kFormat, path + ":" + std::to_string(line) + ": " + e.what());
    }
  });
  return out;
}

struct BenchQuery {
  PromptedQuery input;
  Task task = Task::kDR;
};

struct BenchReport {
  std::uint64_t index_bytes = 0;         // serialized index size
  std::uint64_t resident_bytes = 0;      // in-memory index + model estimate
  std::uint64_t model_parameters = 0;    // count-table entries
  std::uint64_t index_rows = 0;
  std::size_t queries = 0;
  std::size_t repetitions = 0;
  double mean_ms = 0;
  double median_ms = 0;

  nlohmann::json to_json() const {
    return {{"memory_index_bytes", index_bytes},
            {"memory_resident_bytes", resident_bytes},
            {"parameters", model_parameters},
            {"index_rows", index_rows},
            {"queries", queries},
            {"repetitions", repetitions},
            {"time_mean_ms", mean_ms},
            {"time_median_ms", median_ms}};
  }

  std::string to_text() const {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(3);
    os << "Memory (index on disk): " << index_bytes << " bytes\n"
       << "Memory (resident est.): " << resident_bytes << " bytes\n"
       << "Parameters (table entries): " << model_parameters << "\n"
       << "Time per query: mean " << mean_ms << " ms, median " << median_ms << " ms ("
       << queries << " queries x " << repetitions << " repetitions)\n";
    return os.str();
  }
};

// Decode+rank latency over `repetitions` passes after one warm-up pass.
inline BenchReport bench(const FmIndex& index, const SequenceModel& model,
                         std::span<const BenchQuery> queries, std::size_t repetitions,
                         const RetrievalOptions& options = {}) {
  if (queries.size() < 10) throw Error(ErrorCode::kInvalidArgument, "bench needs at least 10 queries");
  if (repetitions == 0) throw Error(ErrorCode::kInvalidArgument, "repetitions must be positive");
  BenchReport rep;
  rep.index_bytes = index.serialize().size();
  rep.resident_bytes = index.memory_bytes() + model.memory_bytes();
  rep.model_parameters = model.parameter_count();
  rep.index_rows = index.size();
  rep.queries = queries.size();
  rep.repetitions = repetitions;

  for (const auto& q : queries) (void)retrieve_query(index, model, q.input, q.task, options);
  std::vector<double> ms;
  for (std::size_t r = 0; r < repetitions; ++r) {
    for (const auto& q : queries) {
      const auto t0 = std::chrono::steady_clock::now();
      (void)retrieve_query(index, model, q.input, q.task, options);
      const auto t1 = std::chrono::steady_clock::now();
      ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
  }
  rep.mean_ms = std::accumulate(ms.begin(), ms.end(), 0.0) / static_cast<double>(ms.size());
  std::sort(ms.begin(), ms.end());
  const std::size_t mid = ms.size() / 2;
  rep.median_ms = ms.size() % 2 ? ms[mid] : 0.5 * (ms[mid - 1] + ms[mid]);
  return rep;
}

}  // namespace unigen

#endif  // UNIGEN_EVAL_HPP_
