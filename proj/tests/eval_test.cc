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

#include "unigen/eval.hpp"

#include <filesystem>
#include <random>
#include <set>
#include <vector>

#include "gtest/gtest.h"
#include "testing/fixtures.hpp"

namespace unigen {
namespace {

RunRecord run_of(const std::string& id, std::vector<std::uint32_t> ranked, Task task = Task::kDR) {
  RunRecord r{id, task, {}, {}, {}};
  for (auto c : ranked) r.ranked.push_back({c, 1.0});
  return r;
}

TEST(RPrecisionTest, Examples) {
  EXPECT_DOUBLE_EQ(r_precision(std::vector<std::uint32_t>{7}, std::vector<std::uint32_t>{7}), 1.0);
  EXPECT_DOUBLE_EQ(r_precision(std::vector<std::uint32_t>{1, 3, 2}, std::vector<std::uint32_t>{1, 2}), 0.5);
  EXPECT_DOUBLE_EQ(r_precision(std::vector<std::uint32_t>{}, std::vector<std::uint32_t>{1}), 0.0);
  EXPECT_THROW(r_precision(std::vector<std::uint32_t>{1}, std::vector<std::uint32_t>{}), Error);
}

TEST(RPrecisionTest, BoundedAndOneIffTopContainsGold) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<std::uint32_t> ranked, gold;
    for (int i = rng() % 8; i > 0; --i) ranked.push_back(static_cast<std::uint32_t>(rng() % 10));
    for (int i = 1 + rng() % 3; i > 0; --i) gold.push_back(static_cast<std::uint32_t>(rng() % 10));
    const double rp = r_precision(ranked, gold);
    EXPECT_GE(rp, 0.0);
    EXPECT_LE(rp, 1.0);
    std::set<std::uint32_t> g(gold.begin(), gold.end());
    std::set<std::uint32_t> top(ranked.begin(), ranked.begin() + static_cast<long>(std::min(g.size(), ranked.size())));
    const bool superset = std::includes(top.begin(), top.end(), g.begin(), g.end());
    EXPECT_EQ(rp == 1.0, superset);
  }
}

TEST(EvaluateRunTest, MacroMeanAndPerTask) {
  std::map<std::string, ProvenanceSet> prov{{"a", {"a", {1}}}, {"b", {"b", {2}}}, {"c", {"c", {3}}}, {"d", {"d", {4}}}};
  std::vector<RunRecord> all{run_of("a", {1}), run_of("b", {2}), run_of("c", {3}), run_of("d", {4})};
  EXPECT_DOUBLE_EQ(evaluate_run(all, prov).mean, 1.0);
  std::vector<RunRecord> half{run_of("a", {1}), run_of("b", {2}, Task::kSR), run_of("c", {9}), run_of("d", {}, Task::kSR)};
  const auto rep = evaluate_run(half, prov, "toy");
  EXPECT_DOUBLE_EQ(rep.mean, 0.5);
  double sum = 0;
  for (const auto& q : rep.per_query) sum += q.r_precision;
  EXPECT_NEAR(rep.mean, sum / rep.per_query.size(), 1e-12);
  EXPECT_DOUBLE_EQ(rep.per_task.at("DR"), 0.5);
  EXPECT_DOUBLE_EQ(rep.per_task.at("SR"), 0.5);
  EXPECT_NE(rep.to_text().find("R-precision[all]: 50.00"), std::string::npos);
  EXPECT_EQ(rep.to_json()["per_query"].size(), 4u);
}

TEST(EvaluateRunTest, MissingProvenanceListsIds) {
  std::map<std::string, ProvenanceSet> prov{{"a", {"a", {1}}}};
  std::vector<RunRecord> run{run_of("a", {1}), run_of("zz", {1}), run_of("yy", {1})};
  try {
    evaluate_run(run, prov);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotFound);
    EXPECT_NE(std::string(e.what()).find("zz"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("yy"), std::string::npos);
  }
}

TEST(RunFileTest, RoundTrip) {
  const auto path = (std::filesystem::temp_directory_path() / "unigen_run_test.jsonl").string();
  RunRecord r{"q", Task::kPR, {{{2, 3}, -0.5}}, {{4, 2.25}, {1, 0.125}}, {}};
  write_run_file(path, std::vector<RunRecord>{r});
  const auto back = read_run_file(path);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].ngrams, r.ngrams);
  EXPECT_EQ(back[0].ranked, r.ranked);
  EXPECT_EQ(back[0].task, Task::kPR);
  std::filesystem::remove(path);
}

TEST(PipelineTest, OracleRunIsPerfectOnDocuments) {
  const auto f = testing::make_planted_fixture(Task::kDR, 5, 40);
  const auto oracle = testing::oracle_for(f);
  std::map<std::string, ProvenanceSet> prov;
  std::vector<RunRecord> run;
  for (const auto& q : f.queries) {
    prov[q.query_id] = {q.query_id, q.gold};
    run.push_back(retrieve_query(f.index, oracle, prompt_query(q, f.corpus.tokenizer), q.task, {}));
  }
  EXPECT_DOUBLE_EQ(evaluate_run(run, prov).mean, 1.0);
}

std::vector<BenchQuery> bench_queries(const testing::Fixture& f) {
  std::vector<BenchQuery> out;
  for (const auto& q : f.queries) out.push_back({prompt_query(q, f.corpus.tokenizer), q.task});
  return out;
}

TEST(BenchTest, DeterministicSizesAndAllColumns) {
  const auto f = testing::make_planted_fixture(Task::kDR, 9, 20);
  UniformModel u;
  const auto qs = bench_queries(f);
  const auto a = bench(f.index, u, qs, 1);
  const auto b = bench(f.index, u, qs, 1);
  EXPECT_EQ(a.index_bytes, b.index_bytes);
  EXPECT_EQ(a.resident_bytes, b.resident_bytes);
  EXPECT_EQ(a.index_bytes, f.index.serialize().size());
  const auto j = a.to_json();
  for (const char* col : {"memory_index_bytes", "parameters", "time_mean_ms", "time_median_ms"}) {
    EXPECT_TRUE(j.contains(col)) << col;
  }
  EXPECT_GE(a.mean_ms, 0.0);
  EXPECT_THROW(bench(f.index, u, std::span<const BenchQuery>(qs).first(5), 1), Error);
  EXPECT_THROW(bench(f.index, u, qs, 0), Error);
}

TEST(BenchTest, LargerCorpusLargerIndex) {
  const auto small = testing::make_planted_fixture(Task::kDR, 9, 20);
  const auto large = testing::make_planted_fixture(Task::kDR, 9, 40);
  UniformModel u;
  EXPECT_LT(bench(small.index, u, bench_queries(small), 1).index_bytes,
            bench(large.index, u, bench_queries(large), 1).index_bytes);
}

}  // namespace
}  // namespace unigen
