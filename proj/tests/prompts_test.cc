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

#include "unigen/prompts.hpp"

#include <filesystem>
#include <map>
#include <vector>

#include "gtest/gtest.h"

namespace unigen {
namespace {

Tokenizer vocabulary() {
  Tokenizer tok;
  tok.encode_and_grow("Find the relevant document passage sentence entity : who wrote Hamlet Aristotle");
  return tok;
}

TEST(TaskRegistryTest, FourTasksWithGranularity) {
  for (Task t : {Task::kDR, Task::kPR, Task::kSR, Task::kER}) {
    EXPECT_EQ(task_spec(t).task, t);
    EXPECT_EQ(task_spec(t).granularity, granularity_of(t));
  }
  EXPECT_EQ(task_spec(Task::kSR).discrete_prompt, "Find the relevant sentence:");
}

TEST(RenderInputTest, PrefixesPrompt) {
  const auto tok = vocabulary();
  EXPECT_EQ(render_input(task_spec(Task::kDR), "who wrote Hamlet", tok),
            tok.encode("Find the relevant document: who wrote Hamlet"));
  const auto er = render_input(task_spec(Task::kER), "Aristotle", tok);
  const auto prefix = tok.encode("Find the relevant entity:");
  ASSERT_GT(er.size(), prefix.size());
  EXPECT_TRUE(std::equal(prefix.begin(), prefix.end(), er.begin()));
  EXPECT_THROW(render_input(task_spec(Task::kDR), "  ", tok), Error);
}

TEST(CompileMixtureTest, FanOutPerIdentifier) {
  const auto tok = vocabulary();
  std::map<std::uint32_t, IdentifierSet> ids{{4, {4, {{2}, {3}, {4}, {5}, {6}}, 5, 1}}};
  std::vector<QueryRecord> q{{"q1", Task::kDR, "who wrote Hamlet", {4}}};
  const auto recs = compile_mixture(q, ids, tok);
  ASSERT_EQ(recs.size(), 5u);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(recs[i].target, ids.at(4).ngrams[i]);
    EXPECT_EQ(recs[i].input, render_input(task_spec(Task::kDR), "who wrote Hamlet", tok));
  }
}

TEST(CompileMixtureTest, TasksAlternate) {
  const auto tok = vocabulary();
  std::map<std::uint32_t, IdentifierSet> ids{{0, {0, {{2}}, 1, 1}}};
  std::vector<QueryRecord> q;
  for (int i = 0; i < 10; ++i) q.push_back({"d" + std::to_string(i), Task::kDR, "who", {0}});
  for (int i = 0; i < 10; ++i) q.push_back({"s" + std::to_string(i), Task::kSR, "wrote", {0}});
  const auto recs = compile_mixture(q, ids, tok);
  ASSERT_EQ(recs.size(), 20u);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    EXPECT_EQ(recs[i].task, i % 2 == 0 ? Task::kDR : Task::kSR);
  }
}

TEST(CompileMixtureTest, EntityQueryYieldsOneRecord) {
  const auto tok = vocabulary();
  std::map<std::uint32_t, IdentifierSet> ids{{1, entity_identifier(tok.encode("Aristotle"), 1)}};
  std::vector<QueryRecord> q{{"e", Task::kER, "who wrote", {1}}};
  const auto recs = compile_mixture(q, ids, tok);
  ASSERT_EQ(recs.size(), 1u);
  EXPECT_EQ(recs[0].target, tok.encode("Aristotle"));
}

TEST(CompileMixtureTest, MissingIdentifierNamesContext) {
  const auto tok = vocabulary();
  std::map<std::uint32_t, IdentifierSet> ids;
  std::vector<QueryRecord> q{{"q", Task::kDR, "who", {77}}};
  try {
    compile_mixture(q, ids, tok);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNotFound);
    EXPECT_NE(std::string(e.what()).find("77"), std::string::npos);
  }
}

TEST(QueryFileTest, RoundTrip) {
  const auto dir = std::filesystem::temp_directory_path();
  const auto qpath = (dir / "unigen_q_test.jsonl").string();
  const auto mpath = (dir / "unigen_m_test.jsonl").string();
  std::vector<QueryRecord> q{{"a", Task::kPR, "text one", {1, 2}}, {"b", Task::kER, "x", {}}};
  write_query_file(qpath, q);
  const auto back = read_query_file(qpath);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].gold, q[0].gold);
  EXPECT_EQ(back[1].task, Task::kER);
  std::vector<TrainingRecord> m{{Task::kSR, "a", {2, 3}, {4}}};
  write_mixture_file(mpath, m);
  EXPECT_EQ(read_mixture_file(mpath), m);
  std::filesystem::remove(qpath);
  std::filesystem::remove(mpath);
}

}  // namespace
}  // namespace unigen
