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

// Synthetic corpora for tests and the acceptance suite.

#ifndef UNIGEN_TESTS_TESTING_FIXTURES_HPP_
#define UNIGEN_TESTS_TESTING_FIXTURES_HPP_

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "unigen/unigen.hpp"

namespace unigen::testing {

struct RandomCorpus {
  std::vector<TokenId> stream;
  std::vector<std::uint64_t> boundaries;
  std::size_t vocab_size = 0;
};

// Contexts of 1..max_context_len tokens drawn from [kFirstWordId, vocab_size)
// until the stream holds about `tokens` tokens.
inline RandomCorpus random_corpus(std::mt19937_64& rng, std::size_t tokens, std::size_t vocab_size,
                                  std::size_t max_context_len = 40) {
  RandomCorpus rc;
  rc.vocab_size = vocab_size;
  std::uniform_int_distribution<TokenId> tok(kFirstWordId, static_cast<TokenId>(vocab_size - 1));
  std::uniform_int_distribution<std::size_t> len(1, max_context_len);
  while (rc.stream.size() + 2 <= tokens || rc.boundaries.empty()) {
    const std::size_t n = std::min(len(rng), std::max<std::size_t>(1, tokens - rc.stream.size() - 1));
    rc.boundaries.push_back(rc.stream.size());
    for (std::size_t i = 0; i < n; ++i) rc.stream.push_back(tok(rng));
    rc.stream.push_back(kSeparatorId);
  }
  return rc;
}

inline Ngram random_pattern(std::mt19937_64& rng, const RandomCorpus& rc, std::size_t max_len,
                            bool from_corpus) {
  std::uniform_int_distribution<std::size_t> len(1, max_len);
  const std::size_t n = len(rng);
  Ngram p;
  if (from_corpus) {
    std::uniform_int_distribution<std::size_t> pos(0, rc.stream.size() - 1);
    const std::size_t start = pos(rng);
    for (std::size_t i = start; i < std::min(rc.stream.size(), start + n); ++i) p.push_back(rc.stream[i]);
  } else {
    std::uniform_int_distribution<TokenId> tok(kFirstWordId, static_cast<TokenId>(rc.vocab_size - 1));
    for (std::size_t i = 0; i < n; ++i) p.push_back(tok(rng));
  }
  return p;
}

inline std::string random_words(std::mt19937_64& rng, std::size_t count, std::size_t pool,
                                const std::string& prefix = "w") {
  std::uniform_int_distribution<std::size_t> pick(0, pool - 1);
  std::string s;
  for (std::size_t i = 0; i < count; ++i) {
    if (!s.empty()) s.push_back(' ');
    s += prefix + std::to_string(pick(rng));
  }
  return s;
}

struct Fixture {
  Task task = Task::kDR;
  TokenizedCorpus corpus;
  FmIndex index;
  std::map<std::uint32_t, IdentifierSet> identifiers;
  std::vector<QueryRecord> queries;
};

inline std::vector<IdentifierSet> build_all_identifiers(const TokenizedCorpus& tc,
                                                        const std::vector<QueryRecord>& queries,
                                                        const IdentifierParams& params,
                                                        std::uint64_t seed) {
  std::map<std::uint32_t, Ngram> qtokens;
  for (const auto& q : queries) {
    const Ngram t = tc.tokenizer.encode(q.text);
    for (auto c : q.gold) qtokens[c].insert(qtokens[c].end(), t.begin(), t.end());
  }
  const auto df = document_frequencies(tc);
  std::vector<IdentifierSet> out;
  for (std::uint32_t c = 0; c < tc.num_contexts(); ++c) {
    const auto tokens = tc.context_tokens(c);
    if (tc.granularity == Granularity::kEntity) {
      out.push_back(entity_identifier(tokens, c));
      continue;
    }
    const auto w = surrogate_weights(qtokens[c], tokens, df, tc.num_contexts(), c);
    out.push_back(build_identifiers(tokens, w.weights, params, seed, c));
  }
  return out;
}

// JSONL records for a corpus of `contexts` contexts at the task's granularity
// whose identifiers are planted: words come from a 20k-word pool, so every
// window of a few words is unique to its context.
inline std::string planted_records(Task task, std::mt19937_64& rng, std::size_t contexts) {
  std::ostringstream os;
  std::uniform_int_distribution<std::size_t> doc_len(30, 60), sent_len(4, 16), title_len(1, 3);
  auto emit = [&](std::size_t id, const std::string& text, const std::string& title = "") {
    nlohmann::json j{{"id", "doc" + std::to_string(id)}, {"text", text}};
    if (!title.empty()) j["title"] = title;
    os << j.dump() << '\n';
  };
  switch (task) {
    case Task::kDR:
      for (std::size_t i = 0; i < contexts; ++i) emit(i, random_words(rng, doc_len(rng), 20000));
      break;
    case Task::kPR:
      for (std::size_t i = 0; i < contexts / 4; ++i) emit(i, random_words(rng, 400, 20000));
      break;
    case Task::kSR:
      for (std::size_t i = 0; i < contexts / 5; ++i) {
        std::string text;
        for (int s = 0; s < 5; ++s) text += random_words(rng, sent_len(rng), 20000) + ". ";
        emit(i, text);
      }
      break;
    case Task::kER: {
      std::vector<std::string> titles;
      while (titles.size() < contexts) {
        std::string t = titles.size() % 10 == 9 ? titles.back() + " " + random_words(rng, 1, 20000, "e")
                                                : random_words(rng, title_len(rng), 20000, "e");
        if (std::find(titles.begin(), titles.end(), t) == titles.end()) titles.push_back(t);
      }
      for (std::size_t i = 0; i < titles.size(); ++i) emit(i, random_words(rng, 20, 20000), titles[i]);
      break;
    }
  }
  return os.str();
}

inline Fixture make_planted_fixture(Task task, std::uint64_t seed, std::size_t contexts = 100) {
  std::mt19937_64 rng(seed);
  std::istringstream records(planted_records(task, rng, contexts));
  ChunkingOptions chunking;
  Fixture f;
  f.task = task;
  const auto ctx = ingest(records, granularity_of(task), chunking);
  f.corpus = tokenize_corpus(ctx);
  f.index = FmIndex::build(f.corpus);
  for (std::uint32_t c = 0; c < f.corpus.num_contexts(); ++c) {
    f.queries.push_back({"q" + std::to_string(c), task, random_words(rng, 4, 20000), {c}});
  }
  IdentifierParams params;
  params.v = default_identifier_count(task);
  for (auto& s : build_all_identifiers(f.corpus, f.queries, params, seed)) {
    f.identifiers[s.context_id] = std::move(s);
  }
  return f;
}

inline OracleModel oracle_for(const Fixture& f) {
  std::map<std::string, std::vector<Ngram>> gold;
  for (const auto& q : f.queries) {
    for (auto c : q.gold) {
      const auto& ng = f.identifiers.at(c).ngrams;
      gold[q.query_id].insert(gold[q.query_id].end(), ng.begin(), ng.end());
    }
  }
  return OracleModel(std::move(gold));
}

// Documents whose queries share "key" words with their gold document. Each
// document holds two copies of six private key words plus shared filler.
struct LexicalFixture {
  TokenizedCorpus corpus;
  FmIndex index;
  std::map<std::uint32_t, IdentifierSet> identifiers;
  std::vector<QueryRecord> train;
  std::vector<QueryRecord> test;
};

inline LexicalFixture make_lexical_fixture(std::uint64_t seed, std::size_t docs = 100,
                                           std::size_t queries_per_doc = 5) {
  std::mt19937_64 rng(seed);
  constexpr std::size_t kKeys = 6, kFillerPool = 300, kFillerPerDoc = 28;
  auto key = [](std::size_t d, std::size_t j) { return "k" + std::to_string(d) + "x" + std::to_string(j); };
  std::ostringstream records;
  for (std::size_t d = 0; d < docs; ++d) {
    std::vector<std::string> words;
    for (std::size_t j = 0; j < kKeys; ++j) {
      words.push_back(key(d, j));
      words.push_back(key(d, j));
    }
    std::uniform_int_distribution<std::size_t> filler(0, kFillerPool - 1);
    for (std::size_t i = 0; i < kFillerPerDoc; ++i) words.push_back("f" + std::to_string(filler(rng)));
    std::shuffle(words.begin(), words.end(), rng);
    std::string text;
    for (const auto& w : words) text += (text.empty() ? "" : " ") + w;
    records << nlohmann::json{{"id", d}, {"text", text}}.dump() << '\n';
  }
  LexicalFixture f;
  std::istringstream in(records.str());
  f.corpus = tokenize_corpus(ingest(in, Granularity::kDocument));
  f.index = FmIndex::build(f.corpus);
  auto make_query = [&](std::size_t d, const std::string& id) {
    std::vector<std::size_t> ks(kKeys);
    for (std::size_t j = 0; j < kKeys; ++j) ks[j] = j;
    std::shuffle(ks.begin(), ks.end(), rng);
    std::string text = key(d, ks[0]) + " " + key(d, ks[1]) + " " + key(d, ks[2]) + " " +
                       random_words(rng, 2, kFillerPool, "f");
    return QueryRecord{id, Task::kDR, text, {static_cast<std::uint32_t>(d)}};
  };
  for (std::size_t d = 0; d < docs; ++d) {
    for (std::size_t i = 0; i < queries_per_doc; ++i) {
      f.train.push_back(make_query(d, "train" + std::to_string(d) + "_" + std::to_string(i)));
      f.test.push_back(make_query(d, "test" + std::to_string(d) + "_" + std::to_string(i)));
    }
  }
  for (auto& s : build_all_identifiers(f.corpus, f.train, IdentifierParams{}, seed)) {
    f.identifiers[s.context_id] = std::move(s);
  }
  return f;
}

}  // namespace unigen::testing

#endif  // UNIGEN_TESTS_TESTING_FIXTURES_HPP_
