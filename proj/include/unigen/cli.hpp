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

// Command-line front end. Every subcommand reads and writes the file formats
// owned by the library modules; `run_cli` returns the process exit status.

#ifndef UNIGEN_CLI_HPP_
#define UNIGEN_CLI_HPP_

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "unigen/common.hpp"
#include "unigen/config.hpp"
#include "unigen/corpus.hpp"
#include "unigen/decoder.hpp"
#include "unigen/eval.hpp"
#include "unigen/fm_index.hpp"
#include "unigen/identifiers.hpp"
#include "unigen/model.hpp"
#include "unigen/pipeline.hpp"
#include "unigen/prompts.hpp"
#include "unigen/scorer.hpp"

namespace unigen {
namespace cli {

inline constexpr const char* kConfigEnv = "UNIGEN_CONFIG";

struct Options {
  // build-corpus
  std::string records, granularity = "document", sentence_splitter = "punct", vocab_from;
  std::size_t passage_tokens = 100;
  bool no_case_fold = false, no_split_punct = false;
  // shared paths
  std::string corpus, index, identifiers, queries, mixture, model, oracle, run, provenance, out;
  std::string weights, provider = "surrogate", task, dataset, ngram;
  std::uint32_t sample_rate = 32, checkpoint_stride = 128;
  std::optional<std::size_t> v;
  std::size_t limit = 100, repetitions = 3, inspect_limit = 10;
  bool length_normalize = false;
  Hyperparameters hp;
};

inline std::unique_ptr<SequenceModel> load_sequence_model(const Options& o,
                                                          const std::vector<QueryRecord>& queries) {
  if (!o.model.empty() && !o.oracle.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "--model and --oracle are mutually exclusive");
  }
  if (!o.model.empty()) {
    return std::make_unique<CountTranslationModel>(CountTranslationModel::load(o.model));
  }
  if (!o.oracle.empty()) {
    const auto ids = read_identifier_file(o.oracle);
    std::map<std::string, std::vector<Ngram>> gold;
    for (const auto& q : queries) {
      auto& g = gold[q.query_id];
      for (std::uint32_t c : q.gold) {
        if (auto it = ids.find(c); it != ids.end()) g.insert(g.end(), it->second.ngrams.begin(), it->second.ngrams.end());
      }
    }
    return std::make_unique<OracleModel>(std::move(gold));
  }
  return std::make_unique<UniformModel>();
}

inline Task resolve_task(const Options& o, const TokenizedCorpus& tc) {
  if (!o.task.empty()) return parse_task(o.task);
  return static_cast<Task>(static_cast<std::uint8_t>(tc.granularity));
}

inline RetrievalOptions retrieval_options(const Options& o) {
  RetrievalOptions r;
  r.decode.beam_width = o.hp.beams;
  r.decode.steps = o.hp.steps;
  r.decode.length_normalize = o.length_normalize;
  r.scoring = {o.hp.alpha, o.hp.beta, o.hp.g};
  r.scoring.validate();
  r.limit = o.limit;
  return r;
}

inline int cmd_build_corpus(const Options& o) {
  ChunkingOptions chunking;
  chunking.passage_tokens = o.passage_tokens;
  chunking.sentence_splitter = o.sentence_splitter;
  chunking.rules.case_fold = !o.no_case_fold;
  chunking.rules.split_punctuation = !o.no_split_punct;
  std::ifstream in(o.records);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + o.records + "'");
  const auto contexts = ingest(in, parse_granularity(o.granularity), chunking);
  Tokenizer tokenizer(chunking.rules);
  if (!o.vocab_from.empty()) tokenizer = load_corpus(o.vocab_from).tokenizer;
  const auto tc = tokenize_corpus(contexts, std::move(tokenizer));
  save_corpus(tc, o.out);
  std::cerr << "corpus: " << tc.num_contexts() << " contexts, " << tc.stream.size()
            << " stream tokens, vocabulary " << tc.vocab_size() << "\n";
  return 0;
}

inline int cmd_build_index(const Options& o) {
  const auto tc = load_corpus(o.corpus);
  const auto index = FmIndex::build(tc, {o.sample_rate, o.checkpoint_stride});
  index.save(o.out);
  std::cerr << "index: " << index.size() << " rows, " << index.memory_bytes() << " bytes in memory\n";
  return 0;
}

inline int cmd_build_identifiers(const Options& o) {
  const auto tc = load_corpus(o.corpus);
  const Task task = static_cast<Task>(static_cast<std::uint8_t>(tc.granularity));
  IdentifierParams params{o.hp.n, o.v.value_or(default_identifier_count(task)), o.hp.rho};

  std::unordered_map<std::uint32_t, std::vector<double>> external;
  if (o.provider == "file") {
    if (o.weights.empty()) throw Error(ErrorCode::kInvalidArgument, "--provider file needs --weights");
    external = read_weight_file(o.weights);
  } else if (o.provider != "surrogate") {
    throw Error(ErrorCode::kInvalidArgument, "unknown provider '" + o.provider + "'");
  }
  // Training queries boost the tokens they share with their gold contexts.
  std::map<std::uint32_t, Ngram> query_tokens;
  if (!o.queries.empty()) {
    for (const auto& q : read_query_file(o.queries)) {
      const Ngram t = tc.tokenizer.encode(q.text);
      for (std::uint32_t c : q.gold) query_tokens[c].insert(query_tokens[c].end(), t.begin(), t.end());
    }
  }
  const auto df = document_frequencies(tc);
  std::vector<IdentifierSet> sets;
  for (std::uint32_t c = 0; c < tc.num_contexts(); ++c) {
    const auto tokens = tc.context_tokens(c);
    if (tc.granularity == Granularity::kEntity) {
      sets.push_back(entity_identifier(tokens, c));
      continue;
    }
    std::vector<double> weights;
    if (o.provider == "file") {
      auto it = external.find(c);
      if (it == external.end()) {
        throw Error(ErrorCode::kNotFound, "no weights for context " + std::to_string(c));
      }
      weights = it->second;
    } else {
      auto qt = query_tokens.find(c);
      const Ngram empty;
      weights = surrogate_weights(qt == query_tokens.end() ? empty : qt->second, tokens, df,
                                  tc.num_contexts(), c)
                    .weights;
    }
    sets.push_back(build_identifiers(tokens, weights, params, o.hp.seed, c));
  }
  write_identifier_file(o.out, sets);
  std::cerr << "identifiers: " << sets.size() << " contexts, repetition rate "
            << repetition_rate(sets) << "\n";
  return 0;
}

inline int cmd_compile_training(const Options& o) {
  const auto tc = load_corpus(o.corpus);
  const auto queries = read_query_file(o.queries);
  const auto ids = read_identifier_file(o.identifiers);
  const auto mixture = compile_mixture(queries, ids, tc.tokenizer);
  write_mixture_file(o.out, mixture);
  std::cerr << "mixture: " << mixture.size() << " records\n";
  return 0;
}

inline int cmd_train_model(const Options& o) {
  const auto tc = load_corpus(o.corpus);
  const auto mixture = read_mixture_file(o.mixture);
  const auto model = train_count_model(mixture, tc, o.hp.lambda, o.hp.mu);
  model.save(o.out);
  std::cerr << "model: " << model.parameter_count() << " table entries\n";
  return 0;
}

inline int cmd_retrieve(const Options& o) {
  const auto tc = load_corpus(o.corpus);
  const auto index = FmIndex::load(o.index);
  const auto queries = read_query_file(o.queries);
  const auto model = load_sequence_model(o, queries);
  const auto options = retrieval_options(o);
  const Task task = resolve_task(o, tc);
  std::vector<RunRecord> run;
  for (const auto& q : queries) {
    const PromptedQuery input{q.query_id, render_input(task_spec(task), q.text, tc.tokenizer)};
    run.push_back(retrieve_query(index, *model, input, task, options));
    if (!run.back().warning.empty()) {
      std::cerr << "warning: query " << q.query_id << ": " << run.back().warning << "\n";
    }
  }
  write_run_file(o.out, run);
  return 0;
}

inline int cmd_evaluate(const Options& o) {
  const auto run = read_run_file(o.run);
  const auto provenance = read_provenance_file(o.provenance);
  const auto report = evaluate_run(run, provenance, o.dataset);
  std::cout << report.to_text();
  if (!o.out.empty()) {
    auto out = open_output(o.out);
    out << report.to_json().dump(2) << '\n';
  }
  return 0;
}

inline int cmd_bench(const Options& o) {
  const auto tc = load_corpus(o.corpus);
  const auto index = FmIndex::load(o.index);
  const auto queries = read_query_file(o.queries);
  const auto model = load_sequence_model(o, queries);
  const Task task = resolve_task(o, tc);
  std::vector<BenchQuery> bq;
  for (const auto& q : queries) {
    bq.push_back({{q.query_id, render_input(task_spec(task), q.text, tc.tokenizer)}, task});
  }
  const auto report = bench(index, *model, bq, o.repetitions, retrieval_options(o));
  std::cout << report.to_text();
  if (!o.out.empty()) {
    auto out = open_output(o.out);
    out << report.to_json().dump(2) << '\n';
  }
  return 0;
}

inline int cmd_inspect(const Options& o) {
  const auto tc = load_corpus(o.corpus);
  const auto index = FmIndex::load(o.index);
  const Ngram ngram = tc.tokenizer.encode(o.ngram);
  std::cout << "tokens:";
  for (TokenId t : ngram) std::cout << ' ' << t << '(' << tc.tokenizer.word(t) << ')';
  std::cout << "\n";
  IndexRange range = index.full_range();
  for (TokenId t : ngram) range = index.extend(range, t);
  std::cout << "range: [" << range.lo << ", " << range.hi << ")\ncount: " << range.size() << "\n";
  if (range.empty()) return 0;
  if (!ngram.empty()) {
    std::cout << "contexts:";
    for (std::uint32_t c : index.locate_contexts(ngram, o.inspect_limit)) std::cout << ' ' << c;
    std::cout << "\n";
  }
  const auto succ = index.successors(range);
  std::cout << "end_of_context: " << (succ.end_of_context ? "yes" : "no") << "\n";
  std::cout << "successors: " << succ.next.size() << "\n";
  for (const auto& [t, r] : succ.next) {
    std::cout << "  " << t << '\t' << tc.tokenizer.word(t) << "\t[" << r.lo << ", " << r.hi << ")\n";
  }
  return 0;
}

inline int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Generative retrieval with FM-index constrained decoding"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI configuration file (flags override it)")
      ->envname(kConfigEnv);
  Options o;

  auto hp_decode = [&](CLI::App* sub) {
    sub->add_option("--beams", o.hp.beams, "beam width")->capture_default_str();
    sub->add_option("--steps", o.hp.steps, "decoding timesteps")->capture_default_str();
    sub->add_option("--alpha", o.hp.alpha, "weight exponent")->capture_default_str();
    sub->add_option("--beta", o.hp.beta, "cover discount")->capture_default_str();
    sub->add_option("--g", o.hp.g, "top n-grams forming the covered token set")->capture_default_str();
    sub->add_option("--limit", o.limit, "contexts kept per query")->capture_default_str();
    sub->add_flag("--length-normalize", o.length_normalize, "rank beams by mean token log-prob");
    sub->add_option("--task", o.task, "DR|PR|SR|ER (default: from corpus granularity)");
    sub->add_option("--model", o.model, "count model file");
    sub->add_option("--oracle", o.oracle, "identifier file; decode with the oracle model");
  };

  auto* corpus = app.add_subcommand("build-corpus", "ingest JSONL records into a corpus file");
  corpus->add_option("--records", o.records, "JSONL records {id, title?, text}")->required();
  corpus->add_option("--granularity", o.granularity, "document|passage|sentence|entity")->capture_default_str();
  corpus->add_option("--passage-tokens", o.passage_tokens, "passage window")->capture_default_str();
  corpus->add_option("--sentence-splitter", o.sentence_splitter, "punct|newline")->capture_default_str();
  corpus->add_flag("--no-case-fold", o.no_case_fold);
  corpus->add_flag("--no-split-punct", o.no_split_punct);
  corpus->add_option("--vocab-from", o.vocab_from, "extend the vocabulary of an existing corpus file");
  corpus->add_option("--out", o.out)->required();

  auto* build_index = app.add_subcommand("build-index", "build the FM-index of a corpus");
  build_index->add_option("--corpus", o.corpus)->required();
  build_index->add_option("--out", o.out)->required();
  build_index->add_option("--sample-rate", o.sample_rate)->capture_default_str();
  build_index->add_option("--checkpoint-stride", o.checkpoint_stride)->capture_default_str();

  auto* build_ids = app.add_subcommand("build-identifiers", "sample n-gram identifiers per context");
  build_ids->add_option("--corpus", o.corpus)->required();
  build_ids->add_option("--out", o.out)->required();
  build_ids->add_option("--n", o.hp.n, "n-gram length")->capture_default_str();
  build_ids->add_option("--v", o.v, "identifiers per context (default by granularity)");
  build_ids->add_option("--rho", o.hp.rho, "saturation")->capture_default_str();
  build_ids->add_option("--provider", o.provider, "surrogate|file")->capture_default_str();
  build_ids->add_option("--weights", o.weights, "token weight file for --provider file");
  build_ids->add_option("--queries", o.queries, "training queries boosting overlapping tokens");
  build_ids->add_option("--seed", o.hp.seed)->capture_default_str();

  auto* compile = app.add_subcommand("compile-training", "compile the prompted training mixture");
  compile->add_option("--queries", o.queries)->required();
  compile->add_option("--identifiers", o.identifiers)->required();
  compile->add_option("--corpus", o.corpus)->required();
  compile->add_option("--out", o.out)->required();

  auto* train = app.add_subcommand("train-model", "fit the count/translation model");
  train->add_option("--mixture", o.mixture)->required();
  train->add_option("--corpus", o.corpus)->required();
  train->add_option("--out", o.out)->required();
  train->add_option("--lambda", o.hp.lambda)->capture_default_str();
  train->add_option("--mu", o.hp.mu)->capture_default_str();

  auto* retrieve = app.add_subcommand("retrieve", "decode identifiers and rank contexts");
  retrieve->add_option("--index", o.index)->required();
  retrieve->add_option("--corpus", o.corpus)->required();
  retrieve->add_option("--queries", o.queries)->required();
  retrieve->add_option("--out", o.out)->required();
  hp_decode(retrieve);

  auto* evaluate = app.add_subcommand("evaluate", "R-precision of a run file");
  evaluate->add_option("--run", o.run)->required();
  evaluate->add_option("--provenance", o.provenance)->required();
  evaluate->add_option("--dataset", o.dataset);
  evaluate->add_option("--out", o.out, "machine-readable summary");

  auto* bench_cmd = app.add_subcommand("bench", "memory and latency report");
  bench_cmd->add_option("--index", o.index)->required();
  bench_cmd->add_option("--corpus", o.corpus)->required();
  bench_cmd->add_option("--queries", o.queries)->required();
  bench_cmd->add_option("--repetitions", o.repetitions)->capture_default_str();
  bench_cmd->add_option("--out", o.out);
  hp_decode(bench_cmd);

  auto* inspect = app.add_subcommand("inspect", "show match range and successors of an n-gram");
  inspect->add_option("--index", o.index)->required();
  inspect->add_option("--corpus", o.corpus)->required();
  inspect->add_option("--ngram", o.ngram, "n-gram text (empty: whole index)");
  inspect->add_option("--limit", o.inspect_limit, "contexts listed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*corpus) return cmd_build_corpus(o);
    if (*build_index) return cmd_build_index(o);
    if (*build_ids) return cmd_build_identifiers(o);
    if (*compile) return cmd_compile_training(o);
    if (*train) return cmd_train_model(o);
    if (*retrieve) return cmd_retrieve(o);
    if (*evaluate) return cmd_evaluate(o);
    if (*bench_cmd) return cmd_bench(o);
    if (*inspect) return cmd_inspect(o);
  } catch (const Error& e) {
    std::cerr << "error [" << error_code_name(e.code()) << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error [internal]: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace cli
}  // namespace unigen

#endif  // UNIGEN_CLI_HPP_
