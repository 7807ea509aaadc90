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

// Knowledge-source ingestion, tokenization and the separator-delimited token
// stream that the FM-index is built over.

#ifndef UNIGEN_CORPUS_HPP_
#define UNIGEN_CORPUS_HPP_

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "unigen/common.hpp"
#include "unigen/io.hpp"

namespace unigen {

struct TokenizerRules {
  bool case_fold = true;
  bool split_punctuation = true;

  bool operator==(const TokenizerRules&) const = default;
};

// Word-level tokenizer with a growable vocabulary. Id 0 is the context
// separator and id 1 the unknown word; neither is ever produced from text
// that was seen while the vocabulary was built.
class Tokenizer {
 public:
  explicit Tokenizer(TokenizerRules rules = {}) : rules_(rules) {
    words_ = {"<sep>", "<unk>"};
  }

  const TokenizerRules& rules() const { return rules_; }
  std::size_t vocab_size() const { return words_.size(); }
  const std::string& word(TokenId id) const {
    if (id >= words_.size()) {
      throw Error(ErrorCode::kOutOfRange, "token id " + std::to_string(id) + " out of vocabulary");
    }
    return words_[id];
  }

  // Splits text into normalized word strings.
  std::vector<std::string> split(std::string_view text) const {
    return split_words(text, rules_);
  }

  static std::vector<std::string> split_words(std::string_view text, const TokenizerRules& rules) {
    std::vector<std::string> out;
    std::string cur;
    auto flush = [&] {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    };
    for (char ch : text) {
      const auto uc = static_cast<unsigned char>(ch);
      if (std::isspace(uc)) {
        flush();
      } else if (rules.split_punctuation && uc < 0x80 && std::ispunct(uc)) {
        flush();
        out.emplace_back(1, ch);
      } else {
        cur.push_back(rules.case_fold && uc < 0x80 ? static_cast<char>(std::tolower(uc)) : ch);
      }
    }
    flush();
    return out;
  }

  TokenId lookup(const std::string& word) const {
    auto it = ids_.find(word);
    return it == ids_.end() ? kUnknownId : it->second;
  }

  // Encodes against the frozen vocabulary; unseen words map to kUnknownId.
  Ngram encode(std::string_view text) const {
    Ngram ids;
    for (const auto& w : split(text)) ids.push_back(lookup(w));
    return ids;
  }

  // Encodes and appends unseen words to the vocabulary in first-seen order.
  Ngram encode_and_grow(std::string_view text) {
    Ngram ids;
    for (auto& w : split(text)) ids.push_back(add(std::move(w)));
    return ids;
  }

  TokenId add(std::string word) {
    auto [it, inserted] = ids_.try_emplace(word, static_cast<TokenId>(words_.size()));
    if (inserted) words_.push_back(std::move(word));
    return it->second;
  }

  std::string detokenize(std::span<const TokenId> ids) const {
    std::string out;
    for (TokenId id : ids) {
      if (!out.empty()) out.push_back(' ');
      out += word(id);
    }
    return out;
  }

  const std::vector<std::string>& words() const { return words_; }

 private:
  TokenizerRules rules_;
  std::vector<std::string> words_;
  std::unordered_map<std::string, TokenId> ids_;
};

struct Context {
  std::uint32_t context_id = 0;
  Granularity granularity = Granularity::kDocument;
  std::string text;
  std::string source_doc_id;
  std::optional<std::string> title;
};

struct RawRecord {
  std::string id;
  std::optional<std::string> title;
  std::string text;
  std::size_t line = 0;
};

struct ChunkingOptions {
  std::size_t passage_tokens = 100;
  // "punct": split after . ! ? followed by whitespace; "newline": one
  // sentence per line.
  std::string sentence_splitter = "punct";
  TokenizerRules rules;
};

inline std::string normalize_whitespace(std::string_view s) {
  std::string out;
  bool pending_space = false;
  for (char ch : s) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(ch);
    }
  }
  return out;
}

inline std::vector<RawRecord> parse_records(std::istream& in) {
  std::vector<RawRecord> records;
  for_each_jsonl(in, [&](const nlohmann::json& j, std::size_t line) {
    auto fail = [&](const std::string& why) {
      throw Error(ErrorCode::kFormat, "line " + std::to_string(line) + ": " + why);
    };
    if (!j.is_object()) fail("record is not an object");
    RawRecord r;
    r.line = line;
    auto id = j.find("id");
    if (id == j.end()) fail("missing 'id'");
    if (id->is_string()) {
      r.id = id->get<std::string>();
    } else if (id->is_number_integer()) {
      r.id = std::to_string(id->get<long long>());
    } else {
      fail("'id' must be a string or integer");
    }
    auto text = j.find("text");
    if (text == j.end() || !text->is_string()) fail("missing string 'text'");
    r.text = text->get<std::string>();
    if (auto t = j.find("title"); t != j.end() && !t->is_null()) {
      if (!t->is_string()) fail("'title' must be a string");
      r.title = t->get<std::string>();
    }
    records.push_back(std::move(r));
  });
  return records;
}

inline std::vector<std::string> split_sentences(std::string_view text, std::string_view rule) {
  std::vector<std::string> out;
  auto emit = [&](std::string_view piece) {
    auto s = normalize_whitespace(piece);
    if (!s.empty()) out.push_back(std::move(s));
  };
  if (rule == "newline") {
    std::size_t start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
      if (i == text.size() || text[i] == '\n') {
        emit(text.substr(start, i - start));
        start = i + 1;
      }
    }
    return out;
  }
  if (rule != "punct") {
    throw Error(ErrorCode::kInvalidArgument, "unknown sentence splitter '" + std::string(rule) + "'");
  }
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if ((c == '.' || c == '!' || c == '?') &&
        (i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1])))) {
      emit(text.substr(start, i + 1 - start));
      start = i + 1;
    }
  }
  emit(text.substr(start));
  return out;
}

// Cuts records into contexts of the requested granularity. Passages are
// non-overlapping windows of `passage_tokens` tokens.
inline std::vector<Context> segment(std::span<const RawRecord> records, Granularity granularity,
                                    const ChunkingOptions& chunking) {
  if (records.empty()) throw Error(ErrorCode::kInvalidArgument, "empty knowledge source");
  if (granularity == Granularity::kPassage && chunking.passage_tokens == 0) {
    throw Error(ErrorCode::kInvalidArgument, "passage_tokens must be positive");
  }
  std::vector<Context> out;
  auto push = [&](std::string text, const RawRecord& r) {
    Context c;
    c.context_id = static_cast<std::uint32_t>(out.size());
    c.granularity = granularity;
    c.text = std::move(text);
    c.source_doc_id = r.id;
    c.title = r.title;
    out.push_back(std::move(c));
  };
  for (const auto& r : records) {
    auto fail = [&](const std::string& why) {
      throw Error(ErrorCode::kFormat, "line " + std::to_string(r.line) + ": " + why);
    };
    const std::string body = normalize_whitespace(r.text);
    switch (granularity) {
      case Granularity::kDocument:
        if (body.empty()) fail("empty text");
        push(body, r);
        break;
      case Granularity::kPassage: {
        TokenizerRules cased = chunking.rules;
        cased.case_fold = false;
        const auto words = Tokenizer::split_words(body, cased);
        if (words.empty()) fail("empty text");
        for (std::size_t i = 0; i < words.size(); i += chunking.passage_tokens) {
          std::string passage;
          const std::size_t end = std::min(words.size(), i + chunking.passage_tokens);
          for (std::size_t k = i; k < end; ++k) {
            if (!passage.empty()) passage.push_back(' ');
            passage += words[k];
          }
          push(std::move(passage), r);
        }
        break;
      }
      case Granularity::kSentence: {
        auto sentences = split_sentences(r.text, chunking.sentence_splitter);
        if (sentences.empty()) fail("empty text");
        for (auto& s : sentences) push(std::move(s), r);
        break;
      }
      case Granularity::kEntity: {
        if (!r.title || normalize_whitespace(*r.title).empty()) fail("entity record needs a title");
        const std::string title = normalize_whitespace(*r.title);
        push(body.empty() ? title : body, r);
        out.back().title = title;
        break;
      }
    }
  }
  return out;
}

inline std::vector<Context> ingest(std::istream& source, Granularity granularity,
                                   const ChunkingOptions& chunking = {}) {
  const auto records = parse_records(source);
  return segment(records, granularity, chunking);
}

struct ContextInfo {
  std::string source_doc_id;
  std::optional<std::string> title;
};

struct TokenizedCorpus {
  Granularity granularity = Granularity::kDocument;
  Tokenizer tokenizer;
  std::vector<TokenId> stream;
  std::vector<std::uint64_t> boundaries;
  std::vector<ContextInfo> contexts;

  std::size_t vocab_size() const { return tokenizer.vocab_size(); }
  std::size_t num_contexts() const { return boundaries.size(); }

  // Tokens of context i, excluding its trailing separator.
  std::span<const TokenId> context_tokens(std::size_t i) const {
    const std::uint64_t begin = boundaries.at(i);
    const std::uint64_t end = i + 1 < boundaries.size() ? boundaries[i + 1] : stream.size();
    return std::span<const TokenId>(stream).subspan(begin, end - begin - 1);
  }
};

// Builds the separator-delimited stream. Entity contexts contribute their
// title, since titles are the entity identifiers.
inline TokenizedCorpus tokenize_corpus(std::span<const Context> contexts,
                                       Tokenizer tokenizer = Tokenizer()) {
  if (contexts.empty()) throw Error(ErrorCode::kInvalidArgument, "empty context list");
  TokenizedCorpus tc;
  tc.granularity = contexts.front().granularity;
  for (const auto& c : contexts) {
    if (c.granularity != tc.granularity) {
      throw Error(ErrorCode::kInvalidArgument, "mixed granularities in one corpus");
    }
    const std::string& body =
        c.granularity == Granularity::kEntity && c.title ? *c.title : c.text;
    auto ids = tokenizer.encode_and_grow(body);
    if (ids.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "context " + std::to_string(c.context_id) + " has no tokens");
    }
    tc.boundaries.push_back(tc.stream.size());
    tc.stream.insert(tc.stream.end(), ids.begin(), ids.end());
    tc.stream.push_back(kSeparatorId);
    tc.contexts.push_back({c.source_doc_id, c.title});
  }
  tc.tokenizer = std::move(tokenizer);
  return tc;
}

// Context owning a stream offset; a separator belongs to the context it ends.
inline std::uint32_t context_of_offset(std::span<const std::uint64_t> boundaries,
                                       std::uint64_t stream_size, std::uint64_t offset) {
  if (offset >= stream_size || boundaries.empty()) {
    throw Error(ErrorCode::kOutOfRange, "offset " + std::to_string(offset) + " outside stream");
  }
  auto it = std::upper_bound(boundaries.begin(), boundaries.end(), offset);
  return static_cast<std::uint32_t>(std::distance(boundaries.begin(), it) - 1);
}

inline std::uint32_t context_of_offset(const TokenizedCorpus& tc, std::uint64_t offset) {
  return context_of_offset(tc.boundaries, tc.stream.size(), offset);
}

// Number of contexts containing each token id.
inline std::vector<std::uint32_t> document_frequencies(const TokenizedCorpus& tc) {
  std::vector<std::uint32_t> df(tc.vocab_size(), 0);
  std::vector<std::uint32_t> last_seen(tc.vocab_size(), UINT32_MAX);
  for (std::size_t i = 0; i < tc.num_contexts(); ++i) {
    for (TokenId t : tc.context_tokens(i)) {
      if (last_seen[t] != i) {
        last_seen[t] = static_cast<std::uint32_t>(i);
        ++df[t];
      }
    }
  }
  return df;
}

inline constexpr std::string_view kCorpusMagic = "UNGC";
inline constexpr std::uint32_t kCorpusVersion = 1;

inline std::vector<char> serialize(const TokenizedCorpus& tc) {
  BinaryWriter w;
  w.put_bytes(kCorpusMagic);
  w.put<std::uint32_t>(kCorpusVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(tc.vocab_size()));
  w.put<std::uint8_t>(static_cast<std::uint8_t>(tc.granularity));
  w.put<std::uint8_t>(tc.tokenizer.rules().case_fold);
  w.put<std::uint8_t>(tc.tokenizer.rules().split_punctuation);
  w.put<std::uint8_t>(0);
  for (const auto& word : tc.tokenizer.words()) w.put_string(word);
  w.put_array<TokenId>(tc.stream);
  w.put_array<std::uint64_t>(tc.boundaries);
  w.put<std::uint64_t>(tc.contexts.size());
  for (const auto& c : tc.contexts) {
    w.put_string(c.source_doc_id);
    w.put<std::uint8_t>(c.title.has_value());
    w.put_string(c.title.value_or(""));
  }
  return w.bytes();
}

inline TokenizedCorpus deserialize_corpus(std::span<const char> bytes) {
  BinaryReader r(bytes);
  r.expect_magic(kCorpusMagic);
  if (r.get<std::uint32_t>() != kCorpusVersion) {
    throw Error(ErrorCode::kFormat, "unsupported corpus version");
  }
  const auto vocab_size = r.get<std::uint32_t>();
  TokenizedCorpus tc;
  const auto g = r.get<std::uint8_t>();
  if (g > 3) throw Error(ErrorCode::kFormat, "bad granularity");
  tc.granularity = static_cast<Granularity>(g);
  TokenizerRules rules;
  rules.case_fold = r.get<std::uint8_t>() != 0;
  rules.split_punctuation = r.get<std::uint8_t>() != 0;
  r.get<std::uint8_t>();
  tc.tokenizer = Tokenizer(rules);
  for (std::uint32_t id = 0; id < vocab_size; ++id) {
    auto word = r.get_string();
    if (id >= kFirstWordId && tc.tokenizer.add(std::move(word)) != id) {
      throw Error(ErrorCode::kFormat, "duplicate vocabulary entry");
    }
  }
  tc.stream = r.get_array<TokenId>();
  tc.boundaries = r.get_array<std::uint64_t>();
  const auto n = r.get<std::uint64_t>();
  if (n != tc.boundaries.size()) throw Error(ErrorCode::kFormat, "context table size mismatch");
  for (std::uint64_t i = 0; i < n; ++i) {
    ContextInfo info;
    info.source_doc_id = r.get_string();
    const bool has_title = r.get<std::uint8_t>() != 0;
    auto title = r.get_string();
    if (has_title) info.title = std::move(title);
    tc.contexts.push_back(std::move(info));
  }
  if (!r.at_end()) throw Error(ErrorCode::kFormat, "trailing bytes in corpus file");
  return tc;
}

inline void save_corpus(const TokenizedCorpus& tc, const std::string& path) {
  write_file_bytes(path, serialize(tc));
}

inline TokenizedCorpus load_corpus(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  return deserialize_corpus(bytes);
}

}  // namespace unigen

#endif  // UNIGEN_CORPUS_HPP_
