#pragma once

// Token accounting. The reference tokenizer splits on whitespace and counts
// the punctuation marks . , : ; ? ! @ as their own tokens. The approx-bpe
// slot uses the same split but charges extra for very long words and is
// meant to be paired with a per-turn overhead that models chat-format
// wrapper tokens (3 per message for the usual chat schemes).

#include <cctype>
#include <map>
#include <memory>
#include <string>
#include <string_view>

#include "tme/error.hpp"
#include "tme/transcript.hpp"

namespace tme {

struct Tokenizer {
  virtual ~Tokenizer() = default;
  virtual long count(std::string_view text) const = 0;
  virtual std::string name() const = 0;
};

namespace detail {

inline bool is_mark(char c) {
  return c == '.' || c == ',' || c == ':' || c == ';' || c == '?' || c == '!' || c == '@';
}

template <typename WordCost>
long count_split(std::string_view text, WordCost word_cost) {
  long total = 0;
  std::size_t word_len = 0;
  auto flush = [&] {
    if (word_len > 0) total += word_cost(word_len);
    word_len = 0;
  };
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else if (is_mark(c)) {
      flush();
      total += 1;
    } else {
      ++word_len;
    }
  }
  flush();
  return total;
}

}  // namespace detail

class ReferenceTokenizer final : public Tokenizer {
 public:
  long count(std::string_view text) const override {
    return detail::count_split(text, [](std::size_t) { return 1L; });
  }
  std::string name() const override { return "ref"; }
};

class ApproxBpeTokenizer final : public Tokenizer {
 public:
  long count(std::string_view text) const override {
    // Common words encode as one token; beyond 12 characters charge one
    // more per started 6-character block.
    return detail::count_split(text, [](std::size_t len) {
      long extra = len > 12 ? static_cast<long>((len - 13) / 6 + 1) : 0;
      return 1L + extra;
    });
  }
  std::string name() const override { return "approx-bpe"; }
};

inline std::map<std::string, std::shared_ptr<const Tokenizer>>& tokenizer_registry() {
  static std::map<std::string, std::shared_ptr<const Tokenizer>> registry{
      {"ref", std::make_shared<ReferenceTokenizer>()},
      {"approx-bpe", std::make_shared<ApproxBpeTokenizer>()}};
  return registry;
}

inline std::shared_ptr<const Tokenizer> find_tokenizer(const std::string& name) {
  auto& registry = tokenizer_registry();
  auto it = registry.find(name);
  if (it == registry.end()) fail(ErrorCode::not_found, "no tokenizer '" + name + "'");
  return it->second;
}

struct CostModel {
  std::string tokenizer = "ref";
  long per_turn_overhead = 0;
};

inline long count_tokens(const CostModel& cost, const PromptTranscript& transcript) {
  auto tokenizer = find_tokenizer(cost.tokenizer);
  long total = 0;
  for (const Turn& turn : transcript.turns)
    total += tokenizer->count(turn.text) + cost.per_turn_overhead;
  return total;
}

inline long count_tokens(const std::string& tokenizer_name,
                         const PromptTranscript& transcript) {
  return count_tokens(CostModel{tokenizer_name, 0}, transcript);
}

}  // namespace tme
