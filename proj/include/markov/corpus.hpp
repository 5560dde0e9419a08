#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "markov/errors.hpp"

namespace markov {

using TokenId = std::uint32_t;

// How raw text is turned into a token stream.
struct TokenizerConfig {
  enum class Mode { word, bpe };
  enum class Normalization { none, nfc };
  enum class Punctuation { separate, strip };

  Mode mode = Mode::word;
  bool lowercase = true;
  Normalization normalization = Normalization::nfc;
  Punctuation punctuation = Punctuation::separate;
};

// Bijection between token surfaces and dense ids. Ids are contiguous from 0
// in first-occurrence order, so the same token sequence always produces the
// same numbering.
class Vocabulary {
 public:
  // Returns the existing id when the surface is already known.
  TokenId add(std::string_view surface);

  std::optional<TokenId> id_of(std::string_view surface) const;

  // Throws DomainError when id is out of range.
  const std::string& surface_of(TokenId id) const;

  std::uint32_t size() const {
    return static_cast<std::uint32_t>(surfaces_.size());
  }

  // Throws DomainError on an unknown surface.
  std::vector<TokenId> encode(std::span<const std::string> surfaces) const;
  std::vector<std::string> decode(std::span<const TokenId> ids) const;

 private:
  std::vector<std::string> surfaces_;
  std::unordered_map<std::string, TokenId> ids_;
};

// Ordered list of byte-pair merges, most frequent first.
struct BpeMergeTable {
  std::vector<std::pair<std::string, std::string>> merges;
};

// Whitespace-split word tokenizer. Applies (in order) UTF-8 decoding,
// normalization, lowercasing, whitespace splitting, and punctuation
// handling per the config. In `separate` mode every leading and trailing
// punctuation code point of a chunk becomes its own token; punctuation
// inside a word (don't, vice-versa) stays attached. Throws DecodeError on
// malformed UTF-8.
std::vector<std::string> tokenize_words(std::string_view text,
                                        const TokenizerConfig& config);

// Assigns ids in first-occurrence order.
Vocabulary build_vocab(std::span<const std::string> tokens);

// Learns at most num_merges byte-pair merges from a word-token sequence.
// Each round merges the most frequent adjacent symbol pair (ties broken by
// lexicographically smallest pair) and stops early once no pair occurs
// twice. Pairs never span a word boundary.
BpeMergeTable train_bpe(std::span<const std::string> words,
                        std::size_t num_merges);

// Tokenizes text into subword units: word-tokenizes per the config, splits
// each word into code points, then replays the merge table in order.
std::vector<std::string> apply_bpe(const BpeMergeTable& table,
                                   std::string_view text,
                                   const TokenizerConfig& config);

// Escaping for surfaces embedded in line-oriented files: backslash escapes
// for tab, newline, carriage return and backslash itself.
std::string escape_surface(std::string_view surface);
// Throws FormatError on a dangling or unknown escape.
std::string unescape_surface(std::string_view text);

}  // namespace markov
