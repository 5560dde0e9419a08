#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "markov/corpus.hpp"
#include "markov/errors.hpp"

namespace markov {

// Counted continuations of a single context: ids ascending, counts aligned,
// total = sum of counts = number of training windows with that context.
struct ContinuationTable {
  std::span<const TokenId> ids;
  std::span<const std::uint64_t> counts;
  std::uint64_t total = 0;

  std::size_t distinct() const { return ids.size(); }
  // Count for one token, 0 when the token never followed this context.
  std::uint64_t count_of(TokenId token) const;
};

struct RowView {
  std::span<const TokenId> context;
  ContinuationTable continuations;
};

struct ContinuationEntry {
  TokenId id;
  std::uint64_t count;
  double probability;
};

// Immutable index of every length-(k+1) window of a token stream, grouped
// by the leading k tokens. Rows are stored contiguously in lexicographic
// context order; point lookups go through an open-addressing hash table
// over the rows. Counts are exact integers; probabilities are derived on
// demand.
class KGramIndex {
 public:
  KGramIndex() = default;

  // Sort-based build: window positions are sorted lexicographically (in
  // parallel blocks merged pairwise when OpenMP is enabled), then
  // run-length encoded. The result is identical for any thread count.
  static KGramIndex build(std::span<const TokenId> tokens, int k,
                          std::uint32_t vocab_size);

  // Single-threaded hash-map build kept as a reference implementation for
  // tests and benchmarks. Produces a bitwise-identical index.
  static KGramIndex build_serial(std::span<const TokenId> tokens, int k,
                                 std::uint32_t vocab_size);

  int order() const { return k_; }
  std::uint64_t total_tokens() const { return total_tokens_; }
  std::uint32_t vocab_size() const { return vocab_size_; }
  std::size_t row_count() const { return row_total_.size(); }

  // Row index in lexicographic context order, or nullopt for an unseen
  // context. Throws DomainError when the context length is not k.
  std::optional<std::size_t> find_row(std::span<const TokenId> context) const;
  RowView row(std::size_t index) const;

  // Window count of context followed by token; 0 when unseen.
  std::uint64_t pair_count(std::span<const TokenId> context,
                           TokenId token) const;

  bool operator==(const KGramIndex& other) const;

 private:
  friend class KGramIndexBuilder;

  void rebuild_probe();
  std::span<const TokenId> context_at(std::size_t row) const;

  int k_ = 0;
  std::uint64_t total_tokens_ = 0;
  std::uint32_t vocab_size_ = 0;
  std::vector<TokenId> ctx_ids_;          // row_count * k
  std::vector<std::uint64_t> row_total_;  // row_count
  std::vector<std::uint64_t> row_offset_; // row_count + 1, into ent_*
  std::vector<TokenId> ent_ids_;
  std::vector<std::uint64_t> ent_counts_;
  std::vector<std::uint32_t> probe_;      // row index + 1, 0 = empty
};

// Streaming constructor for deserialization: rows must arrive in strictly
// ascending context order with strictly ascending continuation ids.
// Throws FormatError on violations.
class KGramIndexBuilder {
 public:
  KGramIndexBuilder(int k, std::uint64_t total_tokens,
                    std::uint32_t vocab_size);

  void add_row(std::span<const TokenId> context,
               std::span<const TokenId> continuation_ids,
               std::span<const std::uint64_t> continuation_counts);
  KGramIndex finish();

 private:
  KGramIndex index_;
  bool finished_ = false;
};

// Continuations of a context sorted by count descending, ties by id
// ascending, each with its MLE probability. Throws MissingContextError for
// an unseen context.
std::vector<ContinuationEntry> continuations(const KGramIndex& index,
                                             std::span<const TokenId> context);

// count(context, token) / total(context). 0 for a token never seen after a
// seen context; MissingContextError for an unseen context.
double mle_prob(const KGramIndex& index, std::span<const TokenId> context,
                TokenId token);

}  // namespace markov
