#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "markov/errors.hpp"
#include "markov/ngram.hpp"

namespace markov {

struct SmoothingConfig {
  enum class Method { none, add_alpha, interpolation, backoff };

  Method method = Method::none;
  // add_alpha: pseudo-count added to every vocabulary token.
  double alpha = 0.1;
  // interpolation: one weight per order, highest order first, ending at the
  // unigram weight. Empty means uniform weights.
  std::vector<double> lambdas;
  // backoff: absolute discount subtracted from every seen count.
  double discount = 0.5;

  // Throws DomainError on out-of-range parameters or a lambda vector whose
  // length is not order+1 or whose sum is off 1 by more than 1e-9.
  void validate(int order) const;

  static std::vector<double> uniform_lambdas(int order);
};

// Token frequencies over the whole training stream: the order-0 model.
struct UnigramTable {
  std::vector<std::uint64_t> counts;
  std::uint64_t total = 0;

  // Throws DomainError for an id outside the vocabulary.
  double prob(TokenId id) const;
};

UnigramTable count_unigrams(std::span<const TokenId> tokens,
                            std::uint32_t vocab_size);

// Indices for every order k down to 1 plus the unigram table, all built
// from one stream. This is what interpolation and backoff need to reach
// lower orders exactly rather than approximately.
class ModelStack {
 public:
  static ModelStack build(std::span<const TokenId> tokens, int k,
                          std::uint32_t vocab_size);

  int order() const { return static_cast<int>(indices_.size()); }
  std::uint32_t vocab_size() const { return unigram_sized_vocab_; }
  const KGramIndex& index() const { return indices_.front(); }
  // j in [1, order].
  const KGramIndex& index_for_order(int j) const;
  const UnigramTable& unigram() const { return unigram_; }

 private:
  std::vector<KGramIndex> indices_;  // [0] = order k, back() = order 1
  UnigramTable unigram_;
  std::uint32_t unigram_sized_vocab_ = 0;
};

// (count + alpha) / (total + alpha * vocab_size). With alpha = 0 this
// degenerates to the MLE, including its MissingContextError on an unseen
// context.
double add_alpha_prob(const KGramIndex& index, std::span<const TokenId> context,
                      TokenId token, double alpha, std::uint32_t vocab_size);

// Linear blend of the MLE at every order, lambdas[0] weighting order k and
// lambdas[k] the unigram. Orders whose context was never seen contribute 0.
double interpolated_prob(const ModelStack& stack,
                         std::span<const double> lambdas,
                         std::span<const TokenId> context, TokenId token);

// Katz-style backoff with absolute discounting: seen continuations keep
// (count - d) / total; the reserved mass d * distinct / total is spread
// over unseen tokens proportionally to the next-lower-order model. The
// per-context normalizer is memoized, so a scorer instance amortizes across
// the many lookups of a walk or an evaluation pass.
//
// A scorer is not thread-safe; concurrent code uses one per thread.
class BackoffScorer {
 public:
  BackoffScorer(const ModelStack& stack, double discount);

  // Throws DomainError for a token id outside the vocabulary or a context
  // whose length is not the stack order.
  double prob(std::span<const TokenId> context, TokenId token);

 private:
  double level_prob(int order, std::span<const TokenId> context, TokenId token);
  double reserved_scale(int order, std::size_t row_index);

  const ModelStack* stack_;
  double discount_;
  std::unordered_map<std::uint64_t, double> scale_cache_;
};

// One-shot convenience wrapper around BackoffScorer.
double backoff_prob(const ModelStack& stack, std::span<const TokenId> context,
                    TokenId token, double discount);

// A model reference as the generation and evaluation code consumes it:
// always an order-k index, plus the full stack when the smoothing method
// needs lower orders.
struct ModelRef {
  const KGramIndex* index = nullptr;
  const ModelStack* stack = nullptr;
};

inline ModelRef model_ref(const KGramIndex& index) { return {&index, nullptr}; }
inline ModelRef model_ref(const ModelStack& stack) {
  return {&stack.index(), &stack};
}

// Probability of `token` after `context` under the configured smoothing.
// Dispatches to the MLE / add-alpha / interpolation / backoff paths; the
// interpolation and backoff paths require ref.stack (DomainError
// otherwise). `scorer` lets backoff callers reuse a memoized scorer; pass
// nullptr to use a transient one.
double smoothed_prob(const ModelRef& ref, const SmoothingConfig& smoothing,
                     std::span<const TokenId> context, TokenId token,
                     BackoffScorer* scorer = nullptr);

}  // namespace markov
