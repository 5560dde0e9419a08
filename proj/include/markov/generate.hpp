#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "markov/distribution.hpp"
#include "markov/errors.hpp"
#include "markov/ngram.hpp"
#include "markov/rng.hpp"
#include "markov/smoothing.hpp"

namespace markov {

struct GenerationConfig {
  std::uint64_t length = 0;
  double temperature = 1.0;
  SmoothingConfig smoothing;
};

struct GenerationResult {
  std::vector<TokenId> seed_context;
  // Generated continuation; the seed is not repeated here.
  std::vector<TokenId> tokens;
  // True exactly when a step reached a context with no observed
  // continuation (possible only when the effective smoothing is the plain
  // MLE) and the walk stopped early.
  bool terminated_early = false;
  std::uint64_t steps_taken = 0;
};

// Seed k-gram drawn uniformly over all k-gram start positions of the
// stream, 0 through N-k inclusive. Throws InsufficientDataError when the
// stream is shorter than k.
std::vector<TokenId> pick_seed(std::span<const TokenId> corpus, int k,
                               Rng& rng);

// Same seed distribution, reconstructed without the stream: rows of the
// index weighted by their window totals, plus one slot for the stream's
// trailing k-gram (the only k-gram start that is not a window start).
// `tail` must be that trailing k-gram.
std::vector<TokenId> pick_seed_from_index(const KGramIndex& index,
                                          std::span<const TokenId> tail,
                                          Rng& rng);

// Rescales probabilities to p^(1/T) and renormalizes, in log space so very
// small probabilities survive. T < 1 sharpens, T > 1 flattens, T = 1
// returns the input (bit-for-bit). Zero entries stay zero. Throws
// DomainError for T <= 0 or non-finite T.
Distribution apply_temperature(const Distribution& dist, double temperature);

// Conditional next-token distribution under the configured smoothing.
// Support is the observed continuations for the MLE paths and the full
// vocabulary for genuinely smoothed ones. Entries are id-ascending. Throws
// MissingContextError when the context is unseen and smoothing cannot fill
// it in.
Distribution conditional_distribution(const ModelRef& model,
                                      std::span<const TokenId> context,
                                      const SmoothingConfig& smoothing,
                                      BackoffScorer* scorer = nullptr);

// One sampling step: conditional distribution, temperature, inverse-CDF
// draw.
TokenId step(const ModelRef& model, std::span<const TokenId> context,
             const GenerationConfig& config, Rng& rng);

// Walks `config.length` steps from the seed context, sliding the window by
// one each step. A missing-context halt sets terminated_early instead of
// throwing. The seed must have length k; throws DomainError otherwise.
GenerationResult generate(const ModelRef& model, const GenerationConfig& config,
                          std::span<const TokenId> seed, Rng& rng);

}  // namespace markov
