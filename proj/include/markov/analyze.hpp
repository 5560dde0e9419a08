#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "markov/generate.hpp"
#include "markov/ngram.hpp"
#include "markov/smoothing.hpp"

namespace markov {

// Fraction of length-(k+1) windows of `generated` that occur in the
// training data. 1.0 means every transition taken was a real corpus
// transition. Throws InsufficientDataError when `generated` is shorter
// than k+1.
double coverage_check(std::span<const TokenId> generated,
                      const KGramIndex& index);
double coverage_check(std::span<const TokenId> generated,
                      std::span<const TokenId> corpus, int k);

// Length of the longest contiguous run of `generated` that appears
// verbatim anywhere in `corpus`.
std::size_t longest_copy(std::span<const TokenId> generated,
                         std::span<const TokenId> corpus);

// Reusable form of longest_copy: builds a suffix array over the corpus
// once (prefix doubling), then answers each query by binary search plus
// neighbor LCPs. Queries are const and safe to run concurrently.
class LongestMatcher {
 public:
  explicit LongestMatcher(std::span<const TokenId> corpus);

  std::size_t longest_copy(std::span<const TokenId> generated) const;

 private:
  bool suffix_less(std::uint32_t suffix, std::span<const TokenId> query) const;

  std::vector<TokenId> corpus_;
  std::vector<std::uint32_t> sa_;
};

// How exhausted the sample space is at this order: contexts that admit a
// single continuation are forced moves for an unsmoothed walk.
struct ExhaustionStats {
  double unique_continuation_fraction = 0.0;
  double mean_branching = 0.0;
  std::uint64_t distinct_contexts = 0;
};

ExhaustionStats exhaustion_stats(const KGramIndex& index);

struct PerplexityResult {
  // exp(-mean log probability); empty when any position had zero or
  // undefined probability or there were no scorable positions.
  std::optional<double> value;
  std::optional<std::size_t> failed_position;
};

// Scores heldout positions k..N-1 under the model's smoothing. A zero or
// undefined probability stops the pass and reports the position instead of
// returning a number.
PerplexityResult perplexity(const ModelRef& model,
                            const SmoothingConfig& smoothing,
                            std::span<const TokenId> heldout);

struct HeldoutSplit {
  std::span<const TokenId> train;
  std::span<const TokenId> heldout;
  double split_fraction = 0.0;
};

// Contiguous split: the final fraction of the stream becomes heldout.
HeldoutSplit split_heldout(std::span<const TokenId> tokens,
                           double heldout_fraction);

struct AnalysisReport {
  int k = 0;
  // Means over runs that produced output; empty when no run did.
  std::optional<double> coverage_fraction;
  std::optional<double> longest_copy_ratio;
  double unique_continuation_fraction = 0.0;
  double mean_branching = 0.0;
  std::uint64_t distinct_contexts = 0;
  // On the heldout split; empty when undefined.
  std::optional<double> perplexity;
  std::uint64_t runs = 0;
};

struct KSweepOptions {
  std::uint64_t runs = 10;
  std::uint64_t length = 200;
  double temperature = 1.0;
  SmoothingConfig smoothing;
  std::uint64_t rng_seed = 0;
  double heldout_fraction = 0.1;
};

struct KSweepEntry {
  int k = 0;
  std::optional<AnalysisReport> report;
  // Set instead of `report` when this order failed (e.g. corpus shorter
  // than k); other orders still get their reports.
  std::string error;
};

// Full memorization/coherence sweep. Per order: builds the index, runs
// `runs` generations (seed = corpus pick, run r uses rng_seed + r),
// aggregates coverage and copy-ratio means, computes exhaustion stats, and
// scores perplexity of the trailing heldout split under a model trained on
// the leading remainder. Runs execute in parallel when OpenMP is enabled;
// aggregation order is fixed, so results do not depend on thread count.
//
// longest_copy_ratio per run: (longest_copy(seed + output) - k) / |output|,
// clamped to [0, 1]; the seed k-gram is always a corpus substring, so only
// copying beyond it counts.
std::vector<KSweepEntry> k_sweep(std::span<const TokenId> corpus,
                                 std::uint32_t vocab_size,
                                 std::span<const int> ks,
                                 const KSweepOptions& options);

}  // namespace markov
