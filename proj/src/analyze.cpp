#include "markov/analyze.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace markov {

double coverage_check(std::span<const TokenId> generated,
                      const KGramIndex& index) {
  const int k = index.order();
  if (generated.size() < static_cast<std::size_t>(k) + 1) {
    throw InsufficientDataError("coverage_check: sequence of length " +
                                std::to_string(generated.size()) +
                                " has no length-" + std::to_string(k + 1) +
                                " window");
  }
  const std::size_t windows = generated.size() - static_cast<std::size_t>(k);
  std::size_t covered = 0;
  for (std::size_t i = 0; i < windows; ++i) {
    const auto context = generated.subspan(i, static_cast<std::size_t>(k));
    if (index.pair_count(context, generated[i + k]) > 0) ++covered;
  }
  return static_cast<double>(covered) / static_cast<double>(windows);
}

double coverage_check(std::span<const TokenId> generated,
                      std::span<const TokenId> corpus, int k) {
  return coverage_check(generated, KGramIndex::build(corpus, k, 0));
}

std::size_t longest_copy(std::span<const TokenId> generated,
                         std::span<const TokenId> corpus) {
  return LongestMatcher(corpus).longest_copy(generated);
}

LongestMatcher::LongestMatcher(std::span<const TokenId> corpus)
    : corpus_(corpus.begin(), corpus.end()) {
  const std::size_t n = corpus_.size();
  if (n > std::numeric_limits<std::uint32_t>::max()) {
    throw DomainError("LongestMatcher: corpus too long for 32-bit positions");
  }
  sa_.resize(n);
  if (n == 0) return;

  std::iota(sa_.begin(), sa_.end(), 0u);
  std::sort(sa_.begin(), sa_.end(), [&](std::uint32_t a, std::uint32_t b) {
    return corpus_[a] < corpus_[b];
  });
  std::vector<std::uint32_t> rank(n), next_rank(n);
  rank[sa_[0]] = 0;
  for (std::size_t i = 1; i < n; ++i) {
    rank[sa_[i]] =
        rank[sa_[i - 1]] + (corpus_[sa_[i]] != corpus_[sa_[i - 1]] ? 1 : 0);
  }

  std::vector<std::uint32_t> count(n + 2);
  std::vector<std::uint32_t> scratch(n);
  for (std::size_t len = 1; rank[sa_[n - 1]] != n - 1; len <<= 1) {
    const auto tail_key = [&](std::uint32_t i) -> std::uint32_t {
      return i + len < n ? rank[i + len] + 1 : 0;
    };
    // Two stable counting-sort passes: by the tail rank, then by the head
    // rank, yielding order by (head, tail).
    std::fill(count.begin(), count.end(), 0u);
    for (std::size_t i = 0; i < n; ++i) ++count[tail_key(static_cast<std::uint32_t>(i)) + 1];
    for (std::size_t i = 1; i < count.size(); ++i) count[i] += count[i - 1];
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t p = sa_[i];
      scratch[count[tail_key(p)]++] = p;
    }
    std::fill(count.begin(), count.end(), 0u);
    for (std::size_t i = 0; i < n; ++i) ++count[rank[i] + 1];
    for (std::size_t i = 1; i < count.size(); ++i) count[i] += count[i - 1];
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t p = scratch[i];
      sa_[count[rank[p]]++] = p;
    }

    next_rank[sa_[0]] = 0;
    for (std::size_t i = 1; i < n; ++i) {
      const std::uint32_t a = sa_[i - 1];
      const std::uint32_t b = sa_[i];
      const bool differs = rank[a] != rank[b] || tail_key(a) != tail_key(b);
      next_rank[b] = next_rank[a] + (differs ? 1 : 0);
    }
    rank.swap(next_rank);
  }
}

bool LongestMatcher::suffix_less(std::uint32_t suffix,
                                 std::span<const TokenId> query) const {
  const std::size_t len = corpus_.size() - suffix;
  const std::size_t m = std::min(len, query.size());
  for (std::size_t i = 0; i < m; ++i) {
    if (corpus_[suffix + i] != query[i]) return corpus_[suffix + i] < query[i];
  }
  return len < query.size();
}

std::size_t LongestMatcher::longest_copy(
    std::span<const TokenId> generated) const {
  const std::size_t n = corpus_.size();
  if (n == 0 || generated.empty()) return 0;
  std::size_t best = 0;
  for (std::size_t i = 0; i < generated.size(); ++i) {
    if (generated.size() - i <= best) break;
    const auto query = generated.subspan(i);
    std::size_t lo = 0;
    std::size_t hi = n;
    while (lo < hi) {
      const std::size_t mid = lo + (hi - lo) / 2;
      if (suffix_less(sa_[mid], query)) {
        lo = mid + 1;
      } else {
        hi = mid;
      }
    }
    const auto lcp_at = [&](std::size_t order_pos) {
      const std::uint32_t s = sa_[order_pos];
      const std::size_t limit = std::min(query.size(), n - s);
      std::size_t m = 0;
      while (m < limit && corpus_[s + m] == query[m]) ++m;
      return m;
    };
    if (lo < n) best = std::max(best, lcp_at(lo));
    if (lo > 0) best = std::max(best, lcp_at(lo - 1));
  }
  return best;
}

ExhaustionStats exhaustion_stats(const KGramIndex& index) {
  ExhaustionStats stats;
  stats.distinct_contexts = index.row_count();
  if (stats.distinct_contexts == 0) return stats;
  std::uint64_t unique = 0;
  std::uint64_t branches = 0;
  for (std::size_t r = 0; r < index.row_count(); ++r) {
    const std::size_t distinct = index.row(r).continuations.distinct();
    branches += distinct;
    if (distinct == 1) ++unique;
  }
  const double rows = static_cast<double>(stats.distinct_contexts);
  stats.unique_continuation_fraction = static_cast<double>(unique) / rows;
  stats.mean_branching = static_cast<double>(branches) / rows;
  return stats;
}

PerplexityResult perplexity(const ModelRef& model,
                            const SmoothingConfig& smoothing,
                            std::span<const TokenId> heldout) {
  if (model.index == nullptr) {
    throw DomainError("perplexity: model reference has no index");
  }
  PerplexityResult result;
  const int k = model.index->order();
  const std::size_t n = heldout.size();
  if (n < static_cast<std::size_t>(k) + 1) return result;

  std::optional<BackoffScorer> scorer;
  if (smoothing.method == SmoothingConfig::Method::backoff &&
      model.stack != nullptr) {
    scorer.emplace(*model.stack, smoothing.discount);
  }

  const std::uint32_t vocab = model.index->vocab_size();
  double sum_log = 0.0;
  std::size_t positions = 0;
  for (std::size_t i = static_cast<std::size_t>(k); i < n; ++i) {
    const auto context = heldout.subspan(i - static_cast<std::size_t>(k),
                                         static_cast<std::size_t>(k));
    const TokenId token = heldout[i];
    if (vocab > 0 && token >= vocab) {
      result.failed_position = i;
      return result;
    }
    double p = 0.0;
    try {
      p = smoothed_prob(model, smoothing, context, token,
                        scorer ? &*scorer : nullptr);
    } catch (const MissingContextError&) {
      p = 0.0;
    }
    if (!(p > 0.0)) {
      result.failed_position = i;
      return result;
    }
    sum_log += std::log(p);
    ++positions;
  }
  result.value = std::exp(-sum_log / static_cast<double>(positions));
  return result;
}

HeldoutSplit split_heldout(std::span<const TokenId> tokens,
                           double heldout_fraction) {
  if (!(heldout_fraction > 0.0) || !(heldout_fraction < 1.0)) {
    throw DomainError("split_heldout: fraction must lie in (0, 1)");
  }
  const std::size_t heldout_len = static_cast<std::size_t>(
      static_cast<double>(tokens.size()) * heldout_fraction);
  return {tokens.first(tokens.size() - heldout_len), tokens.last(heldout_len),
          heldout_fraction};
}

namespace {

AnalysisReport analyze_order(std::span<const TokenId> corpus,
                             std::uint32_t vocab_size, int k,
                             const KSweepOptions& options,
                             const LongestMatcher& matcher) {
  options.smoothing.validate(k);
  if (!(options.temperature > 0.0) || !std::isfinite(options.temperature)) {
    throw DomainError("k_sweep: temperature must be finite and positive");
  }

  AnalysisReport report;
  report.k = k;
  report.runs = options.runs;

  const KGramIndex index = KGramIndex::build(corpus, k, vocab_size);
  const ExhaustionStats stats = exhaustion_stats(index);
  report.unique_continuation_fraction = stats.unique_continuation_fraction;
  report.mean_branching = stats.mean_branching;
  report.distinct_contexts = stats.distinct_contexts;

  const bool needs_stack =
      options.smoothing.method == SmoothingConfig::Method::interpolation ||
      options.smoothing.method == SmoothingConfig::Method::backoff;

  if (options.runs > 0) {
    if (corpus.size() < static_cast<std::size_t>(k)) {
      throw InsufficientDataError("k_sweep: corpus shorter than k");
    }
    std::optional<ModelStack> stack;
    ModelRef model = model_ref(index);
    if (needs_stack) {
      stack = ModelStack::build(corpus, k, vocab_size);
      model = model_ref(*stack);
    }

    const auto runs = static_cast<long long>(options.runs);
    std::vector<double> coverage(options.runs, 0.0);
    std::vector<double> copy_ratio(options.runs, 0.0);
    std::vector<char> produced(options.runs, 0);
    std::vector<char> failed(options.runs, 0);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (long long r = 0; r < runs; ++r) {
      try {
        Rng rng(options.rng_seed + static_cast<std::uint64_t>(r));
        const std::vector<TokenId> seed = pick_seed(corpus, k, rng);
        GenerationConfig config;
        config.length = options.length;
        config.temperature = options.temperature;
        config.smoothing = options.smoothing;
        const GenerationResult gen = generate(model, config, seed, rng);
        if (gen.tokens.empty()) continue;
        std::vector<TokenId> full(seed);
        full.insert(full.end(), gen.tokens.begin(), gen.tokens.end());
        coverage[r] = coverage_check(full, index);
        const std::size_t copy = matcher.longest_copy(full);
        const std::size_t beyond_seed =
            copy > static_cast<std::size_t>(k) ? copy - k : 0;
        copy_ratio[r] = std::min(
            static_cast<double>(beyond_seed) /
                static_cast<double>(gen.tokens.size()),
            1.0);
        produced[r] = 1;
      } catch (...) {
        failed[r] = 1;
      }
    }
    for (std::uint64_t r = 0; r < options.runs; ++r) {
      if (failed[r]) throw Error("k_sweep: generation run failed");
    }
    std::uint64_t valid = 0;
    double coverage_sum = 0.0;
    double ratio_sum = 0.0;
    for (std::uint64_t r = 0; r < options.runs; ++r) {
      if (!produced[r]) continue;
      ++valid;
      coverage_sum += coverage[r];
      ratio_sum += copy_ratio[r];
    }
    if (valid > 0) {
      report.coverage_fraction = coverage_sum / static_cast<double>(valid);
      report.longest_copy_ratio = ratio_sum / static_cast<double>(valid);
    }
  }

  const HeldoutSplit split = split_heldout(corpus, options.heldout_fraction);
  if (!split.heldout.empty()) {
    if (needs_stack) {
      const ModelStack train_stack =
          ModelStack::build(split.train, k, vocab_size);
      report.perplexity =
          perplexity(model_ref(train_stack), options.smoothing, split.heldout)
              .value;
    } else {
      const KGramIndex train_index =
          KGramIndex::build(split.train, k, vocab_size);
      report.perplexity =
          perplexity(model_ref(train_index), options.smoothing, split.heldout)
              .value;
    }
  }
  return report;
}

}  // namespace

std::vector<KSweepEntry> k_sweep(std::span<const TokenId> corpus,
                                 std::uint32_t vocab_size,
                                 std::span<const int> ks,
                                 const KSweepOptions& options) {
  const LongestMatcher matcher(corpus);
  std::vector<KSweepEntry> entries;
  entries.reserve(ks.size());
  for (int k : ks) {
    KSweepEntry entry;
    entry.k = k;
    try {
      entry.report = analyze_order(corpus, vocab_size, k, options, matcher);
    } catch (const std::exception& e) {
      entry.error = e.what();
    }
    entries.push_back(std::move(entry));
  }
  return entries;
}

}  // namespace markov
