#include "markov/generate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

namespace markov {

namespace {

void check_temperature(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw DomainError("temperature must be finite and positive");
  }
}

}  // namespace

std::vector<TokenId> pick_seed(std::span<const TokenId> corpus, int k,
                               Rng& rng) {
  if (k < 1) throw DomainError("pick_seed: k must be at least 1");
  if (corpus.size() < static_cast<std::size_t>(k)) {
    throw InsufficientDataError("pick_seed: stream of length " +
                                std::to_string(corpus.size()) +
                                " holds no " + std::to_string(k) + "-gram");
  }
  const std::uint64_t positions = corpus.size() - static_cast<std::size_t>(k) + 1;
  const std::uint64_t start = rng.next_below(positions);
  return std::vector<TokenId>(corpus.begin() + static_cast<std::ptrdiff_t>(start),
                              corpus.begin() + static_cast<std::ptrdiff_t>(start) + k);
}

std::vector<TokenId> pick_seed_from_index(const KGramIndex& index,
                                          std::span<const TokenId> tail,
                                          Rng& rng) {
  const int k = index.order();
  if (index.total_tokens() < static_cast<std::uint64_t>(k)) {
    throw InsufficientDataError("pick_seed_from_index: stream shorter than k");
  }
  if (tail.size() != static_cast<std::size_t>(k)) {
    throw DomainError("pick_seed_from_index: tail length does not match order");
  }
  const std::uint64_t positions = index.total_tokens() - k + 1;
  std::uint64_t u = rng.next_below(positions);
  for (std::size_t r = 0; r < index.row_count(); ++r) {
    const RowView view = index.row(r);
    if (u < view.continuations.total) {
      return std::vector<TokenId>(view.context.begin(), view.context.end());
    }
    u -= view.continuations.total;
  }
  return std::vector<TokenId>(tail.begin(), tail.end());
}

Distribution apply_temperature(const Distribution& dist, double temperature) {
  check_temperature(temperature);
  double max_log = -std::numeric_limits<double>::infinity();
  for (const auto& e : dist.entries) {
    if (e.prob > 0.0) max_log = std::max(max_log, std::log(e.prob));
  }
  if (!std::isfinite(max_log)) {
    throw DomainError("apply_temperature: distribution has no mass");
  }
  if (temperature == 1.0) return dist;
  Distribution out;
  out.entries.reserve(dist.entries.size());
  double sum = 0.0;
  for (const auto& e : dist.entries) {
    double w = 0.0;
    if (e.prob > 0.0) {
      w = std::exp((std::log(e.prob) - max_log) / temperature);
    }
    out.entries.push_back({e.id, w});
    sum += w;
  }
  for (auto& e : out.entries) e.prob /= sum;
  return out;
}

Distribution conditional_distribution(const ModelRef& model,
                                      std::span<const TokenId> context,
                                      const SmoothingConfig& smoothing,
                                      BackoffScorer* scorer) {
  if (model.index == nullptr) {
    throw DomainError("conditional_distribution: model reference has no index");
  }
  const KGramIndex& index = *model.index;
  const std::uint32_t vocab = index.vocab_size();

  const bool effectively_mle =
      smoothing.method == SmoothingConfig::Method::none ||
      (smoothing.method == SmoothingConfig::Method::add_alpha &&
       smoothing.alpha == 0.0);
  if (effectively_mle) {
    const auto r = index.find_row(context);
    if (!r) {
      throw MissingContextError(
          "conditional_distribution: context never observed");
    }
    const auto table = index.row(*r).continuations;
    Distribution dist;
    dist.entries.reserve(table.distinct());
    const double total = static_cast<double>(table.total);
    for (std::size_t i = 0; i < table.ids.size(); ++i) {
      dist.entries.push_back(
          {table.ids[i], static_cast<double>(table.counts[i]) / total});
    }
    return dist;
  }

  Distribution dist;
  dist.entries.resize(vocab);

  switch (smoothing.method) {
    case SmoothingConfig::Method::add_alpha: {
      const auto r = index.find_row(context);
      std::uint64_t total = 0;
      ContinuationTable table;
      if (r) {
        table = index.row(*r).continuations;
        total = table.total;
      }
      const double denom = static_cast<double>(total) +
                           smoothing.alpha * static_cast<double>(vocab);
      for (TokenId id = 0; id < vocab; ++id) {
        dist.entries[id] = {id, smoothing.alpha / denom};
      }
      if (r) {
        for (std::size_t i = 0; i < table.ids.size(); ++i) {
          dist.entries[table.ids[i]].prob =
              (static_cast<double>(table.counts[i]) + smoothing.alpha) / denom;
        }
      }
      break;
    }
    case SmoothingConfig::Method::interpolation: {
      if (model.stack == nullptr) {
        throw DomainError(
            "conditional_distribution: interpolation needs a model stack");
      }
      const ModelStack& stack = *model.stack;
      const int k = stack.order();
      if (context.size() != static_cast<std::size_t>(k)) {
        throw DomainError(
            "conditional_distribution: context length does not match order");
      }
      std::vector<double> lambdas = smoothing.lambdas;
      if (lambdas.empty()) lambdas = SmoothingConfig::uniform_lambdas(k);
      if (lambdas.size() != static_cast<std::size_t>(k) + 1) {
        throw DomainError("conditional_distribution: expected " +
                          std::to_string(k + 1) + " lambdas");
      }
      const double unigram_weight = lambdas[static_cast<std::size_t>(k)];
      const UnigramTable& unigram = stack.unigram();
      for (TokenId id = 0; id < vocab; ++id) {
        dist.entries[id] = {id, unigram_weight * unigram.prob(id)};
      }
      for (int j = k; j >= 1; --j) {
        const double weight = lambdas[static_cast<std::size_t>(k - j)];
        if (weight == 0.0) continue;
        const KGramIndex& level = stack.index_for_order(j);
        const auto suffix = context.subspan(static_cast<std::size_t>(k - j));
        const auto r = level.find_row(suffix);
        if (!r) continue;
        const auto table = level.row(*r).continuations;
        const double total = static_cast<double>(table.total);
        for (std::size_t i = 0; i < table.ids.size(); ++i) {
          dist.entries[table.ids[i]].prob +=
              weight * static_cast<double>(table.counts[i]) / total;
        }
      }
      break;
    }
    case SmoothingConfig::Method::backoff: {
      if (model.stack == nullptr) {
        throw DomainError(
            "conditional_distribution: backoff needs a model stack");
      }
      std::optional<BackoffScorer> transient;
      if (scorer == nullptr) {
        transient.emplace(*model.stack, smoothing.discount);
        scorer = &*transient;
      }
      for (TokenId id = 0; id < vocab; ++id) {
        dist.entries[id] = {id, scorer->prob(context, id)};
      }
      break;
    }
    case SmoothingConfig::Method::none:
      break;
  }
  return dist;
}

namespace {

TokenId sample_step(const ModelRef& model, std::span<const TokenId> context,
                    const GenerationConfig& config, Rng& rng,
                    BackoffScorer* scorer) {
  check_temperature(config.temperature);
  Distribution dist =
      conditional_distribution(model, context, config.smoothing, scorer);
  if (config.temperature != 1.0) {
    dist = apply_temperature(dist, config.temperature);
  }
  return sample(dist, rng);
}

}  // namespace

TokenId step(const ModelRef& model, std::span<const TokenId> context,
             const GenerationConfig& config, Rng& rng) {
  return sample_step(model, context, config, rng, nullptr);
}

GenerationResult generate(const ModelRef& model, const GenerationConfig& config,
                          std::span<const TokenId> seed, Rng& rng) {
  if (model.index == nullptr) {
    throw DomainError("generate: model reference has no index");
  }
  check_temperature(config.temperature);
  const int k = model.index->order();
  if (seed.size() != static_cast<std::size_t>(k)) {
    throw DomainError("generate: seed length " + std::to_string(seed.size()) +
                      " does not match order " + std::to_string(k));
  }
  config.smoothing.validate(k);

  GenerationResult result;
  result.seed_context.assign(seed.begin(), seed.end());

  std::optional<BackoffScorer> scorer;
  if (config.smoothing.method == SmoothingConfig::Method::backoff &&
      model.stack != nullptr) {
    scorer.emplace(*model.stack, config.smoothing.discount);
  }

  std::vector<TokenId> context(seed.begin(), seed.end());
  result.tokens.reserve(config.length);
  for (std::uint64_t i = 0; i < config.length; ++i) {
    TokenId next;
    try {
      next = sample_step(model, context, config, rng,
                         scorer ? &*scorer : nullptr);
    } catch (const MissingContextError&) {
      result.terminated_early = true;
      break;
    }
    result.tokens.push_back(next);
    context.erase(context.begin());
    context.push_back(next);
  }
  result.steps_taken = result.tokens.size();
  return result;
}

}  // namespace markov
