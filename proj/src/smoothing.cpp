#include "markov/smoothing.hpp"

#include <cmath>
#include <string>

namespace markov {

void SmoothingConfig::validate(int order) const {
  switch (method) {
    case Method::none:
      return;
    case Method::add_alpha:
      if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
        throw DomainError("smoothing: alpha must be finite and >= 0");
      }
      return;
    case Method::interpolation: {
      if (lambdas.empty()) return;
      if (lambdas.size() != static_cast<std::size_t>(order) + 1) {
        throw DomainError("smoothing: expected " + std::to_string(order + 1) +
                          " lambdas, got " + std::to_string(lambdas.size()));
      }
      double sum = 0.0;
      for (double l : lambdas) {
        if (!(l >= 0.0) || !std::isfinite(l)) {
          throw DomainError("smoothing: lambdas must be finite and >= 0");
        }
        sum += l;
      }
      if (std::abs(sum - 1.0) > 1e-9) {
        throw DomainError("smoothing: lambdas sum to " + std::to_string(sum) +
                          ", expected 1");
      }
      return;
    }
    case Method::backoff:
      if (!(discount >= 0.0) || !(discount < 1.0)) {
        throw DomainError("smoothing: discount must lie in [0, 1)");
      }
      return;
  }
  throw DomainError("smoothing: unknown method");
}

std::vector<double> SmoothingConfig::uniform_lambdas(int order) {
  if (order < 1) throw DomainError("uniform_lambdas: order must be positive");
  return std::vector<double>(static_cast<std::size_t>(order) + 1,
                             1.0 / (static_cast<double>(order) + 1.0));
}

double UnigramTable::prob(TokenId id) const {
  if (id >= counts.size()) {
    throw DomainError("unigram: token id " + std::to_string(id) +
                      " out of range");
  }
  if (total == 0) return 0.0;
  return static_cast<double>(counts[id]) / static_cast<double>(total);
}

UnigramTable count_unigrams(std::span<const TokenId> tokens,
                            std::uint32_t vocab_size) {
  UnigramTable table;
  table.counts.assign(vocab_size, 0);
  for (TokenId id : tokens) {
    if (id >= vocab_size) {
      throw DomainError("count_unigrams: token id " + std::to_string(id) +
                        " out of range");
    }
    ++table.counts[id];
  }
  table.total = tokens.size();
  return table;
}

ModelStack ModelStack::build(std::span<const TokenId> tokens, int k,
                             std::uint32_t vocab_size) {
  if (k < 1) throw DomainError("ModelStack: order must be at least 1");
  ModelStack stack;
  stack.indices_.reserve(static_cast<std::size_t>(k));
  for (int j = k; j >= 1; --j) {
    stack.indices_.push_back(KGramIndex::build(tokens, j, vocab_size));
  }
  stack.unigram_ = count_unigrams(tokens, vocab_size);
  stack.unigram_sized_vocab_ = vocab_size;
  return stack;
}

const KGramIndex& ModelStack::index_for_order(int j) const {
  if (j < 1 || j > order()) {
    throw DomainError("index_for_order: order " + std::to_string(j) +
                      " outside [1, " + std::to_string(order()) + "]");
  }
  return indices_[static_cast<std::size_t>(order() - j)];
}

double add_alpha_prob(const KGramIndex& index, std::span<const TokenId> context,
                      TokenId token, double alpha, std::uint32_t vocab_size) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw DomainError("add_alpha_prob: alpha must be finite and >= 0");
  }
  if (token >= vocab_size) {
    throw DomainError("add_alpha_prob: token id out of range");
  }
  const auto r = index.find_row(context);
  if (alpha == 0.0) {
    if (!r) {
      throw MissingContextError("add_alpha_prob: context never observed");
    }
    const auto table = index.row(*r).continuations;
    return static_cast<double>(table.count_of(token)) /
           static_cast<double>(table.total);
  }
  std::uint64_t count = 0;
  std::uint64_t total = 0;
  if (r) {
    const auto table = index.row(*r).continuations;
    count = table.count_of(token);
    total = table.total;
  }
  return (static_cast<double>(count) + alpha) /
         (static_cast<double>(total) + alpha * static_cast<double>(vocab_size));
}

double interpolated_prob(const ModelStack& stack,
                         std::span<const double> lambdas,
                         std::span<const TokenId> context, TokenId token) {
  const int k = stack.order();
  if (context.size() != static_cast<std::size_t>(k)) {
    throw DomainError("interpolated_prob: context length does not match order");
  }
  std::vector<double> uniform;
  if (lambdas.empty()) {
    uniform = SmoothingConfig::uniform_lambdas(k);
    lambdas = uniform;
  }
  if (lambdas.size() != static_cast<std::size_t>(k) + 1) {
    throw DomainError("interpolated_prob: expected " + std::to_string(k + 1) +
                      " lambdas");
  }
  double p = lambdas[static_cast<std::size_t>(k)] * stack.unigram().prob(token);
  for (int j = k; j >= 1; --j) {
    const double weight = lambdas[static_cast<std::size_t>(k - j)];
    if (weight == 0.0) continue;
    const KGramIndex& index = stack.index_for_order(j);
    const auto suffix = context.subspan(static_cast<std::size_t>(k - j));
    const auto r = index.find_row(suffix);
    if (!r) continue;
    const auto table = index.row(*r).continuations;
    p += weight * static_cast<double>(table.count_of(token)) /
         static_cast<double>(table.total);
  }
  return p;
}

BackoffScorer::BackoffScorer(const ModelStack& stack, double discount)
    : stack_(&stack), discount_(discount) {
  if (!(discount >= 0.0) || !(discount < 1.0)) {
    throw DomainError("BackoffScorer: discount must lie in [0, 1)");
  }
}

double BackoffScorer::prob(std::span<const TokenId> context, TokenId token) {
  if (context.size() != static_cast<std::size_t>(stack_->order())) {
    throw DomainError("backoff: context length does not match order");
  }
  if (token >= stack_->vocab_size()) {
    throw DomainError("backoff: token id out of range");
  }
  return level_prob(stack_->order(), context, token);
}

double BackoffScorer::level_prob(int order, std::span<const TokenId> context,
                                 TokenId token) {
  if (order == 0) return stack_->unigram().prob(token);
  const KGramIndex& index = stack_->index_for_order(order);
  const auto r = index.find_row(context);
  if (!r) {
    return level_prob(order - 1, context.subspan(1), token);
  }
  const RowView view = index.row(*r);
  const auto& table = view.continuations;
  const double total = static_cast<double>(table.total);
  // A context whose continuations already cover the whole vocabulary has no
  // unseen token to receive reserved mass; discounting would just leak
  // probability, so such rows keep their plain MLE.
  if (table.distinct() >= index.vocab_size()) {
    return static_cast<double>(table.count_of(token)) / total;
  }
  const std::uint64_t count = table.count_of(token);
  if (count > 0) {
    return (static_cast<double>(count) - discount_) / total;
  }
  const double scale = reserved_scale(order, *r);
  return scale * level_prob(order - 1, context.subspan(1), token);
}

double BackoffScorer::reserved_scale(int order, std::size_t row_index) {
  const std::uint64_t key =
      (static_cast<std::uint64_t>(order) << 48) | row_index;
  const auto cached = scale_cache_.find(key);
  if (cached != scale_cache_.end()) return cached->second;

  const KGramIndex& index = stack_->index_for_order(order);
  const RowView view = index.row(row_index);
  const auto& table = view.continuations;
  const double reserved = discount_ * static_cast<double>(table.distinct()) /
                          static_cast<double>(table.total);
  const auto suffix = view.context.subspan(1);
  double seen_mass = 0.0;
  for (TokenId id : table.ids) {
    seen_mass += level_prob(order - 1, suffix, id);
  }
  const double unseen_mass = 1.0 - seen_mass;
  const double scale = unseen_mass > 1e-12 ? reserved / unseen_mass : 0.0;
  scale_cache_.emplace(key, scale);
  return scale;
}

double backoff_prob(const ModelStack& stack, std::span<const TokenId> context,
                    TokenId token, double discount) {
  BackoffScorer scorer(stack, discount);
  return scorer.prob(context, token);
}

double smoothed_prob(const ModelRef& ref, const SmoothingConfig& smoothing,
                     std::span<const TokenId> context, TokenId token,
                     BackoffScorer* scorer) {
  if (ref.index == nullptr) {
    throw DomainError("smoothed_prob: model reference has no index");
  }
  switch (smoothing.method) {
    case SmoothingConfig::Method::none:
      return mle_prob(*ref.index, context, token);
    case SmoothingConfig::Method::add_alpha:
      return add_alpha_prob(*ref.index, context, token, smoothing.alpha,
                            ref.index->vocab_size());
    case SmoothingConfig::Method::interpolation:
      if (ref.stack == nullptr) {
        throw DomainError("smoothed_prob: interpolation needs a model stack");
      }
      return interpolated_prob(*ref.stack, smoothing.lambdas, context, token);
    case SmoothingConfig::Method::backoff: {
      if (ref.stack == nullptr) {
        throw DomainError("smoothed_prob: backoff needs a model stack");
      }
      if (scorer != nullptr) return scorer->prob(context, token);
      BackoffScorer transient(*ref.stack, smoothing.discount);
      return transient.prob(context, token);
    }
  }
  throw DomainError("smoothed_prob: unknown smoothing method");
}

}  // namespace markov
