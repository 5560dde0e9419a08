#include "markov/ngram.hpp"

#include <algorithm>
#include <cstring>
#include <limits>
#include <numeric>
#include <unordered_map>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace markov {

namespace {

std::uint64_t hash_context(std::span<const TokenId> ids) {
  std::uint64_t h = 1469598103934665603ull;
  for (TokenId id : ids) {
    h ^= id;
    h *= 1099511628211ull;
  }
  return h;
}

template <typename Iter, typename Cmp>
void parallel_sort(Iter first, Iter last, Cmp cmp) {
#ifdef _OPENMP
  const std::size_t n = static_cast<std::size_t>(last - first);
  const std::size_t blocks = static_cast<std::size_t>(omp_get_max_threads());
  if (blocks > 1 && n >= (std::size_t{1} << 16)) {
    std::vector<std::size_t> bound(blocks + 1);
    for (std::size_t b = 0; b <= blocks; ++b) bound[b] = n * b / blocks;
#pragma omp parallel for schedule(static)
    for (long long b = 0; b < static_cast<long long>(blocks); ++b) {
      std::sort(first + bound[b], first + bound[b + 1], cmp);
    }
    for (std::size_t width = 1; width < blocks; width *= 2) {
      const std::size_t step = width * 2;
      const long long groups =
          static_cast<long long>((blocks + step - 1) / step);
#pragma omp parallel for schedule(dynamic)
      for (long long g = 0; g < groups; ++g) {
        const std::size_t lo = static_cast<std::size_t>(g) * step;
        const std::size_t mid = std::min(lo + width, blocks);
        const std::size_t hi = std::min(lo + step, blocks);
        if (mid < hi) {
          std::inplace_merge(first + bound[lo], first + bound[mid],
                             first + bound[hi], cmp);
        }
      }
    }
    return;
  }
#endif
  std::sort(first, last, cmp);
}

void check_order(int k) {
  if (k < 1) throw DomainError("KGramIndex: order must be at least 1");
}

struct VecHash {
  std::size_t operator()(const std::vector<TokenId>& v) const {
    return static_cast<std::size_t>(
        hash_context(std::span<const TokenId>(v)));
  }
};

}  // namespace

std::uint64_t ContinuationTable::count_of(TokenId token) const {
  const auto it = std::lower_bound(ids.begin(), ids.end(), token);
  if (it == ids.end() || *it != token) return 0;
  return counts[static_cast<std::size_t>(it - ids.begin())];
}

KGramIndex KGramIndex::build(std::span<const TokenId> tokens, int k,
                             std::uint32_t vocab_size) {
  check_order(k);
  if (tokens.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw DomainError("KGramIndex: stream too long for 32-bit positions");
  }
  KGramIndex idx;
  idx.k_ = k;
  idx.total_tokens_ = tokens.size();
  idx.vocab_size_ = vocab_size;
  idx.row_offset_.push_back(0);
  if (tokens.size() < static_cast<std::size_t>(k) + 1) {
    idx.rebuild_probe();
    return idx;
  }

  const std::size_t windows = tokens.size() - static_cast<std::size_t>(k);
  std::vector<std::uint32_t> pos(windows);
  std::iota(pos.begin(), pos.end(), 0u);
  parallel_sort(pos.begin(), pos.end(),
                [&](std::uint32_t a, std::uint32_t b) {
                  for (int i = 0; i <= k; ++i) {
                    if (tokens[a + i] != tokens[b + i]) {
                      return tokens[a + i] < tokens[b + i];
                    }
                  }
                  return false;
                });

  const auto same_context = [&](std::uint32_t a, std::uint32_t b) {
    for (int i = 0; i < k; ++i) {
      if (tokens[a + i] != tokens[b + i]) return false;
    }
    return true;
  };

  std::size_t i = 0;
  while (i < windows) {
    const std::uint32_t base = pos[i];
    for (int c = 0; c < k; ++c) idx.ctx_ids_.push_back(tokens[base + c]);
    std::uint64_t row_total = 0;
    std::size_t j = i;
    while (j < windows && same_context(pos[j], base)) {
      const TokenId cont = tokens[pos[j] + k];
      std::uint64_t count = 0;
      while (j < windows && same_context(pos[j], base) &&
             tokens[pos[j] + k] == cont) {
        ++count;
        ++j;
      }
      idx.ent_ids_.push_back(cont);
      idx.ent_counts_.push_back(count);
      row_total += count;
    }
    idx.row_total_.push_back(row_total);
    idx.row_offset_.push_back(idx.ent_ids_.size());
    i = j;
  }
  idx.rebuild_probe();
  return idx;
}

KGramIndex KGramIndex::build_serial(std::span<const TokenId> tokens, int k,
                                    std::uint32_t vocab_size) {
  check_order(k);
  KGramIndex idx;
  idx.k_ = k;
  idx.total_tokens_ = tokens.size();
  idx.vocab_size_ = vocab_size;
  idx.row_offset_.push_back(0);
  if (tokens.size() < static_cast<std::size_t>(k) + 1) {
    idx.rebuild_probe();
    return idx;
  }

  std::unordered_map<std::vector<TokenId>,
                     std::unordered_map<TokenId, std::uint64_t>, VecHash>
      counts;
  const std::size_t windows = tokens.size() - static_cast<std::size_t>(k);
  for (std::size_t i = 0; i < windows; ++i) {
    std::vector<TokenId> context(tokens.begin() + i, tokens.begin() + i + k);
    ++counts[std::move(context)][tokens[i + k]];
  }

  std::vector<const std::pair<const std::vector<TokenId>,
                              std::unordered_map<TokenId, std::uint64_t>>*>
      rows;
  rows.reserve(counts.size());
  for (const auto& kv : counts) rows.push_back(&kv);
  std::sort(rows.begin(), rows.end(), [](const auto* a, const auto* b) {
    return std::lexicographical_compare(a->first.begin(), a->first.end(),
                                        b->first.begin(), b->first.end());
  });

  for (const auto* row : rows) {
    idx.ctx_ids_.insert(idx.ctx_ids_.end(), row->first.begin(),
                        row->first.end());
    std::vector<std::pair<TokenId, std::uint64_t>> entries(
        row->second.begin(), row->second.end());
    std::sort(entries.begin(), entries.end());
    std::uint64_t row_total = 0;
    for (const auto& [id, count] : entries) {
      idx.ent_ids_.push_back(id);
      idx.ent_counts_.push_back(count);
      row_total += count;
    }
    idx.row_total_.push_back(row_total);
    idx.row_offset_.push_back(idx.ent_ids_.size());
  }
  idx.rebuild_probe();
  return idx;
}

std::span<const TokenId> KGramIndex::context_at(std::size_t row) const {
  return std::span<const TokenId>(ctx_ids_)
      .subspan(row * static_cast<std::size_t>(k_),
               static_cast<std::size_t>(k_));
}

void KGramIndex::rebuild_probe() {
  const std::size_t rows = row_total_.size();
  std::size_t cap = 8;
  while (cap < rows * 2) cap <<= 1;
  probe_.assign(cap, 0);
  const std::size_t mask = cap - 1;
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t slot = hash_context(context_at(r)) & mask;
    while (probe_[slot] != 0) slot = (slot + 1) & mask;
    probe_[slot] = static_cast<std::uint32_t>(r + 1);
  }
}

std::optional<std::size_t> KGramIndex::find_row(
    std::span<const TokenId> context) const {
  if (context.size() != static_cast<std::size_t>(k_)) {
    throw DomainError("find_row: context length " +
                      std::to_string(context.size()) +
                      " does not match order " + std::to_string(k_));
  }
  if (row_total_.empty()) return std::nullopt;
  const std::size_t mask = probe_.size() - 1;
  std::size_t slot = hash_context(context) & mask;
  while (probe_[slot] != 0) {
    const std::size_t r = probe_[slot] - 1;
    const auto stored = context_at(r);
    if (std::equal(context.begin(), context.end(), stored.begin())) return r;
    slot = (slot + 1) & mask;
  }
  return std::nullopt;
}

RowView KGramIndex::row(std::size_t index) const {
  if (index >= row_total_.size()) {
    throw DomainError("row: index " + std::to_string(index) + " out of range");
  }
  const std::size_t begin = row_offset_[index];
  const std::size_t end = row_offset_[index + 1];
  RowView view;
  view.context = context_at(index);
  view.continuations.ids =
      std::span<const TokenId>(ent_ids_).subspan(begin, end - begin);
  view.continuations.counts =
      std::span<const std::uint64_t>(ent_counts_).subspan(begin, end - begin);
  view.continuations.total = row_total_[index];
  return view;
}

std::uint64_t KGramIndex::pair_count(std::span<const TokenId> context,
                                     TokenId token) const {
  const auto r = find_row(context);
  if (!r) return 0;
  return row(*r).continuations.count_of(token);
}

bool KGramIndex::operator==(const KGramIndex& other) const {
  return k_ == other.k_ && total_tokens_ == other.total_tokens_ &&
         vocab_size_ == other.vocab_size_ && ctx_ids_ == other.ctx_ids_ &&
         row_total_ == other.row_total_ && row_offset_ == other.row_offset_ &&
         ent_ids_ == other.ent_ids_ && ent_counts_ == other.ent_counts_;
}

KGramIndexBuilder::KGramIndexBuilder(int k, std::uint64_t total_tokens,
                                     std::uint32_t vocab_size) {
  check_order(k);
  index_.k_ = k;
  index_.total_tokens_ = total_tokens;
  index_.vocab_size_ = vocab_size;
  index_.row_offset_.push_back(0);
}

void KGramIndexBuilder::add_row(std::span<const TokenId> context,
                                std::span<const TokenId> continuation_ids,
                                std::span<const std::uint64_t> continuation_counts) {
  if (finished_) throw DomainError("add_row: builder already finished");
  if (context.size() != static_cast<std::size_t>(index_.k_)) {
    throw FormatError("add_row: context length " +
                      std::to_string(context.size()) +
                      " does not match order " + std::to_string(index_.k_));
  }
  if (continuation_ids.empty() ||
      continuation_ids.size() != continuation_counts.size()) {
    throw FormatError("add_row: malformed continuation list");
  }
  for (TokenId id : context) {
    if (id >= index_.vocab_size_) {
      throw FormatError("add_row: context token id " + std::to_string(id) +
                        " out of range");
    }
  }
  if (!index_.row_total_.empty()) {
    const auto prev = index_.context_at(index_.row_total_.size() - 1);
    if (!std::lexicographical_compare(prev.begin(), prev.end(),
                                      context.begin(), context.end())) {
      throw FormatError("add_row: contexts out of order");
    }
  }
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < continuation_ids.size(); ++i) {
    if (continuation_ids[i] >= index_.vocab_size_) {
      throw FormatError("add_row: continuation token id " +
                        std::to_string(continuation_ids[i]) + " out of range");
    }
    if (i > 0 && continuation_ids[i] <= continuation_ids[i - 1]) {
      throw FormatError("add_row: continuation ids out of order");
    }
    if (continuation_counts[i] == 0) {
      throw FormatError("add_row: zero continuation count");
    }
    total += continuation_counts[i];
  }
  index_.ctx_ids_.insert(index_.ctx_ids_.end(), context.begin(), context.end());
  index_.ent_ids_.insert(index_.ent_ids_.end(), continuation_ids.begin(),
                         continuation_ids.end());
  index_.ent_counts_.insert(index_.ent_counts_.end(),
                            continuation_counts.begin(),
                            continuation_counts.end());
  index_.row_total_.push_back(total);
  index_.row_offset_.push_back(index_.ent_ids_.size());
}

KGramIndex KGramIndexBuilder::finish() {
  if (finished_) throw DomainError("finish: builder already finished");
  finished_ = true;
  index_.rebuild_probe();
  return std::move(index_);
}

std::vector<ContinuationEntry> continuations(const KGramIndex& index,
                                             std::span<const TokenId> context) {
  const auto r = index.find_row(context);
  if (!r) {
    throw MissingContextError("continuations: context never observed");
  }
  const RowView view = index.row(*r);
  std::vector<ContinuationEntry> out;
  out.reserve(view.continuations.distinct());
  const double total = static_cast<double>(view.continuations.total);
  for (std::size_t i = 0; i < view.continuations.ids.size(); ++i) {
    out.push_back({view.continuations.ids[i], view.continuations.counts[i],
                   static_cast<double>(view.continuations.counts[i]) / total});
  }
  std::sort(out.begin(), out.end(),
            [](const ContinuationEntry& a, const ContinuationEntry& b) {
              if (a.count != b.count) return a.count > b.count;
              return a.id < b.id;
            });
  return out;
}

double mle_prob(const KGramIndex& index, std::span<const TokenId> context,
                TokenId token) {
  const auto r = index.find_row(context);
  if (!r) {
    throw MissingContextError("mle_prob: context never observed");
  }
  const RowView view = index.row(*r);
  return static_cast<double>(view.continuations.count_of(token)) /
         static_cast<double>(view.continuations.total);
}

}  // namespace markov
