#pragma once

#include <cstdint>
#include <vector>

#include "markov/errors.hpp"
#include "markov/rng.hpp"

namespace markov {

// Categorical distribution over integer ids. Entries are kept sorted
// ascending by id and probabilities sum to 1 within 1e-9. Zero-probability
// entries appear only in smoothed distributions that span a full vocabulary.
struct Distribution {
  struct Entry {
    std::uint32_t id;
    double prob;
  };

  std::vector<Entry> entries;

  bool empty() const { return entries.empty(); }
};

// Inverse-CDF draw consuming exactly one uniform variate. Entries are
// scanned in id order; the final entry absorbs floating-point slack, so a
// u arbitrarily close to 1 still yields a valid id.
inline std::uint32_t sample(const Distribution& dist, Rng& rng) {
  if (dist.entries.empty()) {
    throw DomainError("sample: empty distribution");
  }
  const double u = rng.next_unit();
  double cum = 0.0;
  for (const auto& e : dist.entries) {
    cum += e.prob;
    if (u < cum) return e.id;
  }
  // Rounding slack pushed u past the accumulated sum; return the last
  // entry that actually has mass.
  for (auto it = dist.entries.rbegin(); it != dist.entries.rend(); ++it) {
    if (it->prob > 0.0) return it->id;
  }
  return dist.entries.back().id;
}

}  // namespace markov
