#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "markov/corpus.hpp"

namespace testsupport {

// context -> (continuation -> count), rebuilt by naive re-scanning so it
// shares no code with the library's index.
using ContextMap =
    std::map<std::vector<markov::TokenId>, std::map<markov::TokenId, std::uint64_t>>;

ContextMap oracle_count_windows(std::span<const markov::TokenId> tokens, int k);

// Longest common contiguous run, O(|a|*|b|) dynamic programming.
std::size_t oracle_longest_run(std::span<const markov::TokenId> a,
                               std::span<const markov::TokenId> b);

struct OracleExhaustion {
  double unique_fraction = 0.0;
  double mean_branching = 0.0;
  std::uint64_t contexts = 0;
};

OracleExhaustion oracle_exhaustion(const ContextMap& map);

}  // namespace testsupport
