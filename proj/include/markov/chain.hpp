#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "markov/distribution.hpp"
#include "markov/errors.hpp"
#include "markov/rng.hpp"

namespace markov {

using StateId = std::uint32_t;

struct HistoryLess {
  using is_transparent = void;
  bool operator()(std::span<const StateId> a, std::span<const StateId> b) const {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
  }
};

// Explicit order-k transition table over a named finite state set: one
// probability row per length-k history. Histories with no row are simply
// absent (queries raise MissingContextError), which keeps sparse tables
// cheap.
class TransitionTable {
 public:
  using RowMap = std::map<std::vector<StateId>, Distribution, HistoryLess>;

  TransitionTable(int order, std::vector<std::string> states);

  int order() const { return order_; }
  const std::vector<std::string>& states() const { return states_; }
  std::optional<StateId> state_id(std::string_view name) const;

  // Replaces any existing row. Throws DomainError if the history length is
  // not `order` or any id is out of range. Entries are sorted by id on the
  // way in; probability checks are validate()'s job, not set_row's.
  void set_row(std::vector<StateId> history, Distribution dist);

  const Distribution* find_row(std::span<const StateId> history) const;
  const RowMap& rows() const { return rows_; }

 private:
  int order_;
  std::vector<std::string> states_;
  RowMap rows_;
};

struct RowViolation {
  std::vector<StateId> history;
  std::string message;
};

struct ValidationReport {
  bool ok = true;
  std::vector<RowViolation> violations;
};

// Checks every row: probabilities in (0, 1], no zero entries, sum within
// 1e-9 of 1. Returns a report instead of throwing so callers can show all
// problems at once.
ValidationReport validate(const TransitionTable& table);

// Throws MissingContextError for an absent history, DomainError for a
// malformed one.
Distribution next_distribution(const TransitionTable& table,
                               std::span<const StateId> history);
// Convenience overload resolving state names first.
Distribution next_distribution(const TransitionTable& table,
                               std::span<const std::string> history);

// Walks n steps from the initial history, drawing each step by inverse CDF
// from the current row. Returns only the generated states. Throws
// MissingContextError (with the step position) when the walk reaches a
// history that has no row.
std::vector<StateId> sample_sequence(const TransitionTable& table,
                                     std::span<const StateId> initial,
                                     std::size_t n, Rng& rng);

// Maximum-likelihood estimate from an observed state sequence: row
// probabilities are windowed transition counts divided by the history's
// total. Throws InsufficientDataError when the sequence has no length-(k+1)
// window.
TransitionTable estimate_from_history(std::span<const StateId> sequence,
                                      std::vector<std::string> states, int k);
// Convenience overload: builds the state set from the sequence itself, ids
// in first-occurrence order.
TransitionTable estimate_from_history(std::span<const std::string> sequence,
                                      int k);

// Line-oriented text serialization. Probabilities are written with
// shortest-round-trip formatting, so save -> load -> save is byte-stable.
void save_table(const TransitionTable& table, std::ostream& out);
// Throws FormatError on malformed input.
TransitionTable load_table(std::istream& in);

}  // namespace markov
