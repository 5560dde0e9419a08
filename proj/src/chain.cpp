#include "markov/chain.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "markov/corpus.hpp"
#include "text_format.hpp"

namespace markov {

namespace {

std::string history_to_string(std::span<const StateId> history) {
  std::string s;
  for (std::size_t i = 0; i < history.size(); ++i) {
    if (i > 0) s += ' ';
    s += std::to_string(history[i]);
  }
  return s;
}

}  // namespace

TransitionTable::TransitionTable(int order, std::vector<std::string> states)
    : order_(order), states_(std::move(states)) {
  if (order_ < 1) {
    throw DomainError("TransitionTable: order must be at least 1");
  }
  if (states_.empty()) {
    throw DomainError("TransitionTable: state set is empty");
  }
  std::unordered_set<std::string_view> seen;
  for (const auto& s : states_) {
    if (!seen.insert(s).second) {
      throw DomainError("TransitionTable: duplicate state name '" + s + "'");
    }
  }
}

std::optional<StateId> TransitionTable::state_id(std::string_view name) const {
  for (std::size_t i = 0; i < states_.size(); ++i) {
    if (states_[i] == name) return static_cast<StateId>(i);
  }
  return std::nullopt;
}

void TransitionTable::set_row(std::vector<StateId> history, Distribution dist) {
  if (history.size() != static_cast<std::size_t>(order_)) {
    throw DomainError("set_row: history length " +
                      std::to_string(history.size()) + " does not match order " +
                      std::to_string(order_));
  }
  for (StateId id : history) {
    if (id >= states_.size()) {
      throw DomainError("set_row: history state id " + std::to_string(id) +
                        " out of range");
    }
  }
  std::sort(dist.entries.begin(), dist.entries.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < dist.entries.size(); ++i) {
    if (dist.entries[i].id >= states_.size()) {
      throw DomainError("set_row: entry state id " +
                        std::to_string(dist.entries[i].id) + " out of range");
    }
    if (i > 0 && dist.entries[i].id == dist.entries[i - 1].id) {
      throw DomainError("set_row: duplicate entry for state id " +
                        std::to_string(dist.entries[i].id));
    }
  }
  rows_[std::move(history)] = std::move(dist);
}

const Distribution* TransitionTable::find_row(
    std::span<const StateId> history) const {
  auto it = rows_.find(history);
  return it == rows_.end() ? nullptr : &it->second;
}

ValidationReport validate(const TransitionTable& table) {
  ValidationReport report;
  const auto flag = [&](const std::vector<StateId>& history, std::string msg) {
    report.ok = false;
    report.violations.push_back({history, std::move(msg)});
  };
  for (const auto& [history, dist] : table.rows()) {
    if (dist.entries.empty()) {
      flag(history, "row has no entries");
      continue;
    }
    double sum = 0.0;
    for (const auto& e : dist.entries) {
      if (e.prob <= 0.0) {
        flag(history, "state id " + std::to_string(e.id) +
                          " has non-positive probability " +
                          textfmt::format_double(e.prob));
      } else if (e.prob > 1.0) {
        flag(history, "state id " + std::to_string(e.id) +
                          " has probability above 1: " +
                          textfmt::format_double(e.prob));
      }
      sum += e.prob;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
      flag(history, "row sums to " + textfmt::format_double(sum));
    }
  }
  return report;
}

Distribution next_distribution(const TransitionTable& table,
                               std::span<const StateId> history) {
  if (history.size() != static_cast<std::size_t>(table.order())) {
    throw DomainError("next_distribution: history length " +
                      std::to_string(history.size()) +
                      " does not match order " + std::to_string(table.order()));
  }
  for (StateId id : history) {
    if (id >= table.states().size()) {
      throw DomainError("next_distribution: state id " + std::to_string(id) +
                        " out of range");
    }
  }
  const Distribution* row = table.find_row(history);
  if (row == nullptr) {
    throw MissingContextError("next_distribution: no row for history [" +
                              history_to_string(history) + "]");
  }
  return *row;
}

Distribution next_distribution(const TransitionTable& table,
                               std::span<const std::string> history) {
  std::vector<StateId> ids;
  ids.reserve(history.size());
  for (const auto& name : history) {
    auto id = table.state_id(name);
    if (!id) {
      throw DomainError("next_distribution: unknown state '" + name + "'");
    }
    ids.push_back(*id);
  }
  return next_distribution(table, ids);
}

std::vector<StateId> sample_sequence(const TransitionTable& table,
                                     std::span<const StateId> initial,
                                     std::size_t n, Rng& rng) {
  if (initial.size() != static_cast<std::size_t>(table.order())) {
    throw DomainError("sample_sequence: initial history length " +
                      std::to_string(initial.size()) +
                      " does not match order " + std::to_string(table.order()));
  }
  for (StateId id : initial) {
    if (id >= table.states().size()) {
      throw DomainError("sample_sequence: state id " + std::to_string(id) +
                        " out of range");
    }
  }
  std::vector<StateId> history(initial.begin(), initial.end());
  std::vector<StateId> out;
  out.reserve(n);
  for (std::size_t step = 0; step < n; ++step) {
    const Distribution* row = table.find_row(history);
    if (row == nullptr) {
      throw MissingContextError(
          "sample_sequence: no row for history [" +
              history_to_string(history) + "] at step " + std::to_string(step),
          step);
    }
    const StateId next = sample(*row, rng);
    out.push_back(next);
    history.erase(history.begin());
    history.push_back(next);
  }
  return out;
}

TransitionTable estimate_from_history(std::span<const StateId> sequence,
                                      std::vector<std::string> states, int k) {
  if (k < 1) throw DomainError("estimate_from_history: k must be at least 1");
  TransitionTable table(k, std::move(states));
  for (StateId id : sequence) {
    if (id >= table.states().size()) {
      throw DomainError("estimate_from_history: state id " +
                        std::to_string(id) + " out of range");
    }
  }
  if (sequence.size() < static_cast<std::size_t>(k) + 1) {
    throw InsufficientDataError(
        "estimate_from_history: sequence of length " +
        std::to_string(sequence.size()) + " has no length-" +
        std::to_string(k + 1) + " window");
  }

  std::map<std::vector<StateId>, std::map<StateId, std::uint64_t>, HistoryLess>
      counts;
  for (std::size_t i = 0; i + k < sequence.size(); ++i) {
    std::vector<StateId> history(sequence.begin() + i, sequence.begin() + i + k);
    ++counts[std::move(history)][sequence[i + k]];
  }
  for (auto& [history, nexts] : counts) {
    std::uint64_t total = 0;
    for (const auto& [state, count] : nexts) total += count;
    Distribution dist;
    dist.entries.reserve(nexts.size());
    for (const auto& [state, count] : nexts) {
      dist.entries.push_back(
          {state, static_cast<double>(count) / static_cast<double>(total)});
    }
    table.set_row(history, std::move(dist));
  }
  return table;
}

TransitionTable estimate_from_history(std::span<const std::string> sequence,
                                      int k) {
  Vocabulary names;
  std::vector<StateId> ids;
  ids.reserve(sequence.size());
  for (const auto& name : sequence) ids.push_back(names.add(name));
  std::vector<std::string> states;
  states.reserve(names.size());
  for (StateId i = 0; i < names.size(); ++i) states.push_back(names.surface_of(i));
  return estimate_from_history(std::span<const StateId>(ids), std::move(states), k);
}

void save_table(const TransitionTable& table, std::ostream& out) {
  out << "MARKOVCHAIN v1\n";
  out << "k=" << table.order() << '\n';
  out << "states " << table.states().size() << '\n';
  for (const auto& name : table.states()) {
    out << escape_surface(name) << '\n';
  }
  out << "rows " << table.rows().size() << '\n';
  for (const auto& [history, dist] : table.rows()) {
    for (std::size_t i = 0; i < history.size(); ++i) {
      if (i > 0) out << ' ';
      out << history[i];
    }
    out << '\t';
    for (std::size_t i = 0; i < dist.entries.size(); ++i) {
      if (i > 0) out << ' ';
      out << dist.entries[i].id << ':'
          << textfmt::format_double(dist.entries[i].prob);
    }
    out << '\n';
  }
}

namespace {

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::string next(const char* what) {
    std::string line;
    if (!std::getline(in_, line)) {
      throw FormatError(std::string("unexpected end of file, expected ") +
                        what);
    }
    ++number_;
    return line;
  }

  std::size_t number() const { return number_; }

  bool at_end() {
    return in_.peek() == std::char_traits<char>::eof();
  }

 private:
  std::istream& in_;
  std::size_t number_ = 0;
};

}  // namespace

TransitionTable load_table(std::istream& in) {
  LineReader reader(in);
  if (reader.next("magic line") != "MARKOVCHAIN v1") {
    throw FormatError("line 1: expected 'MARKOVCHAIN v1'");
  }
  std::string line = reader.next("k=<order>");
  std::string_view view = line;
  if (!textfmt::consume_prefix(view, "k=")) {
    throw FormatError("line 2: expected 'k=<order>'");
  }
  const std::uint64_t order = textfmt::parse_u64(view);
  if (order < 1 || order > 64) {
    throw FormatError("line 2: order " + std::to_string(order) +
                      " out of range");
  }

  line = reader.next("states <count>");
  view = line;
  if (!textfmt::consume_prefix(view, "states ")) {
    throw FormatError("line 3: expected 'states <count>'");
  }
  const std::uint64_t num_states = textfmt::parse_u64(view);
  if (num_states == 0) throw FormatError("line 3: state count is zero");
  std::vector<std::string> states;
  states.reserve(num_states);
  for (std::uint64_t i = 0; i < num_states; ++i) {
    states.push_back(unescape_surface(reader.next("state name")));
  }

  line = reader.next("rows <count>");
  view = line;
  if (!textfmt::consume_prefix(view, "rows ")) {
    throw FormatError("line " + std::to_string(reader.number()) +
                      ": expected 'rows <count>'");
  }
  const std::uint64_t num_rows = textfmt::parse_u64(view);

  TransitionTable table(static_cast<int>(order), std::move(states));
  for (std::uint64_t r = 0; r < num_rows; ++r) {
    line = reader.next("row");
    const std::size_t line_no = reader.number();
    const auto fail = [&](const std::string& msg) -> FormatError {
      return FormatError("line " + std::to_string(line_no) + ": " + msg);
    };
    const auto fields = textfmt::split(line, '\t');
    if (fields.size() != 2) throw fail("expected '<history>\\t<entries>'");
    std::vector<StateId> history;
    for (const auto& part : textfmt::split(fields[0], ' ')) {
      history.push_back(static_cast<StateId>(textfmt::parse_u64(part)));
    }
    Distribution dist;
    for (const auto& part : textfmt::split(fields[1], ' ')) {
      const auto colon = part.find(':');
      if (colon == std::string_view::npos) {
        throw fail("expected 'id:probability' entry");
      }
      dist.entries.push_back(
          {static_cast<StateId>(textfmt::parse_u64(part.substr(0, colon))),
           textfmt::parse_double(part.substr(colon + 1))});
    }
    if (table.find_row(history) != nullptr) throw fail("duplicate row");
    try {
      table.set_row(std::move(history), std::move(dist));
    } catch (const DomainError& e) {
      throw fail(e.what());
    }
  }
  if (!reader.at_end()) {
    throw FormatError("trailing content after " + std::to_string(num_rows) +
                      " rows");
  }
  return table;
}

}  // namespace markov
