// Acceptance gate: one line per criterion, PASS/FAIL/SKIP, nonzero exit on
// any FAIL. Heavier corpus-scale checks live here rather than in the unit
// suite so the latter stays fast.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "markov/analyze.hpp"
#include "markov/chain.hpp"
#include "markov/generate.hpp"
#include "markov/model_io.hpp"
#include "markov/ngram.hpp"
#include "markov/smoothing.hpp"
#include "support/oracles.hpp"
#include "support/textgen.hpp"

using namespace markov;

namespace {

struct Options {
  std::string cli;
  std::string workdir = ".";
  std::string data_dir = TEST_DATA_DIR;
};

struct Outcome {
  bool pass = true;
  bool skipped = false;
  std::string detail;
};

struct Check {
  int id;
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

// -------- shared corpus (criteria 3, 4, 8) --------

const std::vector<TokenId>& big_corpus(std::uint32_t& vocab_out) {
  static std::vector<TokenId> ids;
  static std::uint32_t vocab = 0;
  if (ids.empty()) {
    const std::string text = testsupport::synthetic_text(1000000, 20260816);
    const auto surfaces = tokenize_words(text, TokenizerConfig{});
    const Vocabulary v = build_vocab(surfaces);
    ids = v.encode(surfaces);
    vocab = v.size();
  }
  vocab_out = vocab;
  return ids;
}

// -------- criterion 1: weather table fidelity --------

Outcome check_weather_table(const Options& options) {
  std::ifstream in(options.data_dir + "/weather.chain");
  if (!in) return {false, false, "fixture weather.chain not found"};
  const TransitionTable table = load_table(in);

  const ValidationReport report = validate(table);
  if (!report.ok) return {false, false, "table failed validation"};
  if (table.rows().size() != 9) return {false, false, "expected nine rows"};

  const Distribution row = next_distribution(
      table, std::vector<std::string>{"nublado", "lluvioso"});
  if (row.entries.size() != 3 || row.entries[0].prob != 0.2 ||
      row.entries[1].prob != 0.4 || row.entries[2].prob != 0.4) {
    return {false, false, "row (nublado, lluvioso) is not (0.2, 0.4, 0.4)"};
  }

  Rng rng(1);
  std::array<std::uint64_t, 3> hits = {0, 0, 0};
  constexpr int kDraws = 100000;
  const std::vector<StateId> history = {1, 2};
  for (int i = 0; i < kDraws; ++i) {
    hits[sample_sequence(table, history, 1, rng)[0]] += 1;
  }
  double worst = 0.0;
  const std::array<double, 3> expected = {0.2, 0.4, 0.4};
  for (int s = 0; s < 3; ++s) {
    worst = std::max(worst,
                     std::abs(hits[s] / double(kDraws) - expected[s]));
  }
  if (worst >= 0.01) {
    return {false, false, "empirical deviation " + fmt(worst) + " >= 0.01"};
  }
  return {true, false,
          "nine rows validated; largest sampling deviation " + fmt(worst)};
}

// -------- criterion 2: MLE oracle equivalence --------

Outcome check_mle_oracle() {
  std::uint64_t contexts_checked = 0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    testsupport::SplitMix mix(trial * 7919 + 13);
    const std::uint32_t vocab = 2 + static_cast<std::uint32_t>(mix.below(19));
    const std::size_t length = 50 + mix.below(951);
    const auto tokens = testsupport::random_ids(length, vocab, trial + 1000);
    for (int k : {1, 2, 3}) {
      const KGramIndex index = KGramIndex::build(tokens, k, vocab);
      const auto oracle = testsupport::oracle_count_windows(tokens, k);
      if (index.row_count() != oracle.size()) {
        return {false, false, "row count mismatch on trial " +
                                  std::to_string(trial)};
      }
      for (const auto& [context, continuations] : oracle) {
        std::uint64_t total = 0;
        for (const auto& [token, count] : continuations) total += count;
        for (const auto& [token, count] : continuations) {
          if (index.pair_count(context, token) != count) {
            return {false, false, "count mismatch on trial " +
                                      std::to_string(trial)};
          }
          const double expected =
              static_cast<double>(count) / static_cast<double>(total);
          if (mle_prob(index, context, token) != expected) {
            return {false, false, "probability mismatch on trial " +
                                      std::to_string(trial)};
          }
        }
        ++contexts_checked;
      }
    }
  }
  return {true, false, "100 corpora, k in {1,2,3}, " +
                           std::to_string(contexts_checked) +
                           " contexts equal the re-scan oracle exactly"};
}

// -------- criterion 3: coverage invariant --------

Outcome check_coverage() {
  std::uint32_t vocab = 0;
  const auto& full = big_corpus(vocab);
  const std::vector<TokenId> corpus(full.begin(), full.begin() + 120000);

  for (int k : {1, 2, 3}) {
    const KGramIndex index = KGramIndex::build(corpus, k, vocab);
    GenerationConfig config;
    config.length = 1000;
    for (std::uint64_t run = 0; run < 20; ++run) {
      Rng rng(run * 31 + k);
      const auto seed = pick_seed(corpus, k, rng);
      const auto result = generate(model_ref(index), config, seed, rng);
      std::vector<TokenId> text = result.seed_context;
      text.insert(text.end(), result.tokens.begin(), result.tokens.end());
      const double coverage = coverage_check(text, index);
      if (coverage != 1.0) {
        return {false, false,
                "coverage " + fmt(coverage) + " at k=" + std::to_string(k) +
                    " run " + std::to_string(run)};
      }
    }
  }
  return {true, false,
          "120k-token corpus, k in {1,2,3}, 20 runs of 1000 tokens each: "
          "coverage exactly 1.0 every time"};
}

// -------- criterion 4: memorization at high k --------

Outcome check_memorization() {
  std::uint32_t vocab = 0;
  const auto& corpus = big_corpus(vocab);

  const KGramIndex index10 = KGramIndex::build(corpus, 10, vocab);
  const ExhaustionStats stats = exhaustion_stats(index10);
  const std::string measured =
      "unique_continuation_fraction(k=10) = " +
      fmt(stats.unique_continuation_fraction);
  if (stats.unique_continuation_fraction < 0.99) {
    return {false, false, measured + " < 0.99"};
  }

  const LongestMatcher matcher(corpus);
  const auto mean_ratio = [&](int k, const KGramIndex& index,
                              int* high_count) {
    GenerationConfig config;
    config.length = 50;
    double sum = 0.0;
    int runs = 0;
    for (std::uint64_t run = 0; run < 100; ++run) {
      Rng rng(9000 + run);
      const auto seed = pick_seed(corpus, k, rng);
      const auto result = generate(model_ref(index), config, seed, rng);
      if (result.tokens.empty()) continue;
      std::vector<TokenId> text = result.seed_context;
      text.insert(text.end(), result.tokens.begin(), result.tokens.end());
      const std::size_t copy = matcher.longest_copy(text);
      const double excess =
          copy > static_cast<std::size_t>(k)
              ? static_cast<double>(copy - static_cast<std::size_t>(k))
              : 0.0;
      const double ratio =
          std::min(excess / static_cast<double>(result.tokens.size()), 1.0);
      sum += ratio;
      ++runs;
      if (high_count != nullptr && ratio >= 0.9) ++*high_count;
    }
    return runs > 0 ? sum / runs : 0.0;
  };

  int high = 0;
  const double mean10 = mean_ratio(10, index10, &high);
  if (high < 95) {
    return {false, false,
            measured + "; only " + std::to_string(high) +
                "/100 runs reached ratio 0.9 at k=10"};
  }

  double means[4] = {mean10, 0, 0, 0};
  int low_ks[3] = {3, 2, 1};
  for (int i = 0; i < 3; ++i) {
    const KGramIndex index = KGramIndex::build(corpus, low_ks[i], vocab);
    means[i + 1] = mean_ratio(low_ks[i], index, nullptr);
    if (means[0] <= means[i + 1]) {
      return {false, false,
              "mean ratio at k=10 (" + fmt(means[0]) +
                  ") does not exceed k=" + std::to_string(low_ks[i]) + " (" +
                  fmt(means[i + 1]) + ")"};
    }
  }
  return {true, false,
          measured + "; " + std::to_string(high) +
              "/100 runs >= 0.9; mean ratios k=10/3/2/1 = " + fmt(means[0]) +
              "/" + fmt(means[1]) + "/" + fmt(means[2]) + "/" +
              fmt(means[3])};
}

// -------- criterion 5: temperature properties --------

Outcome check_temperature() {
  testsupport::SplitMix mix(2026);
  double worst_identity = 0.0;
  double worst_uniform = 0.0;
  double worst_cold = 1.0;
  int cold_checked = 0;

  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + mix.below(49);
    Distribution dist;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double u = 0.1 + 0.9 * mix.unit();
      dist.entries.push_back({static_cast<TokenId>(i), u});
      total += u;
    }
    for (auto& e : dist.entries) e.prob /= total;

    const auto argmax = [](const Distribution& d) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < d.entries.size(); ++i) {
        if (d.entries[i].prob > d.entries[best].prob) best = i;
      }
      return best;
    };
    const std::size_t base_argmax = argmax(dist);

    const Distribution same = apply_temperature(dist, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      worst_identity = std::max(
          worst_identity, std::abs(same.entries[i].prob - dist.entries[i].prob));
    }
    if (worst_identity > 1e-12) {
      return {false, false, "T=1 deviation " + std::to_string(worst_identity)};
    }

    for (double t : {0.01, 0.5, 2.0, 100.0}) {
      const Distribution scaled = apply_temperature(dist, t);
      if (argmax(scaled) != base_argmax) {
        return {false, false,
                "argmax moved at T=" + fmt(t) + " on trial " +
                    std::to_string(trial)};
      }
      if (t == 100.0) {
        for (const auto& e : scaled.entries) {
          worst_uniform =
              std::max(worst_uniform, std::abs(e.prob - 1.0 / double(n)));
        }
      }
      if (t == 0.01) {
        // Sort a copy to find the top-2 relative gap.
        std::vector<double> probs;
        for (const auto& e : dist.entries) probs.push_back(e.prob);
        std::sort(probs.begin(), probs.end(), std::greater<>());
        if (probs[0] >= 1.1 * probs[1]) {
          ++cold_checked;
          worst_cold =
              std::min(worst_cold, scaled.entries[base_argmax].prob);
        }
      }
    }
  }
  if (worst_uniform > 0.01) {
    return {false, false,
            "T=100 deviation from uniform " + fmt(worst_uniform) + " > 0.01"};
  }
  if (worst_cold < 0.999) {
    return {false, false,
            "T=0.01 argmax mass " + fmt(worst_cold) + " < 0.999"};
  }
  return {true, false,
          "1000 distributions; T=100 max uniform deviation " +
              fmt(worst_uniform) + "; T=0.01 min argmax mass " +
              fmt(worst_cold) + " over " + std::to_string(cold_checked) +
              " gapped cases"};
}

// -------- criterion 6: smoothing normalization / positivity --------

Outcome check_smoothing_properties() {
  std::uint64_t contexts_checked = 0;
  for (std::uint64_t trial = 0; trial < 50; ++trial) {
    testsupport::SplitMix mix(trial * 131 + 7);
    const std::uint32_t vocab =
        5 + static_cast<std::uint32_t>(mix.below(96));  // up to 100
    const std::size_t length = vocab * 4 + mix.below(1200);
    const auto tokens =
        testsupport::random_ids_full_vocab(length, vocab, trial + 40);
    const int k = 1 + static_cast<int>(trial % 3);

    const ModelStack stack = ModelStack::build(tokens, k, vocab);
    const KGramIndex& index = stack.index();
    const auto uniform = SmoothingConfig::uniform_lambdas(k);
    std::vector<double> top_only(static_cast<std::size_t>(k) + 1, 0.0);
    top_only[0] = 1.0;
    BackoffScorer scorer(stack, 0.5);
    BackoffScorer undiscounted(stack, 0.0);

    for (std::size_t r = 0; r < index.row_count(); ++r) {
      const RowView row = index.row(r);
      const auto context = row.context;
      double sums[3] = {0.0, 0.0, 0.0};
      for (TokenId t = 0; t < vocab; ++t) {
        const double pa = add_alpha_prob(index, context, t, 0.1, vocab);
        const double pi = interpolated_prob(stack, uniform, context, t);
        const double pb = scorer.prob(context, t);
        if (pa <= 0.0 || pi <= 0.0 || pb <= 0.0) {
          return {false, false,
                  "non-positive probability on trial " +
                      std::to_string(trial)};
        }
        sums[0] += pa;
        sums[1] += pi;
        sums[2] += pb;
      }
      for (double s : sums) {
        if (std::abs(s - 1.0) >= 1e-9) {
          return {false, false,
                  "sum " + std::to_string(s) + " on trial " +
                      std::to_string(trial)};
        }
      }
      // Degenerate settings must reproduce the MLE bit for bit on seen
      // events.
      for (std::size_t e = 0; e < row.continuations.distinct(); ++e) {
        const TokenId token = row.continuations.ids[e];
        const double mle = mle_prob(index, context, token);
        if (add_alpha_prob(index, context, token, 0.0, vocab) != mle ||
            interpolated_prob(stack, top_only, context, token) != mle ||
            undiscounted.prob(context, token) != mle) {
          return {false, false,
                  "degenerate setting diverged from MLE on trial " +
                      std::to_string(trial)};
        }
      }
      ++contexts_checked;
    }
  }
  return {true, false,
          "50 corpora; " + std::to_string(contexts_checked) +
              " contexts normalized within 1e-9, strictly positive, "
              "degenerate settings equal MLE"};
}

// -------- criterion 7: CLI determinism --------

int run_command(const std::string& command) {
  const int status = std::system(command.c_str());
  return status == -1 ? -1 : (WIFEXITED(status) ? WEXITSTATUS(status) : -1);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return std::move(buffer).str();
}

Outcome check_cli_determinism(const Options& options) {
  if (options.cli.empty()) {
    return {false, false, "--cli path not provided"};
  }
  const std::string corpus_path = options.workdir + "/acceptance_corpus.txt";
  {
    std::ofstream out(corpus_path, std::ios::binary);
    out << testsupport::synthetic_text(5000, 99);
    if (!out) return {false, false, "cannot write " + corpus_path};
  }

  std::string reference_model;
  std::string reference_output;
  for (int rep = 0; rep < 100; ++rep) {
    const std::string model_path = options.workdir + "/acceptance_model.mlm";
    const std::string gen_path = options.workdir + "/acceptance_gen.txt";
    const int train_code =
        run_command("\"" + options.cli + "\" train --corpus \"" + corpus_path +
                    "\" --k 2 --out \"" + model_path + "\" > /dev/null");
    if (train_code != 0) {
      return {false, false, "train exited " + std::to_string(train_code) +
                                " on rep " + std::to_string(rep)};
    }
    const int gen_code = run_command(
        "\"" + options.cli + "\" generate --model \"" + model_path +
        "\" --length 100 --rng-seed 4242 > \"" + gen_path + "\"");
    if (gen_code != 0) {
      return {false, false, "generate exited " + std::to_string(gen_code) +
                                " on rep " + std::to_string(rep)};
    }
    const std::string model_bytes = slurp(model_path);
    const std::string output_bytes = slurp(gen_path);
    if (rep == 0) {
      reference_model = model_bytes;
      reference_output = output_bytes;
      if (reference_model.empty() || reference_output.empty()) {
        return {false, false, "empty model or output on first rep"};
      }
    } else if (model_bytes != reference_model) {
      return {false, false, "model bytes diverged on rep " +
                                std::to_string(rep)};
    } else if (output_bytes != reference_output) {
      return {false, false, "generated output diverged on rep " +
                                std::to_string(rep)};
    }
  }
  return {true, false,
          "100 train+generate repetitions byte-identical (model "
          "and output)"};
}

// -------- criterion 8: round-trip stability --------

Outcome check_round_trip() {
  std::uint32_t vocab_size = 0;
  const auto& corpus = big_corpus(vocab_size);

  // The text is regenerated rather than kept: the vocabulary must match the
  // id stream, and rebuilding it is cheap next to the index builds.
  const std::string text = testsupport::synthetic_text(1000000, 20260816);
  const auto surfaces = tokenize_words(text, TokenizerConfig{});
  const Vocabulary vocab = build_vocab(surfaces);
  if (vocab.size() != vocab_size) {
    return {false, false, "corpus regeneration mismatch"};
  }

  for (int k : {1, 2, 3, 10}) {
    ModelFile model;
    model.vocab = build_vocab(surfaces);
    model.index = KGramIndex::build(corpus, k, vocab.size());
    model.tail.assign(corpus.end() - k, corpus.end());

    std::ostringstream first;
    save_model(model, first);
    std::istringstream reload(first.str());
    const ModelFile restored = load_model(reload);
    std::ostringstream second;
    save_model(restored, second);
    if (first.str() != second.str()) {
      return {false, false,
              "save -> load -> save differs at k=" + std::to_string(k)};
    }
  }
  return {true, false,
          "byte-identical round trips at k in {1,2,3,10} on the " +
              std::to_string(corpus.size()) + "-token corpus"};
}

// -------- criterion 9: corpus table lookup (conditional) --------

Outcome check_reference_corpus(const Options& options) {
  const char* corpus_env = std::getenv("BRUNO_CORPUS");
  if (corpus_env == nullptr || std::string(corpus_env).empty()) {
    return {true, true,
            "reference corpus snapshot not available in this offline "
            "environment; set BRUNO_CORPUS=<path> to a ~1M-word text to "
            "enable; the criterion-2 oracle covers counting correctness"};
  }
  std::ifstream probe(corpus_env);
  if (!probe) {
    return {false, false, std::string("BRUNO_CORPUS set but unreadable: ") +
                              corpus_env};
  }
  const std::string model_path = options.workdir + "/acceptance_bruno.mlm";
  const int train_code = run_command(
      "\"" + options.cli + "\" train --corpus \"" + corpus_env +
      "\" --k 2 --out \"" + model_path + "\" > /dev/null");
  if (train_code != 0) {
    return {false, false, "train exited " + std::to_string(train_code)};
  }
  const std::string out_path = options.workdir + "/acceptance_bruno_out.txt";
  if (run_command("\"" + options.cli + "\" inspect --model \"" + model_path +
                  "\" unidos de > \"" + out_path + "\"") != 0) {
    return {false, false, "inspect 'unidos de' failed"};
  }
  const std::string unidos_de = slurp(out_path);
  const std::string expected_unidos =
      "norteamérica\t7\t0.5385\namérica\t5\t0.3846\ntrabajar\t1\t0.0769\n";
  if (unidos_de != expected_unidos) {
    return {false, false,
            "'unidos de' table differs from the expected counts 7/5/1 "
            "(tokenization-sensitive)"};
  }
  if (run_command("\"" + options.cli + "\" inspect --model \"" + model_path +
                  "\" mujeres son > \"" + out_path + "\"") != 0) {
    return {false, false, "inspect 'mujeres son' failed"};
  }
  std::istringstream rows(slurp(out_path));
  std::string row;
  int count = 0;
  while (std::getline(rows, row)) {
    if (row.empty()) continue;
    ++count;
    if (row.substr(row.rfind('\t') + 1) != "0.1667") {
      return {false, false, "'mujeres son' row not at 0.1667: " + row};
    }
  }
  if (count != 6) {
    return {false, false,
            "'mujeres son' has " + std::to_string(count) + " rows, not 6"};
  }
  return {true, false, "reference corpus tables reproduced"};
}

}  // namespace

int main(int argc, char** argv) {
  Options options;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--cli" && i + 1 < argc) {
      options.cli = argv[++i];
    } else if (arg == "--workdir" && i + 1 < argc) {
      options.workdir = argv[++i];
    } else if (arg == "--data" && i + 1 < argc) {
      options.data_dir = argv[++i];
    } else {
      std::cerr << "unknown argument: " << arg << '\n';
      return 2;
    }
  }

  const std::vector<Check> checks = {
      {1, "weather-table-fidelity", 1.0,
       [&] { return check_weather_table(options); }},
      {2, "mle-oracle-equivalence", 10.0, check_mle_oracle},
      {3, "coverage-invariant", 30.0, check_coverage},
      {4, "memorization-at-high-k", 120.0, check_memorization},
      {5, "temperature-properties", 5.0, check_temperature},
      {6, "smoothing-normalization", 20.0, check_smoothing_properties},
      {7, "cli-determinism", 30.0,
       [&] { return check_cli_determinism(options); }},
      {8, "model-round-trip", 60.0, check_round_trip},
      {9, "reference-corpus-tables", 60.0,
       [&] { return check_reference_corpus(options); }},
  };

  int failed = 0;
  int skipped = 0;
  for (const auto& check : checks) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = check.run();
    } catch (const std::exception& e) {
      outcome = {false, false, std::string("exception: ") + e.what()};
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    const bool in_budget = seconds < check.budget_seconds;
    if (outcome.pass && !in_budget) {
      outcome.pass = false;
      outcome.detail += " [exceeded budget]";
    }

    const char* verdict =
        outcome.skipped ? "SKIP" : (outcome.pass ? "PASS" : "FAIL");
    if (outcome.skipped) {
      ++skipped;
    } else if (!outcome.pass) {
      ++failed;
    }
    std::printf("%s %d %-26s %6.2fs (budget %.0fs)  %s\n", verdict, check.id,
                check.name, seconds, check.budget_seconds,
                outcome.detail.c_str());
    std::fflush(stdout);
  }

  std::printf("%d of %zu criteria passed, %d failed, %d skipped\n",
              static_cast<int>(checks.size()) - failed - skipped,
              checks.size(), failed, skipped);
  return failed == 0 ? 0 : 1;
}
