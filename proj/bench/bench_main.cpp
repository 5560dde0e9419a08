// Timing harness for the index and analysis kernels. Two comparisons:
//
//   1. the hash-map reference build (kept for correctness cross-checks)
//      against the sort-based build used everywhere else
//   2. the same OpenMP kernels pinned to one thread against the default
//      thread count, which isolates the parallelization itself
//
// Not registered with ctest. Usage: markovlm_bench [--tokens N] [--reps R]

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "markov/analyze.hpp"
#include "markov/corpus.hpp"
#include "markov/ngram.hpp"
#include "support/textgen.hpp"

using namespace markov;

namespace {

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

void set_threads(int n) {
#ifdef _OPENMP
  omp_set_num_threads(n);
#else
  (void)n;
#endif
}

template <typename F>
double best_of(int reps, F&& body) {
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    const auto start = std::chrono::steady_clock::now();
    body();
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    best = std::min(best, seconds);
  }
  return best;
}

void print_row(const char* label, double before, double after) {
  std::printf("%-30s %9.3fs %9.3fs %7.2fx\n", label, before, after,
              before / after);
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t tokens = 2000000;
  int reps = 3;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--tokens" && i + 1 < argc) {
      tokens = std::strtoull(argv[++i], nullptr, 10);
    } else if (arg == "--reps" && i + 1 < argc) {
      reps = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--tokens N] [--reps R]\n", argv[0]);
      return 1;
    }
  }

  const int threads = max_threads();
  std::printf("corpus: ~%zu tokens, reps: %d, hardware threads: %d\n", tokens,
              reps, threads);

  const std::string text = testsupport::synthetic_text(tokens, 7);
  const auto words = tokenize_words(text, TokenizerConfig{});
  const Vocabulary vocab = build_vocab(words);
  const std::vector<TokenId> ids = vocab.encode(words);
  std::printf("tokenized: %zu tokens, vocab %u\n", ids.size(), vocab.size());

  std::printf("\nhash-map reference vs sort-based build (%d thread%s)\n",
              threads, threads == 1 ? "" : "s");
  std::printf("%-30s %10s %10s %8s\n", "kernel", "reference", "sorted",
              "speedup");
  for (int k : {2, 5, 10}) {
    KGramIndex reference, sorted;
    const double ref_time = best_of(
        reps, [&] { reference = KGramIndex::build_serial(ids, k, vocab.size()); });
    const double sort_time = best_of(
        reps, [&] { sorted = KGramIndex::build(ids, k, vocab.size()); });
    if (!(reference == sorted)) {
      std::fprintf(stderr,
                   "FATAL: reference and sorted builds disagree at k=%d\n", k);
      return 1;
    }
    char label[64];
    std::snprintf(label, sizeof label, "index build k=%d", k);
    print_row(label, ref_time, sort_time);
  }

  std::printf("\nthread scaling, 1 thread vs %d (same kernels)\n", threads);
  if (threads == 1) {
    std::printf("only one hardware thread: speedups here should be ~1.0x\n");
  }
  std::printf("%-30s %10s %10s %8s\n", "kernel", "1 thread",
              "all", "speedup");
  {
    KGramIndex one, all;
    set_threads(1);
    const double one_time =
        best_of(reps, [&] { one = KGramIndex::build(ids, 10, vocab.size()); });
    set_threads(threads);
    const double all_time =
        best_of(reps, [&] { all = KGramIndex::build(ids, 10, vocab.size()); });
    if (!(one == all)) {
      std::fprintf(stderr, "FATAL: build depends on the thread count\n");
      return 1;
    }
    print_row("index build k=10", one_time, all_time);
  }
  {
    KSweepOptions options;
    options.runs = 100;
    options.length = 200;
    const std::vector<int> ks = {2, 5, 10};
    std::vector<KSweepEntry> one_sweep, all_sweep;
    set_threads(1);
    const double one_time = best_of(
        reps, [&] { one_sweep = k_sweep(ids, vocab.size(), ks, options); });
    set_threads(threads);
    const double all_time = best_of(
        reps, [&] { all_sweep = k_sweep(ids, vocab.size(), ks, options); });
    for (std::size_t i = 0; i < one_sweep.size(); ++i) {
      const bool both =
          one_sweep[i].report.has_value() && all_sweep[i].report.has_value();
      if (!both || one_sweep[i].report->coverage_fraction !=
                       all_sweep[i].report->coverage_fraction) {
        std::fprintf(stderr,
                     "FATAL: sweep results depend on the thread count\n");
        return 1;
      }
    }
    print_row("analysis sweep k={2,5,10}", one_time, all_time);
  }
  return 0;
}
