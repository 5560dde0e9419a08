#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "markov/analyze.hpp"
#include "markov/corpus.hpp"
#include "markov/generate.hpp"
#include "markov/model_io.hpp"
#include "markov/ngram.hpp"
#include "markov/rng.hpp"
#include "markov/smoothing.hpp"

namespace {

using namespace markov;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitData = 3;
constexpr int kExitEarlyStop = 4;

struct CliError {
  int code;
  std::string message;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw CliError{kExitIo, "cannot open '" + path + "' for reading"};
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) {
    throw CliError{kExitIo, "failed while reading '" + path + "'"};
  }
  return std::move(buffer).str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw CliError{kExitIo, "cannot open '" + path + "' for writing"};
  }
  out << content;
  out.flush();
  if (!out) {
    throw CliError{kExitIo, "failed while writing '" + path + "'"};
  }
}

std::string fixed4(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return std::string(buf);
}

std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::vector<double> parse_csv_doubles(const std::string& csv,
                                      const char* what) {
  std::vector<double> values;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= csv.size(); ++i) {
    if (i != csv.size() && csv[i] != ',') continue;
    const std::string part = csv.substr(start, i - start);
    start = i + 1;
    double v{};
    const auto res = std::from_chars(part.data(), part.data() + part.size(), v);
    if (res.ec != std::errc{} || res.ptr != part.data() + part.size()) {
      throw CliError{kExitUsage,
                     std::string("invalid ") + what + " '" + part + "'"};
    }
    values.push_back(v);
  }
  return values;
}

std::vector<int> parse_csv_ints(const std::string& csv, const char* what) {
  std::vector<int> values;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= csv.size(); ++i) {
    if (i != csv.size() && csv[i] != ',') continue;
    const std::string part = csv.substr(start, i - start);
    start = i + 1;
    int v{};
    const auto res = std::from_chars(part.data(), part.data() + part.size(), v);
    if (res.ec != std::errc{} || res.ptr != part.data() + part.size() ||
        v < 1) {
      throw CliError{kExitUsage,
                     std::string("invalid ") + what + " '" + part + "'"};
    }
    values.push_back(v);
  }
  return values;
}

struct TokenizerFlags {
  std::string mode = "word";
  std::uint64_t bpe_merges = 1000;
  bool no_lowercase = false;
  std::string normalization = "nfc";
  std::string punctuation = "separate";
};

void add_tokenizer_flags(CLI::App* cmd, TokenizerFlags& flags) {
  cmd->add_option("--tokenizer", flags.mode, "Tokenizer mode")
      ->check(CLI::IsMember({"word", "bpe"}))
      ->capture_default_str();
  cmd->add_option("--bpe-merges", flags.bpe_merges,
                  "Maximum number of BPE merges to learn")
      ->capture_default_str();
  cmd->add_flag("--no-lowercase", flags.no_lowercase,
                "Keep the original letter case");
  cmd->add_option("--normalization", flags.normalization,
                  "Unicode normalization applied before tokenizing")
      ->check(CLI::IsMember({"nfc", "none"}))
      ->capture_default_str();
  cmd->add_option("--punctuation", flags.punctuation,
                  "separate: punctuation marks become tokens; strip: dropped")
      ->check(CLI::IsMember({"separate", "strip"}))
      ->capture_default_str();
}

TokenizerConfig tokenizer_config(const TokenizerFlags& flags) {
  TokenizerConfig config;
  config.mode = flags.mode == "bpe" ? TokenizerConfig::Mode::bpe
                                    : TokenizerConfig::Mode::word;
  config.lowercase = !flags.no_lowercase;
  config.normalization = flags.normalization == "none"
                             ? TokenizerConfig::Normalization::none
                             : TokenizerConfig::Normalization::nfc;
  config.punctuation = flags.punctuation == "strip"
                           ? TokenizerConfig::Punctuation::strip
                           : TokenizerConfig::Punctuation::separate;
  return config;
}

struct SmoothingFlags {
  std::string method;
  double alpha = 0.1;
  double discount = 0.5;
  std::string lambdas;
  CLI::Option* method_opt = nullptr;
  CLI::Option* alpha_opt = nullptr;
  CLI::Option* discount_opt = nullptr;
  CLI::Option* lambdas_opt = nullptr;
};

void add_smoothing_flags(CLI::App* cmd, SmoothingFlags& flags) {
  flags.method_opt =
      cmd->add_option("--smoothing", flags.method, "Smoothing method")
          ->check(
              CLI::IsMember({"none", "add_alpha", "interpolation", "backoff"}));
  flags.alpha_opt = cmd->add_option("--alpha", flags.alpha,
                                    "Pseudo-count for add_alpha smoothing");
  flags.discount_opt = cmd->add_option(
      "--discount", flags.discount, "Absolute discount for backoff smoothing");
  flags.lambdas_opt = cmd->add_option(
      "--lambdas", flags.lambdas,
      "Interpolation weights: 'uniform' or comma-separated values, highest "
      "order first, ending with the unigram weight");
}

// Overlays explicitly given flags on a base config: the built-in defaults
// for train/analyze, the model header for generate/eval.
SmoothingConfig apply_smoothing_flags(SmoothingConfig base,
                                      const SmoothingFlags& flags) {
  if (flags.method_opt->count() > 0) {
    if (flags.method == "none") {
      base.method = SmoothingConfig::Method::none;
    } else if (flags.method == "add_alpha") {
      base.method = SmoothingConfig::Method::add_alpha;
    } else if (flags.method == "interpolation") {
      base.method = SmoothingConfig::Method::interpolation;
    } else {
      base.method = SmoothingConfig::Method::backoff;
    }
  }
  if (flags.alpha_opt->count() > 0) base.alpha = flags.alpha;
  if (flags.discount_opt->count() > 0) base.discount = flags.discount;
  if (flags.lambdas_opt->count() > 0) {
    base.lambdas.clear();
    if (flags.lambdas != "uniform") {
      base.lambdas = parse_csv_doubles(flags.lambdas, "lambda");
    }
  }
  return base;
}

void check_smoothing(const SmoothingConfig& config, int k) {
  try {
    config.validate(k);
  } catch (const DomainError& e) {
    throw CliError{kExitUsage, e.what()};
  }
}

std::vector<std::string> tokenize_text(const std::string& text,
                                       const TokenizerConfig& config,
                                       const BpeMergeTable& merges) {
  try {
    if (config.mode == TokenizerConfig::Mode::bpe) {
      return apply_bpe(merges, text, config);
    }
    return tokenize_words(text, config);
  } catch (const DecodeError& e) {
    throw CliError{kExitData, e.what()};
  }
}

ModelFile load_model_file(const std::string& path) {
  const std::string bytes = read_file(path);
  std::istringstream in(bytes);
  try {
    return load_model(in);
  } catch (const FormatError& e) {
    throw CliError{kExitData, path + ": " + e.what()};
  }
}

// Re-encodes a corpus against a loaded model's tokenizer and vocabulary,
// for the smoothing methods that need the lower-order indices rebuilt.
std::vector<TokenId> encode_against_model(const ModelFile& model,
                                          const std::string& corpus_path) {
  const std::string text = read_file(corpus_path);
  const std::vector<std::string> surfaces =
      tokenize_text(text, model.tokenizer, model.merges);
  std::vector<TokenId> ids;
  ids.reserve(surfaces.size());
  for (const auto& s : surfaces) {
    const auto id = model.vocab.id_of(s);
    if (!id) {
      throw CliError{kExitData, "corpus does not match the model vocabulary "
                                "(token '" +
                                    s + "' is not in it)"};
    }
    ids.push_back(*id);
  }
  if (ids.size() != model.index.total_tokens()) {
    throw CliError{kExitData,
                   "corpus does not match the model: " +
                       std::to_string(ids.size()) + " tokens, model counted " +
                       std::to_string(model.index.total_tokens())};
  }
  return ids;
}

struct TrainArgs {
  std::string corpus_path;
  std::string out_path;
  int k = 2;
  TokenizerFlags tokenizer;
  SmoothingFlags smoothing;
};

int run_train(const TrainArgs& args) {
  const TokenizerConfig config = tokenizer_config(args.tokenizer);
  const std::string text = read_file(args.corpus_path);

  ModelFile model;
  model.tokenizer = config;
  std::vector<std::string> surfaces;
  if (config.mode == TokenizerConfig::Mode::bpe) {
    TokenizerConfig word_config = config;
    word_config.mode = TokenizerConfig::Mode::word;
    std::vector<std::string> words;
    try {
      words = tokenize_words(text, word_config);
    } catch (const DecodeError& e) {
      throw CliError{kExitData, e.what()};
    }
    model.merges = train_bpe(words, args.tokenizer.bpe_merges);
    surfaces = tokenize_text(text, config, model.merges);
  } else {
    surfaces = tokenize_text(text, config, model.merges);
  }

  model.smoothing = apply_smoothing_flags(SmoothingConfig{}, args.smoothing);
  check_smoothing(model.smoothing, args.k);

  model.vocab = build_vocab(surfaces);
  const std::vector<TokenId> ids = model.vocab.encode(surfaces);
  model.index = KGramIndex::build(ids, args.k, model.vocab.size());
  if (ids.size() >= static_cast<std::size_t>(args.k)) {
    model.tail.assign(ids.end() - args.k, ids.end());
  }

  std::ostringstream out;
  save_model(model, out);
  write_file(args.out_path, std::move(out).str());

  std::cout << "total_tokens=" << model.index.total_tokens() << '\n'
            << "vocab_size=" << model.vocab.size() << '\n'
            << "distinct_contexts=" << model.index.row_count() << '\n';
  return kExitOk;
}

struct GenerateArgs {
  std::string model_path;
  std::string corpus_path;
  std::uint64_t length = 50;
  double temperature = 1.0;
  std::uint64_t rng_seed = 0;
  std::string seed_text;
  CLI::Option* seed_text_opt = nullptr;
  SmoothingFlags smoothing;
};

int run_generate(const GenerateArgs& args) {
  const ModelFile model = load_model_file(args.model_path);
  const int k = model.index.order();
  const SmoothingConfig smoothing =
      apply_smoothing_flags(model.smoothing, args.smoothing);
  check_smoothing(smoothing, k);
  if (!(args.temperature > 0.0)) {
    throw CliError{kExitUsage, "temperature must be positive"};
  }

  const bool needs_stack =
      smoothing.method == SmoothingConfig::Method::interpolation ||
      smoothing.method == SmoothingConfig::Method::backoff;
  std::optional<ModelStack> stack;
  ModelRef ref = model_ref(model.index);
  if (needs_stack) {
    if (args.corpus_path.empty()) {
      throw CliError{kExitUsage,
                     "interpolation and backoff need the lower-order counts; "
                     "pass the training corpus via --corpus"};
    }
    const std::vector<TokenId> ids = encode_against_model(model, args.corpus_path);
    stack = ModelStack::build(ids, k, model.vocab.size());
    ref = model_ref(*stack);
  }

  Rng rng(args.rng_seed);
  std::vector<TokenId> seed;
  if (args.seed_text_opt->count() > 0) {
    const std::vector<std::string> surfaces =
        tokenize_text(args.seed_text, model.tokenizer, model.merges);
    if (surfaces.size() != static_cast<std::size_t>(k)) {
      throw CliError{kExitUsage, "--seed-text must tokenize to exactly " +
                                     std::to_string(k) + " tokens, got " +
                                     std::to_string(surfaces.size())};
    }
    for (const auto& s : surfaces) {
      const auto id = model.vocab.id_of(s);
      if (!id) {
        throw CliError{kExitData,
                       "seed token '" + s + "' is not in the vocabulary"};
      }
      seed.push_back(*id);
    }
  } else {
    try {
      seed = pick_seed_from_index(model.index, model.tail, rng);
    } catch (const InsufficientDataError& e) {
      throw CliError{kExitData, e.what()};
    }
  }

  GenerationConfig config;
  config.length = args.length;
  config.temperature = args.temperature;
  config.smoothing = smoothing;
  const GenerationResult result = generate(ref, config, seed, rng);

  std::string line;
  for (const TokenId id : result.seed_context) {
    if (!line.empty()) line += ' ';
    line += model.vocab.surface_of(id);
  }
  for (const TokenId id : result.tokens) {
    if (!line.empty()) line += ' ';
    line += model.vocab.surface_of(id);
  }
  std::cout << line << '\n';
  return result.terminated_early ? kExitEarlyStop : kExitOk;
}

struct InspectArgs {
  std::string model_path;
  std::vector<std::string> context_words;
};

int run_inspect(const InspectArgs& args) {
  const ModelFile model = load_model_file(args.model_path);
  const int k = model.index.order();

  std::string joined;
  for (const auto& w : args.context_words) {
    if (!joined.empty()) joined += ' ';
    joined += w;
  }
  const std::vector<std::string> surfaces =
      tokenize_text(joined, model.tokenizer, model.merges);
  if (surfaces.size() != static_cast<std::size_t>(k)) {
    throw CliError{kExitUsage, "context must be " + std::to_string(k) +
                                   " tokens for this model, got " +
                                   std::to_string(surfaces.size())};
  }
  std::vector<TokenId> context;
  for (const auto& s : surfaces) {
    const auto id = model.vocab.id_of(s);
    if (!id) {
      throw CliError{kExitData, "no data: token '" + s +
                                    "' does not occur in the training corpus"};
    }
    context.push_back(*id);
  }

  std::vector<ContinuationEntry> entries;
  try {
    entries = continuations(model.index, context);
  } catch (const MissingContextError&) {
    throw CliError{kExitData, "no data: context '" + joined +
                                  "' does not occur in the training corpus"};
  }

  std::vector<std::pair<std::string, const ContinuationEntry*>> rows;
  rows.reserve(entries.size());
  for (const auto& e : entries) {
    rows.emplace_back(model.vocab.surface_of(e.id), &e);
  }
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (a.second->count != b.second->count) {
      return a.second->count > b.second->count;
    }
    return a.first < b.first;
  });
  for (const auto& [surface, entry] : rows) {
    std::cout << surface << '\t' << entry->count << '\t'
              << format_probability(entry->probability) << '\n';
  }
  return kExitOk;
}

struct AnalyzeArgs {
  std::string corpus_path;
  std::string ks = "1,2,3";
  std::uint64_t runs = 10;
  std::uint64_t length = 200;
  double temperature = 1.0;
  std::uint64_t rng_seed = 0;
  double heldout_fraction = 0.1;
  std::string format = "tsv";
  TokenizerFlags tokenizer;
  SmoothingFlags smoothing;
};

std::string report_value(const std::optional<double>& v) {
  return v ? format_real(*v) : std::string("undefined");
}

int run_analyze(const AnalyzeArgs& args) {
  const std::vector<int> ks = parse_csv_ints(args.ks, "k");
  const TokenizerConfig config = tokenizer_config(args.tokenizer);
  const std::string text = read_file(args.corpus_path);

  std::vector<std::string> surfaces;
  if (config.mode == TokenizerConfig::Mode::bpe) {
    TokenizerConfig word_config = config;
    word_config.mode = TokenizerConfig::Mode::word;
    std::vector<std::string> words;
    try {
      words = tokenize_words(text, word_config);
    } catch (const DecodeError& e) {
      throw CliError{kExitData, e.what()};
    }
    const BpeMergeTable merges = train_bpe(words, args.tokenizer.bpe_merges);
    surfaces = tokenize_text(text, config, merges);
  } else {
    surfaces = tokenize_text(text, config, BpeMergeTable{});
  }
  const Vocabulary vocab = build_vocab(surfaces);
  const std::vector<TokenId> ids = vocab.encode(surfaces);

  KSweepOptions options;
  options.runs = args.runs;
  options.length = args.length;
  options.temperature = args.temperature;
  options.smoothing = apply_smoothing_flags(SmoothingConfig{}, args.smoothing);
  options.rng_seed = args.rng_seed;
  options.heldout_fraction = args.heldout_fraction;

  const std::vector<KSweepEntry> entries =
      k_sweep(ids, vocab.size(), ks, options);

  std::size_t reported = 0;
  if (args.format == "tsv") {
    std::cout << "k\tcoverage_fraction\tlongest_copy_ratio\t"
                 "unique_continuation_fraction\tmean_branching\t"
                 "distinct_contexts\tperplexity\truns\n";
  }
  for (const auto& entry : entries) {
    if (!entry.report) {
      std::cerr << "k=" << entry.k << ": " << entry.error << '\n';
      continue;
    }
    ++reported;
    const AnalysisReport& r = *entry.report;
    if (args.format == "tsv") {
      std::cout << r.k << '\t' << report_value(r.coverage_fraction) << '\t'
                << report_value(r.longest_copy_ratio) << '\t'
                << format_real(r.unique_continuation_fraction) << '\t'
                << format_real(r.mean_branching) << '\t' << r.distinct_contexts
                << '\t' << report_value(r.perplexity) << '\t' << r.runs
                << '\n';
    } else {
      std::cout << "k=" << r.k
                << " coverage_fraction=" << report_value(r.coverage_fraction)
                << " longest_copy_ratio=" << report_value(r.longest_copy_ratio)
                << " unique_continuation_fraction="
                << format_real(r.unique_continuation_fraction)
                << " mean_branching=" << format_real(r.mean_branching)
                << " distinct_contexts=" << r.distinct_contexts
                << " perplexity=" << report_value(r.perplexity)
                << " runs=" << r.runs << '\n';
    }
  }
  return reported > 0 ? kExitOk : kExitData;
}

struct EvalArgs {
  std::string model_path;
  std::string heldout_path;
  std::string corpus_path;
  SmoothingFlags smoothing;
};

int run_eval(const EvalArgs& args) {
  const ModelFile model = load_model_file(args.model_path);
  const int k = model.index.order();
  const SmoothingConfig smoothing =
      apply_smoothing_flags(model.smoothing, args.smoothing);
  check_smoothing(smoothing, k);

  const bool needs_stack =
      smoothing.method == SmoothingConfig::Method::interpolation ||
      smoothing.method == SmoothingConfig::Method::backoff;
  std::optional<ModelStack> stack;
  ModelRef ref = model_ref(model.index);
  if (needs_stack) {
    if (args.corpus_path.empty()) {
      throw CliError{kExitUsage,
                     "interpolation and backoff need the lower-order counts; "
                     "pass the training corpus via --corpus"};
    }
    const std::vector<TokenId> ids = encode_against_model(model, args.corpus_path);
    stack = ModelStack::build(ids, k, model.vocab.size());
    ref = model_ref(*stack);
  }

  const std::string text = read_file(args.heldout_path);
  const std::vector<std::string> surfaces =
      tokenize_text(text, model.tokenizer, model.merges);
  // Out-of-vocabulary surfaces map to an out-of-range sentinel id: contexts
  // containing one simply never match a row, and a scored sentinel token is
  // an undefined-probability position.
  std::vector<TokenId> ids;
  ids.reserve(surfaces.size());
  for (const auto& s : surfaces) {
    const auto id = model.vocab.id_of(s);
    ids.push_back(id ? *id : model.vocab.size());
  }

  const PerplexityResult result = perplexity(ref, smoothing, ids);
  if (result.value) {
    std::cout << fixed4(*result.value) << '\n';
    return kExitOk;
  }
  if (result.failed_position) {
    std::cout << "undefined (position " << *result.failed_position << ")\n";
  } else {
    std::cout << "undefined (no scorable positions)\n";
  }
  return kExitData;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Order-k Markov-chain language model: train, generate, "
               "inspect, analyze, eval"};
  app.require_subcommand(1);

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "Count k-grams of a corpus "
                                                "and write a model file");
  train->add_option("--corpus", train_args.corpus_path, "UTF-8 corpus file")
      ->required();
  train->add_option("--k", train_args.k, "Model order (context length)")
      ->required()
      ->check(CLI::Range(1, 64));
  train->add_option("--out", train_args.out_path, "Output model path")
      ->required();
  add_tokenizer_flags(train, train_args.tokenizer);
  add_smoothing_flags(train, train_args.smoothing);

  GenerateArgs generate_args;
  CLI::App* generate = app.add_subcommand(
      "generate", "Sample text from a trained model");
  generate->add_option("--model", generate_args.model_path, "Model file")
      ->required();
  generate->add_option("--length", generate_args.length,
                       "Number of tokens to generate")
      ->capture_default_str();
  generate->add_option("--temperature", generate_args.temperature,
                       "Sampling temperature")
      ->capture_default_str();
  generate->add_option("--rng-seed", generate_args.rng_seed, "Random seed")
      ->capture_default_str();
  generate_args.seed_text_opt = generate->add_option(
      "--seed-text", generate_args.seed_text,
      "Explicit seed context (must tokenize to exactly k tokens)");
  generate->add_option("--corpus", generate_args.corpus_path,
                       "Training corpus, needed for interpolation/backoff");
  add_smoothing_flags(generate, generate_args.smoothing);

  InspectArgs inspect_args;
  CLI::App* inspect = app.add_subcommand(
      "inspect", "Show the continuation table of one context");
  inspect->add_option("--model", inspect_args.model_path, "Model file")
      ->required();
  inspect
      ->add_option("context", inspect_args.context_words,
                   "Context words (exactly k tokens)")
      ->required()
      ->expected(-1);

  AnalyzeArgs analyze_args;
  CLI::App* analyze = app.add_subcommand(
      "analyze", "Memorization/coherence sweep over k values");
  analyze->add_option("--corpus", analyze_args.corpus_path, "UTF-8 corpus file")
      ->required();
  analyze->add_option("--ks", analyze_args.ks, "Comma-separated k values")
      ->capture_default_str();
  analyze->add_option("--runs", analyze_args.runs, "Generations per k")
      ->capture_default_str();
  analyze->add_option("--length", analyze_args.length, "Tokens per generation")
      ->capture_default_str();
  analyze->add_option("--temperature", analyze_args.temperature,
                      "Sampling temperature")
      ->capture_default_str();
  analyze->add_option("--rng-seed", analyze_args.rng_seed, "Random seed")
      ->capture_default_str();
  analyze->add_option("--heldout-fraction", analyze_args.heldout_fraction,
                      "Trailing fraction held out for perplexity")
      ->capture_default_str();
  analyze->add_option("--format", analyze_args.format, "Output format")
      ->check(CLI::IsMember({"tsv", "records"}))
      ->capture_default_str();
  add_tokenizer_flags(analyze, analyze_args.tokenizer);
  add_smoothing_flags(analyze, analyze_args.smoothing);

  EvalArgs eval_args;
  CLI::App* eval = app.add_subcommand(
      "eval", "Perplexity of a heldout file under a trained model");
  eval->add_option("--model", eval_args.model_path, "Model file")->required();
  eval->add_option("--heldout", eval_args.heldout_path, "UTF-8 heldout file")
      ->required();
  eval->add_option("--corpus", eval_args.corpus_path,
                   "Training corpus, needed for interpolation/backoff");
  add_smoothing_flags(eval, eval_args.smoothing);

  int rc = kExitOk;
  train->callback([&] { rc = run_train(train_args); });
  generate->callback([&] { rc = run_generate(generate_args); });
  inspect->callback([&] { rc = run_inspect(inspect_args); });
  analyze->callback([&] { rc = run_analyze(analyze_args); });
  eval->callback([&] { rc = run_eval(eval_args); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const CliError& e) {
    std::cerr << "error: " << e.message << '\n';
    return e.code;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitData;
  }
  return rc;
}
