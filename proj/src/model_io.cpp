#include "markov/model_io.hpp"

#include <cstdio>
#include <istream>
#include <ostream>

#include "text_format.hpp"

namespace markov {

namespace {

const char* tokenizer_mode_name(TokenizerConfig::Mode mode) {
  return mode == TokenizerConfig::Mode::bpe ? "bpe" : "word";
}

const char* normalization_name(TokenizerConfig::Normalization n) {
  return n == TokenizerConfig::Normalization::nfc ? "nfc" : "none";
}

const char* punctuation_name(TokenizerConfig::Punctuation p) {
  return p == TokenizerConfig::Punctuation::strip ? "strip" : "separate";
}

const char* smoothing_name(SmoothingConfig::Method m) {
  switch (m) {
    case SmoothingConfig::Method::none:
      return "none";
    case SmoothingConfig::Method::add_alpha:
      return "add_alpha";
    case SmoothingConfig::Method::interpolation:
      return "interpolation";
    case SmoothingConfig::Method::backoff:
      return "backoff";
  }
  return "none";
}

class ModelReader {
 public:
  explicit ModelReader(std::istream& in) : in_(in) {}

  std::string next(const char* what) {
    std::string line;
    if (!std::getline(in_, line)) {
      throw FormatError("unexpected end of file, expected " +
                        std::string(what));
    }
    ++number_;
    return line;
  }

  // Header line "key=value" with a fixed expected key.
  std::string value(const char* key) {
    std::string line = next(key);
    std::string_view view = line;
    if (!textfmt::consume_prefix(view, key) ||
        !textfmt::consume_prefix(view, "=")) {
      throw fail(std::string("expected '") + key + "=<value>'");
    }
    return std::string(view);
  }

  FormatError fail(const std::string& msg) const {
    return FormatError("line " + std::to_string(number_) + ": " + msg);
  }

  // Numeric parses below raise errors tagged with the current line.
  std::uint64_t u64(std::string_view text, const char* what) const {
    try {
      return textfmt::parse_u64(text);
    } catch (const FormatError&) {
      throw fail(std::string(what) + " must be an unsigned integer, got '" +
                 std::string(text) + "'");
    }
  }

  std::uint64_t u64_value(const char* key) {
    const std::string text = value(key);
    return u64(text, key);
  }

  double real(std::string_view text, const char* what) const {
    try {
      return textfmt::parse_double(text);
    } catch (const FormatError&) {
      throw fail(std::string(what) + " must be a real number, got '" +
                 std::string(text) + "'");
    }
  }

  double real_value(const char* key) {
    const std::string text = value(key);
    return real(text, key);
  }

  std::size_t number() const { return number_; }

  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

 private:
  std::istream& in_;
  std::size_t number_ = 0;
};

}  // namespace

void save_model(const ModelFile& model, std::ostream& out) {
  const int k = model.index.order();
  if (k < 1) throw DomainError("save_model: index has no order");
  if (model.index.vocab_size() != model.vocab.size()) {
    throw DomainError("save_model: index vocab size " +
                      std::to_string(model.index.vocab_size()) +
                      " does not match vocabulary size " +
                      std::to_string(model.vocab.size()));
  }
  const bool has_tail =
      model.index.total_tokens() >= static_cast<std::uint64_t>(k);
  if (has_tail && model.tail.size() != static_cast<std::size_t>(k)) {
    throw DomainError("save_model: tail length does not match order");
  }
  if (!has_tail && !model.tail.empty()) {
    throw DomainError("save_model: tail present for a stream shorter than k");
  }

  out << "MARKOVLM v1\n";
  out << "k=" << k << '\n';
  out << "tokenizer=" << tokenizer_mode_name(model.tokenizer.mode) << '\n';
  out << "lowercase=" << (model.tokenizer.lowercase ? "true" : "false")
      << '\n';
  out << "normalization=" << normalization_name(model.tokenizer.normalization)
      << '\n';
  out << "punctuation=" << punctuation_name(model.tokenizer.punctuation)
      << '\n';
  out << "smoothing=" << smoothing_name(model.smoothing.method) << '\n';
  out << "alpha=" << textfmt::format_double(model.smoothing.alpha) << '\n';
  out << "discount=" << textfmt::format_double(model.smoothing.discount)
      << '\n';
  out << "lambdas=";
  if (model.smoothing.lambdas.empty()) {
    out << "uniform";
  } else {
    for (std::size_t i = 0; i < model.smoothing.lambdas.size(); ++i) {
      if (i > 0) out << ',';
      out << textfmt::format_double(model.smoothing.lambdas[i]);
    }
  }
  out << '\n';
  out << "total_tokens=" << model.index.total_tokens() << '\n';
  out << "vocab_size=" << model.vocab.size() << '\n';
  if (has_tail) {
    out << "tail=";
    for (std::size_t i = 0; i < model.tail.size(); ++i) {
      if (i > 0) out << ' ';
      out << model.tail[i];
    }
    out << '\n';
  }

  out << "vocab " << model.vocab.size() << '\n';
  for (TokenId id = 0; id < model.vocab.size(); ++id) {
    out << escape_surface(model.vocab.surface_of(id)) << '\n';
  }

  if (model.tokenizer.mode == TokenizerConfig::Mode::bpe) {
    out << "merges " << model.merges.merges.size() << '\n';
    for (const auto& [left, right] : model.merges.merges) {
      out << escape_surface(left) << '\t' << escape_surface(right) << '\n';
    }
  }

  out << "contexts " << model.index.row_count() << '\n';
  for (std::size_t r = 0; r < model.index.row_count(); ++r) {
    const RowView row = model.index.row(r);
    for (std::size_t i = 0; i < row.context.size(); ++i) {
      if (i > 0) out << ' ';
      out << row.context[i];
    }
    out << '\t';
    for (std::size_t i = 0; i < row.continuations.ids.size(); ++i) {
      if (i > 0) out << ' ';
      out << row.continuations.ids[i] << ':' << row.continuations.counts[i];
    }
    out << '\n';
  }
}

ModelFile load_model(std::istream& in) {
  ModelReader reader(in);
  if (reader.next("magic line") != "MARKOVLM v1") {
    throw FormatError("line 1: expected 'MARKOVLM v1'");
  }

  ModelFile model;

  const std::uint64_t k = reader.u64_value("k");
  if (k < 1 || k > 64) {
    throw reader.fail("order " + std::to_string(k) + " out of range");
  }

  const std::string mode = reader.value("tokenizer");
  if (mode == "word") {
    model.tokenizer.mode = TokenizerConfig::Mode::word;
  } else if (mode == "bpe") {
    model.tokenizer.mode = TokenizerConfig::Mode::bpe;
  } else {
    throw reader.fail("unknown tokenizer '" + mode + "'");
  }

  const std::string lowercase = reader.value("lowercase");
  if (lowercase == "true") {
    model.tokenizer.lowercase = true;
  } else if (lowercase == "false") {
    model.tokenizer.lowercase = false;
  } else {
    throw reader.fail("lowercase must be true or false");
  }

  const std::string normalization = reader.value("normalization");
  if (normalization == "nfc") {
    model.tokenizer.normalization = TokenizerConfig::Normalization::nfc;
  } else if (normalization == "none") {
    model.tokenizer.normalization = TokenizerConfig::Normalization::none;
  } else {
    throw reader.fail("unknown normalization '" + normalization + "'");
  }

  const std::string punctuation = reader.value("punctuation");
  if (punctuation == "separate") {
    model.tokenizer.punctuation = TokenizerConfig::Punctuation::separate;
  } else if (punctuation == "strip") {
    model.tokenizer.punctuation = TokenizerConfig::Punctuation::strip;
  } else {
    throw reader.fail("unknown punctuation mode '" + punctuation + "'");
  }

  const std::string smoothing = reader.value("smoothing");
  if (smoothing == "none") {
    model.smoothing.method = SmoothingConfig::Method::none;
  } else if (smoothing == "add_alpha") {
    model.smoothing.method = SmoothingConfig::Method::add_alpha;
  } else if (smoothing == "interpolation") {
    model.smoothing.method = SmoothingConfig::Method::interpolation;
  } else if (smoothing == "backoff") {
    model.smoothing.method = SmoothingConfig::Method::backoff;
  } else {
    throw reader.fail("unknown smoothing '" + smoothing + "'");
  }

  model.smoothing.alpha = reader.real_value("alpha");
  model.smoothing.discount = reader.real_value("discount");

  const std::string lambdas = reader.value("lambdas");
  if (lambdas != "uniform") {
    for (const auto& part : textfmt::split(lambdas, ',')) {
      model.smoothing.lambdas.push_back(reader.real(part, "lambda"));
    }
  }

  const std::uint64_t total_tokens = reader.u64_value("total_tokens");
  const std::uint64_t vocab_size = reader.u64_value("vocab_size");
  if (vocab_size > 0xFFFFFFFFull) {
    throw reader.fail("vocab_size out of range");
  }

  if (total_tokens >= k) {
    const std::string tail = reader.value("tail");
    for (const auto& part : textfmt::split(tail, ' ')) {
      const std::uint64_t id = reader.u64(part, "tail token id");
      if (id >= vocab_size) throw reader.fail("tail token id out of range");
      model.tail.push_back(static_cast<TokenId>(id));
    }
    if (model.tail.size() != k) {
      throw reader.fail("tail length does not match order");
    }
  }

  std::string line = reader.next("vocab <count>");
  {
    std::string_view view = line;
    if (!textfmt::consume_prefix(view, "vocab ") ||
        reader.u64(view, "vocab count") != vocab_size) {
      throw reader.fail("expected 'vocab " + std::to_string(vocab_size) + "'");
    }
  }
  for (std::uint64_t i = 0; i < vocab_size; ++i) {
    std::string surface;
    try {
      surface = unescape_surface(reader.next("vocabulary surface"));
    } catch (const FormatError& e) {
      throw reader.fail(e.what());
    }
    if (model.vocab.add(surface) != i) {
      throw reader.fail("duplicate vocabulary surface '" + surface + "'");
    }
  }

  if (model.tokenizer.mode == TokenizerConfig::Mode::bpe) {
    line = reader.next("merges <count>");
    std::string_view view = line;
    if (!textfmt::consume_prefix(view, "merges ")) {
      throw reader.fail("expected 'merges <count>'");
    }
    const std::uint64_t num_merges = reader.u64(view, "merge count");
    for (std::uint64_t i = 0; i < num_merges; ++i) {
      line = reader.next("merge");
      const auto fields = textfmt::split(line, '\t');
      if (fields.size() != 2) {
        throw reader.fail("expected '<left>\\t<right>' merge");
      }
      try {
        model.merges.merges.emplace_back(unescape_surface(fields[0]),
                                         unescape_surface(fields[1]));
      } catch (const FormatError& e) {
        throw reader.fail(e.what());
      }
    }
  }

  line = reader.next("contexts <count>");
  {
    std::string_view view = line;
    if (!textfmt::consume_prefix(view, "contexts ")) {
      throw reader.fail("expected 'contexts <count>'");
    }
    const std::uint64_t rows = reader.u64(view, "context row count");
    KGramIndexBuilder builder(static_cast<int>(k), total_tokens,
                              static_cast<std::uint32_t>(vocab_size));
    std::vector<TokenId> context;
    std::vector<TokenId> cont_ids;
    std::vector<std::uint64_t> cont_counts;
    std::uint64_t window_sum = 0;
    for (std::uint64_t r = 0; r < rows; ++r) {
      line = reader.next("context row");
      const auto fields = textfmt::split(line, '\t');
      if (fields.size() != 2) {
        throw reader.fail("expected '<context>\\t<continuations>'");
      }
      context.clear();
      for (const auto& part : textfmt::split(fields[0], ' ')) {
        context.push_back(
            static_cast<TokenId>(reader.u64(part, "context token id")));
      }
      cont_ids.clear();
      cont_counts.clear();
      for (const auto& part : textfmt::split(fields[1], ' ')) {
        const auto colon = part.find(':');
        if (colon == std::string_view::npos) {
          throw reader.fail("expected 'id:count' continuation");
        }
        cont_ids.push_back(static_cast<TokenId>(
            reader.u64(part.substr(0, colon), "continuation id")));
        const std::uint64_t count =
            reader.u64(part.substr(colon + 1), "continuation count");
        cont_counts.push_back(count);
        window_sum += count;
      }
      try {
        builder.add_row(context, cont_ids, cont_counts);
      } catch (const FormatError& e) {
        throw reader.fail(e.what());
      }
    }
    const std::uint64_t expected_windows =
        total_tokens >= k + 1 ? total_tokens - k : 0;
    if (window_sum != expected_windows) {
      throw FormatError("context window counts sum to " +
                        std::to_string(window_sum) + ", expected " +
                        std::to_string(expected_windows));
    }
    model.index = builder.finish();
  }

  if (!reader.at_end()) {
    throw FormatError("trailing content after contexts section");
  }
  return model;
}

std::string format_probability(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", p);
  return std::string(buf);
}

}  // namespace markov
