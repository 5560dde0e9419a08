#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "markov/corpus.hpp"
#include "markov/ngram.hpp"
#include "markov/smoothing.hpp"

namespace markov {

// Everything a trained model needs to be reloaded and sampled from: the
// tokenizer settings, vocabulary, order-k index, BPE merges (subword models
// only), default smoothing parameters, and the stream's trailing k-gram
// (`tail`), which lets seed picking reproduce the uniform-over-positions
// draw without the original stream.
struct ModelFile {
  TokenizerConfig tokenizer;
  SmoothingConfig smoothing;
  Vocabulary vocab;
  BpeMergeTable merges;
  std::vector<TokenId> tail;  // empty when the stream was shorter than k
  KGramIndex index;
};

// Line-oriented text format, key=value header followed by vocab / merges /
// contexts sections. All numbers use shortest-round-trip formatting and
// rows are stored in their canonical order, so equal models serialize to
// identical bytes and save -> load -> save is byte-stable. Throws
// DomainError when the struct is internally inconsistent (vocabulary size
// vs index, tail length).
void save_model(const ModelFile& model, std::ostream& out);

// Throws FormatError (with a line number) on malformed or inconsistent
// input.
ModelFile load_model(std::istream& in);

// Fixed four-decimal rendering used wherever probabilities are displayed.
// Delegates to printf, so halfway cases follow round-half-even.
std::string format_probability(double p);

}  // namespace markov
