#include "markov/corpus.hpp"

#include <algorithm>
#include <cstddef>

#include "unicode.hpp"

namespace markov {

TokenId Vocabulary::add(std::string_view surface) {
  std::string key(surface);
  auto it = ids_.find(key);
  if (it != ids_.end()) return it->second;
  const TokenId id = static_cast<TokenId>(surfaces_.size());
  surfaces_.push_back(key);
  ids_.emplace(std::move(key), id);
  return id;
}

std::optional<TokenId> Vocabulary::id_of(std::string_view surface) const {
  auto it = ids_.find(std::string(surface));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocabulary::surface_of(TokenId id) const {
  if (id >= surfaces_.size()) {
    throw DomainError("surface_of: token id " + std::to_string(id) +
                      " out of range (vocabulary size " +
                      std::to_string(surfaces_.size()) + ")");
  }
  return surfaces_[id];
}

std::vector<TokenId> Vocabulary::encode(
    std::span<const std::string> surfaces) const {
  std::vector<TokenId> ids;
  ids.reserve(surfaces.size());
  for (const auto& s : surfaces) {
    auto id = id_of(s);
    if (!id) throw DomainError("encode: unknown token '" + s + "'");
    ids.push_back(*id);
  }
  return ids;
}

std::vector<std::string> Vocabulary::decode(
    std::span<const TokenId> ids) const {
  std::vector<std::string> surfaces;
  surfaces.reserve(ids.size());
  for (TokenId id : ids) surfaces.push_back(surface_of(id));
  return surfaces;
}

std::vector<std::string> tokenize_words(std::string_view text,
                                        const TokenizerConfig& config) {
  std::vector<std::uint32_t> cps;
  cps.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    cps.push_back(unicode::decode(text, i));
  }

  if (config.normalization == TokenizerConfig::Normalization::nfc) {
    std::vector<std::uint32_t> composed;
    composed.reserve(cps.size());
    for (std::uint32_t cp : cps) {
      if (!composed.empty() && unicode::is_combining_mark(cp)) {
        if (auto c = unicode::compose(composed.back(), cp)) {
          composed.back() = *c;
          continue;
        }
      }
      composed.push_back(cp);
    }
    cps = std::move(composed);
  }

  if (config.lowercase) {
    for (auto& cp : cps) cp = unicode::to_lower(cp);
  }

  std::vector<std::string> tokens;
  const auto emit = [&](std::size_t a, std::size_t b) {
    std::string s;
    for (std::size_t j = a; j < b; ++j) unicode::append_utf8(cps[j], s);
    tokens.push_back(std::move(s));
  };

  const std::size_t n = cps.size();
  std::size_t i = 0;
  while (i < n) {
    while (i < n && unicode::is_space(cps[i])) ++i;
    std::size_t j = i;
    while (j < n && !unicode::is_space(cps[j])) ++j;
    if (i == j) break;
    // Detach punctuation only at the chunk edges; marks inside a word
    // (don't, vice-versa) belong to it.
    std::size_t lead = i;
    std::size_t trail = j;
    while (lead < trail && unicode::is_punct(cps[lead])) ++lead;
    while (trail > lead && unicode::is_punct(cps[trail - 1])) --trail;
    if (config.punctuation == TokenizerConfig::Punctuation::separate) {
      for (std::size_t p = i; p < lead; ++p) emit(p, p + 1);
      if (lead < trail) emit(lead, trail);
      for (std::size_t p = trail; p < j; ++p) emit(p, p + 1);
    } else {
      if (lead < trail) emit(lead, trail);
    }
    i = j;
  }
  return tokens;
}

Vocabulary build_vocab(std::span<const std::string> tokens) {
  Vocabulary vocab;
  for (const auto& t : tokens) vocab.add(t);
  return vocab;
}

namespace {

std::vector<std::string> split_code_points(std::string_view word) {
  std::vector<std::string> syms;
  for (std::size_t i = 0; i < word.size();) {
    const std::size_t start = i;
    unicode::decode_lenient(word, i);
    syms.emplace_back(word.substr(start, i - start));
  }
  return syms;
}

void apply_merge(std::vector<std::string>& syms, const std::string& left,
                 const std::string& right) {
  if (syms.size() < 2) return;
  std::vector<std::string> out;
  out.reserve(syms.size());
  for (std::size_t i = 0; i < syms.size();) {
    if (i + 1 < syms.size() && syms[i] == left && syms[i + 1] == right) {
      out.push_back(left + right);
      i += 2;
    } else {
      out.push_back(std::move(syms[i]));
      i += 1;
    }
  }
  syms = std::move(out);
}

struct PairHash {
  std::size_t operator()(const std::pair<std::string, std::string>& p) const {
    const std::size_t h1 = std::hash<std::string>{}(p.first);
    const std::size_t h2 = std::hash<std::string>{}(p.second);
    return h1 ^ (h2 + 0x9e3779b97f4a7c15ull + (h1 << 6) + (h1 >> 2));
  }
};

}  // namespace

BpeMergeTable train_bpe(std::span<const std::string> words,
                        std::size_t num_merges) {
  using Pair = std::pair<std::string, std::string>;

  // Counting over word types instead of the raw stream: pair frequencies
  // come out identical, at a fraction of the work.
  std::unordered_map<std::string, std::uint64_t> freq;
  for (const auto& w : words) ++freq[w];

  struct TypeEntry {
    std::vector<std::string> syms;
    std::uint64_t count;
  };
  std::vector<TypeEntry> types;
  types.reserve(freq.size());
  for (const auto& [word, count] : freq) {
    types.push_back({split_code_points(word), count});
  }

  BpeMergeTable table;
  for (std::size_t round = 0; round < num_merges; ++round) {
    std::unordered_map<Pair, std::uint64_t, PairHash> counts;
    for (const auto& t : types) {
      for (std::size_t i = 0; i + 1 < t.syms.size(); ++i) {
        counts[{t.syms[i], t.syms[i + 1]}] += t.count;
      }
    }
    const Pair* best = nullptr;
    std::uint64_t best_count = 0;
    for (const auto& [pair, count] : counts) {
      if (count > best_count ||
          (count == best_count && best != nullptr && pair < *best)) {
        best = &pair;
        best_count = count;
      }
    }
    if (best == nullptr || best_count < 2) break;
    const Pair merge = *best;
    for (auto& t : types) apply_merge(t.syms, merge.first, merge.second);
    table.merges.push_back(merge);
  }
  return table;
}

std::vector<std::string> apply_bpe(const BpeMergeTable& table,
                                   std::string_view text,
                                   const TokenizerConfig& config) {
  TokenizerConfig word_config = config;
  word_config.mode = TokenizerConfig::Mode::word;
  const std::vector<std::string> words = tokenize_words(text, word_config);

  std::unordered_map<std::string, std::vector<std::string>> memo;
  std::vector<std::string> out;
  out.reserve(words.size());
  for (const auto& w : words) {
    auto it = memo.find(w);
    if (it == memo.end()) {
      std::vector<std::string> syms = split_code_points(w);
      for (const auto& [left, right] : table.merges) {
        apply_merge(syms, left, right);
      }
      it = memo.emplace(w, std::move(syms)).first;
    }
    out.insert(out.end(), it->second.begin(), it->second.end());
  }
  return out;
}

std::string escape_surface(std::string_view surface) {
  std::string out;
  out.reserve(surface.size());
  for (char c : surface) {
    switch (c) {
      case '\\':
        out += "\\\\";
        break;
      case '\t':
        out += "\\t";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\r':
        out += "\\r";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string unescape_surface(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '\\') {
      out += text[i];
      continue;
    }
    if (i + 1 >= text.size()) {
      throw FormatError("unescape_surface: dangling backslash");
    }
    switch (text[++i]) {
      case '\\':
        out += '\\';
        break;
      case 't':
        out += '\t';
        break;
      case 'n':
        out += '\n';
        break;
      case 'r':
        out += '\r';
        break;
      default:
        throw FormatError(std::string("unescape_surface: unknown escape \\") +
                          text[i]);
    }
  }
  return out;
}

}  // namespace markov
