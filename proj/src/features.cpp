#include "sitsent/features.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "sitsent/corpus.hpp"
#include "sitsent/error.hpp"

namespace sitsent {

namespace {

struct CodePoint {
  char32_t value;
  std::size_t begin;
  std::size_t length;
};

// Lenient UTF-8 decoding: invalid bytes pass through as single code points.
std::vector<CodePoint> decode_utf8(std::string_view s) {
  std::vector<CodePoint> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    char32_t cp = b0;
    if (b0 >= 0xC0 && b0 < 0xE0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if (b0 >= 0xE0 && b0 < 0xF0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if (b0 >= 0xF0 && b0 < 0xF8) {
      len = 4;
      cp = b0 & 0x07;
    }
    bool ok = len == 1 || i + len <= s.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto b = static_cast<unsigned char>(s[i + k]);
      if ((b & 0xC0) != 0x80) ok = false;
      cp = (cp << 6) | (b & 0x3F);
    }
    if (!ok) {
      len = 1;
      cp = b0;
    }
    out.push_back({cp, i, len});
    i += len;
  }
  return out;
}

bool is_space(char32_t c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v' || c == 0xA0;
}

bool is_punct(char32_t c) {
  if (c < 0x80) {
    return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) ||
           (c >= 0x5B && c <= 0x60) || (c >= 0x7B && c <= 0x7E);
  }
  return c == 0xA1 || c == 0xAB || c == 0xBB || c == 0xBF ||
         (c >= 0x2010 && c <= 0x205E) || (c >= 0x3000 && c <= 0x303F);
}

void append_lower(std::string& out, std::string_view raw, const CodePoint& cp) {
  if (cp.value >= 'A' && cp.value <= 'Z') {
    out += static_cast<char>(cp.value + 0x20);
  } else if (cp.value >= 0xC0 && cp.value <= 0xDE && cp.value != 0xD7 &&
             cp.length == 2) {
    const char32_t lower = cp.value + 0x20;
    out += static_cast<char>(0xC0 | (lower >> 6));
    out += static_cast<char>(0x80 | (lower & 0x3F));
  } else {
    out.append(raw.substr(cp.begin, cp.length));
  }
}

void emit_token(std::string_view raw, const std::vector<CodePoint>& cps,
                std::size_t first, std::size_t last, TokenSequence& out) {
  while (last > first && is_punct(cps[last - 1].value)) --last;
  while (first < last && is_punct(cps[first].value)) {
    const char32_t c = cps[first].value;
    if ((c == '#' || c == '@') && first + 1 < last &&
        !is_punct(cps[first + 1].value)) {
      break;
    }
    ++first;
  }
  if (first == last) return;
  std::string token;
  for (std::size_t i = first; i < last; ++i) append_lower(token, raw, cps[i]);
  out.push_back(std::move(token));
}

}  // namespace

TokenSequence tokenize(std::string_view text) {
  const std::vector<CodePoint> cps = decode_utf8(text);
  TokenSequence out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= cps.size(); ++i) {
    if (i == cps.size() || is_space(cps[i].value)) {
      if (i > start) emit_token(text, cps, start, i, out);
      start = i + 1;
    }
  }
  return out;
}

std::vector<std::string> ngrams(const TokenSequence& tokens) {
  std::vector<std::string> out(tokens.begin(), tokens.end());
  for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
    out.push_back(tokens[i] + " " + tokens[i + 1]);
  }
  return out;
}

TfidfModel::TfidfModel(std::vector<std::string> terms, std::vector<double> idf,
                       std::size_t num_fit_docs)
    : terms_(std::move(terms)), idf_(std::move(idf)), num_fit_docs_(num_fit_docs) {
  if (terms_.size() != idf_.size()) {
    throw LayoutError("tfidf model has " + std::to_string(terms_.size()) +
                      " terms but " + std::to_string(idf_.size()) +
                      " idf weights");
  }
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    index_.emplace(terms_[i], static_cast<std::uint32_t>(i));
  }
}

std::optional<std::uint32_t> TfidfModel::column(std::string_view term) const {
  auto it = index_.find(std::string(term));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TfidfModel fit_tfidf(const std::vector<TokenSequence>& segments,
                     std::size_t min_df) {
  if (segments.empty()) {
    throw DegenerateDataError("cannot fit tfidf on an empty segment list");
  }
  std::map<std::string, std::size_t> df;
  for (const auto& s : segments) {
    std::vector<std::string> grams = ngrams(s);
    std::sort(grams.begin(), grams.end());
    grams.erase(std::unique(grams.begin(), grams.end()), grams.end());
    for (auto& g : grams) ++df[std::move(g)];
  }
  const double n = static_cast<double>(segments.size());
  std::vector<std::string> terms;
  std::vector<double> idf;
  for (const auto& [term, count] : df) {
    if (count < min_df) continue;
    terms.push_back(term);
    idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) +
                  1.0);
  }
  return TfidfModel(std::move(terms), std::move(idf), segments.size());
}

SparseVector transform_tfidf(const TfidfModel& m, const TokenSequence& s) {
  std::map<std::uint32_t, double> counts;
  for (const std::string& g : ngrams(s)) {
    if (auto col = m.column(g)) counts[*col] += 1.0;
  }
  SparseVector out;
  double norm2 = 0.0;
  for (const auto& [col, count] : counts) {
    const double v = count * m.idf()[col];
    out.emplace_back(col, v);
    norm2 += v * v;
  }
  if (norm2 > 0.0) {
    const double inv = 1.0 / std::sqrt(norm2);
    for (auto& [col, v] : out) v *= inv;
  }
  return out;
}

const std::vector<double>* EmbeddingTable::find(std::string_view word) const {
  auto it = vectors_.find(std::string(word));
  return it == vectors_.end() ? nullptr : &it->second;
}

bool EmbeddingTable::add(std::string word, std::vector<double> vec) {
  if (vec.size() != dimension_) {
    throw LayoutError("embedding for '" + word + "' has dimension " +
                      std::to_string(vec.size()) + ", table has " +
                      std::to_string(dimension_));
  }
  return vectors_.try_emplace(std::move(word), std::move(vec)).second;
}

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

template <typename T>
bool parse_whole(const std::string& s, T& v) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && p == s.data() + s.size();
}

}  // namespace

EmbeddingTable load_embeddings(std::istream& in) {
  std::string line;
  std::size_t number = 0;
  std::optional<EmbeddingTable> table;
  while (std::getline(in, line)) {
    ++number;
    const std::vector<std::string> fields = split_ws(line);
    if (fields.empty()) continue;
    if (!table && fields.size() == 2) {
      std::size_t count = 0;
      std::size_t dim = 0;
      if (parse_whole(fields[0], count) && parse_whole(fields[1], dim)) {
        if (dim == 0) throw FormatError(number, "embedding dimension is zero");
        table.emplace(dim);
        continue;
      }
    }
    if (fields.size() < 2) {
      throw FormatError(number, "embedding row has no values");
    }
    if (!table) table.emplace(fields.size() - 1);
    if (fields.size() - 1 != table->dimension()) {
      throw FormatError(number, "embedding row has " +
                                    std::to_string(fields.size() - 1) +
                                    " values, expected " +
                                    std::to_string(table->dimension()));
    }
    std::vector<double> vec(table->dimension());
    for (std::size_t i = 0; i < vec.size(); ++i) {
      if (!parse_whole(fields[i + 1], vec[i]) || !std::isfinite(vec[i])) {
        throw FormatError(number, "bad embedding value '" + fields[i + 1] + "'");
      }
    }
    table->add(fields[0], std::move(vec));
  }
  if (!table) throw FormatError(number, "embedding file is empty");
  return std::move(*table);
}

EmbeddingTable load_embeddings(std::string_view text) {
  std::istringstream in{std::string(text)};
  return load_embeddings(in);
}

std::vector<double> embed_segment(const EmbeddingTable& t,
                                  const TokenSequence& s) {
  std::vector<double> sum(t.dimension(), 0.0);
  std::size_t hits = 0;
  for (const auto& tok : s) {
    if (const auto* v = t.find(tok)) {
      for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += (*v)[i];
      ++hits;
    }
  }
  if (hits > 0) {
    for (double& x : sum) x /= static_cast<double>(hits);
  }
  return sum;
}

void Lexicon::add_category(std::string name, std::set<std::string> words) {
  if (category_index(name)) {
    throw IntegrityError("duplicate lexicon category '" + name + "'");
  }
  names_.push_back(std::move(name));
  words_.push_back(std::move(words));
}

std::optional<std::size_t> Lexicon::category_index(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return i;
  }
  return std::nullopt;
}

Lexicon load_lexicon(std::istream& in) {
  Lexicon lex;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw FormatError(number, "lexicon line needs `category<TAB>words`");
    }
    std::set<std::string> words;
    for (const std::string& w : split(std::string_view(line).substr(tab + 1), ',')) {
      if (!w.empty()) words.insert(w);
    }
    if (words.empty()) {
      throw FormatError(number, "lexicon category '" + line.substr(0, tab) +
                                    "' has an empty word list");
    }
    try {
      lex.add_category(line.substr(0, tab), std::move(words));
    } catch (const IntegrityError& e) {
      throw IntegrityError("line " + std::to_string(number) + ": " + e.what());
    }
  }
  return lex;
}

Lexicon load_lexicon(std::string_view text) {
  std::istringstream in{std::string(text)};
  return load_lexicon(in);
}

std::vector<double> lexicon_features(const Lexicon& l, const TokenSequence& s) {
  std::vector<double> out(l.category_count(), 0.0);
  if (s.empty()) return out;
  for (std::size_t c = 0; c < out.size(); ++c) {
    const auto& words = l.words(c);
    std::size_t hits = 0;
    for (const auto& tok : s) hits += words.contains(tok) ? 1 : 0;
    out[c] = static_cast<double>(hits) / static_cast<double>(s.size());
  }
  return out;
}

std::string describe(const FeatureLayout& l) {
  return "tfidf=" + std::to_string(l.tfidf) +
         ",embedding=" + std::to_string(l.embedding) +
         ",lexicon=" + std::to_string(l.lexicon);
}

std::vector<double> FeatureVector::to_dense() const {
  std::vector<double> out(layout.total(), 0.0);
  for (const auto& [col, v] : sparse) out[col] = v;
  std::copy(dense.begin(), dense.end(), out.begin() + layout.tfidf);
  return out;
}

FeatureBlocks parse_feature_blocks(std::string_view csv) {
  FeatureBlocks b{false, false, false};
  for (const std::string& name : split(csv, ',')) {
    if (name == "tfidf") {
      b.tfidf = true;
    } else if (name == "embedding") {
      b.embedding = true;
    } else if (name == "lexicon") {
      b.lexicon = true;
    } else if (!name.empty()) {
      throw ConfigError("unknown feature block '" + name + "'");
    }
  }
  if (!b.tfidf && !b.embedding && !b.lexicon) {
    throw ConfigError("no feature block selected");
  }
  return b;
}

std::string format_feature_blocks(const FeatureBlocks& b) {
  std::vector<std::string> names;
  if (b.tfidf) names.emplace_back("tfidf");
  if (b.embedding) names.emplace_back("embedding");
  if (b.lexicon) names.emplace_back("lexicon");
  return join(names, ',');
}

FeatureLayout FeatureParts::layout_for(const FeatureBlocks& blocks) const {
  FeatureLayout l;
  if (blocks.tfidf) {
    if (!tfidf) throw ConfigError("tfidf block selected but no model fitted");
    l.tfidf = tfidf->size();
  }
  if (blocks.embedding) {
    if (!embeddings) {
      throw ConfigError("embedding block selected but no table loaded");
    }
    l.embedding = embeddings->dimension();
  }
  if (blocks.lexicon) {
    if (!lexicon) throw ConfigError("lexicon block selected but none loaded");
    l.lexicon = lexicon->category_count();
  }
  return l;
}

FeatureVector assemble_features(const FeatureBlocks& blocks,
                                const FeatureParts& parts,
                                const TokenSequence& s) {
  FeatureVector fv;
  fv.layout = parts.layout_for(blocks);
  if (blocks.tfidf) fv.sparse = transform_tfidf(*parts.tfidf, s);
  fv.dense.reserve(fv.layout.dense());
  if (blocks.embedding) {
    const auto e = embed_segment(*parts.embeddings, s);
    fv.dense.insert(fv.dense.end(), e.begin(), e.end());
  }
  if (blocks.lexicon) {
    const auto x = lexicon_features(*parts.lexicon, s);
    fv.dense.insert(fv.dense.end(), x.begin(), x.end());
  }
  return fv;
}

FeatureVector FeatureAssembler::assemble(const FeatureParts& parts,
                                         const TokenSequence& s) const {
  const FeatureLayout actual = parts.layout_for(blocks_);
  if (!(actual == layout_)) {
    throw LayoutError("feature layout mismatch: fitted " + describe(layout_) +
                      ", got " + describe(actual));
  }
  return assemble_features(blocks_, parts, s);
}

}  // namespace sitsent
