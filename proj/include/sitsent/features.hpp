#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace sitsent {

using TokenSequence = std::vector<std::string>;

// Lowercases (ASCII and Latin-1 letters), splits on whitespace and trims
// punctuation from both ends of every token. Interior punctuation survives,
// and a leading '#' or '@' is kept when a word follows it.
TokenSequence tokenize(std::string_view text);

// Unigrams followed by space-joined bigrams.
std::vector<std::string> ngrams(const TokenSequence& tokens);

using SparseVector = std::vector<std::pair<std::uint32_t, double>>;

class TfidfModel {
 public:
  TfidfModel() = default;
  TfidfModel(std::vector<std::string> terms, std::vector<double> idf,
             std::size_t num_fit_docs);

  std::size_t size() const { return terms_.size(); }
  std::size_t num_fit_docs() const { return num_fit_docs_; }
  const std::vector<std::string>& terms() const { return terms_; }
  const std::vector<double>& idf() const { return idf_; }
  std::optional<std::uint32_t> column(std::string_view term) const;

 private:
  std::vector<std::string> terms_;  // column order
  std::vector<double> idf_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::size_t num_fit_docs_ = 0;
};

// Vocabulary: unigrams and bigrams with document frequency >= min_df, columns
// in lexicographic order. idf(t) = ln((1 + N) / (1 + df(t))) + 1.
TfidfModel fit_tfidf(const std::vector<TokenSequence>& segments,
                     std::size_t min_df = 1);

// Raw counts times idf, L2-normalised, sorted by column. Out-of-vocabulary
// n-grams are ignored; an all-OOV input yields the empty (zero) vector.
SparseVector transform_tfidf(const TfidfModel& m, const TokenSequence& s);

class EmbeddingTable {
 public:
  explicit EmbeddingTable(std::size_t dimension) : dimension_(dimension) {}

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return vectors_.size(); }
  const std::vector<double>* find(std::string_view word) const;
  // Returns false (and keeps the existing vector) on a duplicate word.
  bool add(std::string word, std::vector<double> vec);

 private:
  std::size_t dimension_;
  std::unordered_map<std::string, std::vector<double>> vectors_;
};

// "word v1 ... vD" per line with an optional leading "count dim" header.
EmbeddingTable load_embeddings(std::istream& in);
EmbeddingTable load_embeddings(std::string_view text);

std::vector<double> embed_segment(const EmbeddingTable& t,
                                  const TokenSequence& s);

class Lexicon {
 public:
  Lexicon() = default;
  void add_category(std::string name, std::set<std::string> words);

  std::size_t category_count() const { return names_.size(); }
  const std::vector<std::string>& category_names() const { return names_; }
  std::optional<std::size_t> category_index(std::string_view name) const;
  const std::set<std::string>& words(std::size_t category) const {
    return words_[category];
  }

 private:
  std::vector<std::string> names_;
  std::vector<std::set<std::string>> words_;
};

// `category<TAB>word1,word2,...` per line.
Lexicon load_lexicon(std::istream& in);
Lexicon load_lexicon(std::string_view text);

// Component c is the share of tokens that belong to category c.
std::vector<double> lexicon_features(const Lexicon& l, const TokenSequence& s);

// Block lengths in the fixed order [tfidf | embedding | lexicon].
struct FeatureLayout {
  std::size_t tfidf = 0;
  std::size_t embedding = 0;
  std::size_t lexicon = 0;

  std::size_t total() const { return tfidf + embedding + lexicon; }
  std::size_t dense() const { return embedding + lexicon; }
  bool operator==(const FeatureLayout&) const = default;
};

std::string describe(const FeatureLayout& l);

// Sparse TF-IDF block plus the dense embedding and lexicon blocks. Dense
// values are stored from column layout.tfidf onwards.
struct FeatureVector {
  FeatureLayout layout;
  SparseVector sparse;
  std::vector<double> dense;

  std::size_t size() const { return layout.total(); }
  std::vector<double> to_dense() const;
};

struct FeatureBlocks {
  bool tfidf = true;
  bool embedding = false;
  bool lexicon = false;

  bool operator==(const FeatureBlocks&) const = default;
};

FeatureBlocks parse_feature_blocks(std::string_view csv);
std::string format_feature_blocks(const FeatureBlocks& b);

// Fitted or loaded resources behind each block. Shared, never mutated.
struct FeatureParts {
  std::shared_ptr<const TfidfModel> tfidf;
  std::shared_ptr<const EmbeddingTable> embeddings;
  std::shared_ptr<const Lexicon> lexicon;

  FeatureLayout layout_for(const FeatureBlocks& blocks) const;
};

FeatureVector assemble_features(const FeatureBlocks& blocks,
                                const FeatureParts& parts,
                                const TokenSequence& s);

// Binds a block selection to the layout it was fitted with, and rejects
// parts whose dimensions no longer agree with it.
class FeatureAssembler {
 public:
  FeatureAssembler(FeatureBlocks blocks, FeatureLayout layout)
      : blocks_(blocks), layout_(layout) {}

  const FeatureBlocks& blocks() const { return blocks_; }
  const FeatureLayout& layout() const { return layout_; }
  FeatureVector assemble(const FeatureParts& parts,
                         const TokenSequence& s) const;

 private:
  FeatureBlocks blocks_;
  FeatureLayout layout_;
};

}  // namespace sitsent
