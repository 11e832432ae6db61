#pragma once

#include <compare>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sitsent {

enum class Genre { tweet, sms, news_article, newswire, blog };

std::string_view to_string(Genre g);
std::optional<Genre> parse_genre(std::string_view s);

enum class Emotion { fear, anger, joy };

std::string_view to_string(Emotion e);
std::optional<Emotion> parse_emotion(std::string_view s);

using EmotionSet = std::set<Emotion>;

std::string format_emotions(const EmotionSet& e);

enum class Polarity { negative, positive };

// Who expresses a sentiment. Encoded as `author`, `ent:<id>` or `unspecified`.
struct Source {
  enum class Kind { author, entity, unspecified };
  Kind kind = Kind::author;
  std::string entity_id;

  static Source author() { return {}; }
  static Source entity(std::string id) { return {Kind::entity, std::move(id)}; }
  static Source unspecified() { return {Kind::unspecified, {}}; }

  auto operator<=>(const Source&) const = default;
};

// What the sentiment is about. Encoded as `frame:<id>` or `ent:<id>`.
struct Target {
  enum class Kind { frame, entity };
  Kind kind = Kind::frame;
  std::string id;

  static Target frame(std::string id) { return {Kind::frame, std::move(id)}; }
  static Target entity(std::string id) { return {Kind::entity, std::move(id)}; }

  auto operator<=>(const Target&) const = default;
};

std::string encode(const Source& s);
std::string encode(const Target& t);
std::optional<Source> decode_source(std::string_view s);
std::optional<Target> decode_target(std::string_view s);

struct Segment {
  std::string segment_id;
  std::size_t index = 0;
  std::string text;

  bool operator==(const Segment&) const = default;
};

struct Document {
  std::string doc_id;
  std::string language;
  Genre genre = Genre::news_article;
  std::vector<Segment> segments;
  bool is_translation = false;
  std::optional<std::string> source_doc_id;

  const Segment* find_segment(std::string_view segment_id) const;
  bool operator==(const Document&) const = default;
};

struct SituationFrame {
  std::string frame_id;
  std::string doc_id;
  std::string sf_type;
  std::optional<std::string> location;
  // Opaque status fields (urgency, resolution, ...). Never interpreted.
  std::map<std::string, std::string> status;

  bool operator==(const SituationFrame&) const = default;
};

struct SentimentAnnotation {
  std::string annotator_id;
  std::string doc_id;
  std::string segment_id;
  double polarity_score = -1.0;
  EmotionSet emotions;
  Source source;
  Target target;

  Polarity polarity() const {
    return polarity_score > 0 ? Polarity::positive : Polarity::negative;
  }
  bool operator==(const SentimentAnnotation&) const = default;
};

struct SentimentOutput {
  std::string doc_id;
  std::string segment_id;
  Polarity polarity = Polarity::negative;
  EmotionSet emotions;
  Source source;
  Target target;
  std::string system_id;

  bool operator==(const SentimentOutput&) const = default;
};

// The header line: declared frame-type inventory and annotator ids. An empty
// annotator list means "any annotator".
struct CorpusHeader {
  std::vector<std::string> sf_types;
  std::vector<std::string> annotators;

  bool operator==(const CorpusHeader&) const = default;
};

// Shipped when a corpus omits its header: the three frame types the task
// description names, padded to eleven with unnamed placeholders.
const std::vector<std::string>& default_sf_inventory();

// Immutable after construction. Lookup indices are built once; on duplicate
// ids the first record wins (validate_corpus reports the duplicate).
class Corpus {
 public:
  Corpus() = default;
  Corpus(CorpusHeader header, std::vector<Document> documents,
         std::vector<SituationFrame> frames,
         std::vector<SentimentAnnotation> annotations);

  const CorpusHeader& header() const { return header_; }
  const std::vector<Document>& documents() const { return documents_; }
  const std::vector<SituationFrame>& frames() const { return frames_; }
  const std::vector<SentimentAnnotation>& annotations() const {
    return annotations_;
  }
  const std::vector<std::string>& sf_type_inventory() const {
    return header_.sf_types;
  }

  const Document* find_document(std::string_view doc_id) const;
  const SituationFrame* find_frame(std::string_view frame_id) const;
  // Frames attached to a document, in file order.
  std::vector<const SituationFrame*> frames_of(std::string_view doc_id) const;
  std::vector<const SentimentAnnotation*> annotations_of(
      std::string_view doc_id) const;

 private:
  void build_index();

  CorpusHeader header_;
  std::vector<Document> documents_;
  std::vector<SituationFrame> frames_;
  std::vector<SentimentAnnotation> annotations_;
  std::unordered_map<std::string, std::size_t> doc_index_;
  std::unordered_map<std::string, std::size_t> frame_index_;
  std::unordered_map<std::string, std::vector<std::size_t>> frames_by_doc_;
  std::unordered_map<std::string, std::vector<std::size_t>> anns_by_doc_;
};

// Record-set equality: same header, and the same documents, frames and
// annotations irrespective of record order.
bool same_records(const Corpus& a, const Corpus& b);

struct CorpusCounts {
  std::size_t documents = 0;
  std::size_t segments = 0;
  std::size_t frames = 0;
  std::size_t annotations = 0;
  // Fraction of annotations with negative polarity, in percent.
  double percent_negative = 0.0;
};

// Per-language counts (document / frame / sentiment / %neg table shape),
// plus a "total" entry.
std::map<std::string, CorpusCounts> count_by_language(const Corpus& c);

// Σ_d |SF_d| × |d|: size of the (frame, segment) pair dataset.
std::size_t pair_count(const Corpus& c);

struct Violation {
  std::string record_id;
  std::string rule;
  std::string detail;
};

std::vector<Violation> validate_corpus(const Corpus& c);

// Polarity scores live on {-3, -2.5, ..., -0.5, 0.5, ..., 3}.
bool on_polarity_grid(double score);

Corpus parse_corpus(std::istream& in);
Corpus parse_corpus(std::string_view text);
std::string serialize_corpus(const Corpus& c);

// Translation file: `TRA` records followed by their `TSEG` lines.
struct TranslationRecord {
  std::string source_doc_id;
  std::string new_doc_id;
  std::string language;
  std::vector<std::string> texts;  // by segment index
};

std::vector<TranslationRecord> parse_translations(std::istream& in);
std::vector<TranslationRecord> parse_translations(std::string_view text);
std::string serialize_translations(const std::vector<TranslationRecord>& t);

Corpus merge_translations(const Corpus& c,
                          const std::vector<TranslationRecord>& translations);

// Dual-annotation reference, partitioned by annotator in header order.
struct ReferenceSet {
  std::vector<std::string> annotators;
  std::map<std::string, std::vector<SentimentAnnotation>> by_annotator;
};

ReferenceSet parse_reference(std::istream& in);
ReferenceSet parse_reference(std::string_view text);

// Helpers shared by the line-oriented formats.
std::string escape_field(std::string_view s);
std::string unescape_field(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, char sep);
std::string format_number(double v);

}  // namespace sitsent
