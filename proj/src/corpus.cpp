#include "sitsent/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <tuple>

#include "sitsent/error.hpp"

namespace sitsent {

std::string_view to_string(Genre g) {
  switch (g) {
    case Genre::tweet: return "tweet";
    case Genre::sms: return "sms";
    case Genre::news_article: return "news_article";
    case Genre::newswire: return "newswire";
    case Genre::blog: return "blog";
  }
  return "unknown";
}

std::optional<Genre> parse_genre(std::string_view s) {
  for (Genre g : {Genre::tweet, Genre::sms, Genre::news_article,
                  Genre::newswire, Genre::blog}) {
    if (to_string(g) == s) return g;
  }
  return std::nullopt;
}

std::string_view to_string(Emotion e) {
  switch (e) {
    case Emotion::fear: return "fear";
    case Emotion::anger: return "anger";
    case Emotion::joy: return "joy";
  }
  return "unknown";
}

std::optional<Emotion> parse_emotion(std::string_view s) {
  for (Emotion e : {Emotion::fear, Emotion::anger, Emotion::joy}) {
    if (to_string(e) == s) return e;
  }
  return std::nullopt;
}

std::string format_emotions(const EmotionSet& e) {
  std::string out;
  for (Emotion x : e) {
    if (!out.empty()) out += ',';
    out += to_string(x);
  }
  return out;
}

std::string encode(const Source& s) {
  switch (s.kind) {
    case Source::Kind::author: return "author";
    case Source::Kind::unspecified: return "unspecified";
    case Source::Kind::entity: return "ent:" + s.entity_id;
  }
  return {};
}

std::string encode(const Target& t) {
  return (t.kind == Target::Kind::frame ? "frame:" : "ent:") + t.id;
}

std::optional<Source> decode_source(std::string_view s) {
  if (s == "author") return Source::author();
  if (s == "unspecified") return Source::unspecified();
  if (s.starts_with("ent:") && s.size() > 4) {
    return Source::entity(std::string(s.substr(4)));
  }
  return std::nullopt;
}

std::optional<Target> decode_target(std::string_view s) {
  if (s.starts_with("frame:") && s.size() > 6) {
    return Target::frame(std::string(s.substr(6)));
  }
  if (s.starts_with("ent:") && s.size() > 4) {
    return Target::entity(std::string(s.substr(4)));
  }
  return std::nullopt;
}

const Segment* Document::find_segment(std::string_view segment_id) const {
  for (const auto& s : segments) {
    if (s.segment_id == segment_id) return &s;
  }
  return nullptr;
}

const std::vector<std::string>& default_sf_inventory() {
  static const std::vector<std::string> inventory = {
      "medical_need", "shelter",    "infrastructure", "unnamed_04",
      "unnamed_05",   "unnamed_06", "unnamed_07",     "unnamed_08",
      "unnamed_09",   "unnamed_10", "unnamed_11"};
  return inventory;
}

Corpus::Corpus(CorpusHeader header, std::vector<Document> documents,
               std::vector<SituationFrame> frames,
               std::vector<SentimentAnnotation> annotations)
    : header_(std::move(header)),
      documents_(std::move(documents)),
      frames_(std::move(frames)),
      annotations_(std::move(annotations)) {
  build_index();
}

void Corpus::build_index() {
  for (std::size_t i = 0; i < documents_.size(); ++i) {
    doc_index_.try_emplace(documents_[i].doc_id, i);
  }
  for (std::size_t i = 0; i < frames_.size(); ++i) {
    frame_index_.try_emplace(frames_[i].frame_id, i);
    frames_by_doc_[frames_[i].doc_id].push_back(i);
  }
  for (std::size_t i = 0; i < annotations_.size(); ++i) {
    anns_by_doc_[annotations_[i].doc_id].push_back(i);
  }
}

const Document* Corpus::find_document(std::string_view doc_id) const {
  auto it = doc_index_.find(std::string(doc_id));
  return it == doc_index_.end() ? nullptr : &documents_[it->second];
}

const SituationFrame* Corpus::find_frame(std::string_view frame_id) const {
  auto it = frame_index_.find(std::string(frame_id));
  return it == frame_index_.end() ? nullptr : &frames_[it->second];
}

std::vector<const SituationFrame*> Corpus::frames_of(
    std::string_view doc_id) const {
  std::vector<const SituationFrame*> out;
  auto it = frames_by_doc_.find(std::string(doc_id));
  if (it != frames_by_doc_.end()) {
    for (std::size_t i : it->second) out.push_back(&frames_[i]);
  }
  return out;
}

std::vector<const SentimentAnnotation*> Corpus::annotations_of(
    std::string_view doc_id) const {
  std::vector<const SentimentAnnotation*> out;
  auto it = anns_by_doc_.find(std::string(doc_id));
  if (it != anns_by_doc_.end()) {
    for (std::size_t i : it->second) out.push_back(&annotations_[i]);
  }
  return out;
}

namespace {

template <typename T, typename Less>
std::vector<T> sorted(std::vector<T> v, Less less) {
  std::sort(v.begin(), v.end(), less);
  return v;
}

}  // namespace

bool same_records(const Corpus& a, const Corpus& b) {
  if (!(a.header() == b.header())) return false;
  auto by_doc = [](const Document& x, const Document& y) {
    return x.doc_id < y.doc_id;
  };
  auto by_frame = [](const SituationFrame& x, const SituationFrame& y) {
    return x.frame_id < y.frame_id;
  };
  auto by_ann = [](const SentimentAnnotation& x, const SentimentAnnotation& y) {
    return std::tie(x.annotator_id, x.doc_id, x.segment_id, x.polarity_score,
                    x.emotions, x.source, x.target) <
           std::tie(y.annotator_id, y.doc_id, y.segment_id, y.polarity_score,
                    y.emotions, y.source, y.target);
  };
  return sorted(a.documents(), by_doc) == sorted(b.documents(), by_doc) &&
         sorted(a.frames(), by_frame) == sorted(b.frames(), by_frame) &&
         sorted(a.annotations(), by_ann) == sorted(b.annotations(), by_ann);
}

std::map<std::string, CorpusCounts> count_by_language(const Corpus& c) {
  std::map<std::string, CorpusCounts> out;
  std::map<std::string, std::size_t> negatives;
  for (const auto& d : c.documents()) {
    for (const std::string& key : {d.language, std::string("total")}) {
      auto& row = out[key];
      ++row.documents;
      row.segments += d.segments.size();
    }
  }
  for (const auto& f : c.frames()) {
    const Document* d = c.find_document(f.doc_id);
    if (d == nullptr) continue;
    ++out[d->language].frames;
    ++out["total"].frames;
  }
  for (const auto& a : c.annotations()) {
    const Document* d = c.find_document(a.doc_id);
    if (d == nullptr) continue;
    for (const std::string& key : {d->language, std::string("total")}) {
      ++out[key].annotations;
      if (a.polarity() == Polarity::negative) ++negatives[key];
    }
  }
  for (auto& [lang, row] : out) {
    row.percent_negative =
        row.annotations == 0
            ? 0.0
            : 100.0 * static_cast<double>(negatives[lang]) /
                  static_cast<double>(row.annotations);
  }
  return out;
}

std::size_t pair_count(const Corpus& c) {
  std::size_t total = 0;
  for (const auto& d : c.documents()) {
    total += c.frames_of(d.doc_id).size() * d.segments.size();
  }
  return total;
}

bool on_polarity_grid(double score) {
  if (!std::isfinite(score) || score == 0.0) return false;
  if (score < -3.0 || score > 3.0) return false;
  const double twice = score * 2.0;
  return twice == std::round(twice);
}

std::vector<Violation> validate_corpus(const Corpus& c) {
  std::vector<Violation> out;
  auto add = [&](std::string id, std::string rule, std::string detail) {
    out.push_back({std::move(id), std::move(rule), std::move(detail)});
  };

  std::set<std::string> doc_ids;
  for (const auto& d : c.documents()) {
    if (d.doc_id.empty()) add("<document>", "doc_id_nonempty", "empty doc_id");
    if (!doc_ids.insert(d.doc_id).second) {
      add(d.doc_id, "doc_id_unique", "duplicate doc_id");
    }
    if (d.segments.empty()) {
      add(d.doc_id, "segments_nonempty", "document has no segments");
    }
    if (d.genre == Genre::tweet && d.segments.size() > 1) {
      add(d.doc_id, "tweet_single_segment",
          "tweet has " + std::to_string(d.segments.size()) + " segments");
    }
    if (d.is_translation) {
      if (!d.source_doc_id || c.find_document(*d.source_doc_id) == nullptr) {
        add(d.doc_id, "translation_source",
            "translation source does not resolve");
      }
    }
    std::set<std::string> seg_ids;
    for (std::size_t i = 0; i < d.segments.size(); ++i) {
      const Segment& s = d.segments[i];
      const std::string id = d.doc_id + "/" + s.segment_id;
      if (s.index != i) {
        add(id, "segment_index_contiguous",
            "index " + std::to_string(s.index) + " at position " +
                std::to_string(i));
      }
      if (!seg_ids.insert(s.segment_id).second) {
        add(id, "segment_id_unique", "duplicate segment_id");
      }
      if (s.text.find_first_not_of(" \t\r\n") == std::string::npos) {
        add(id, "segment_text_nonempty", "blank segment text");
      }
    }
  }

  const std::set<std::string> inventory(c.sf_type_inventory().begin(),
                                        c.sf_type_inventory().end());
  std::set<std::string> frame_ids;
  for (const auto& f : c.frames()) {
    if (!frame_ids.insert(f.frame_id).second) {
      add(f.frame_id, "frame_id_unique", "duplicate frame_id");
    }
    if (c.find_document(f.doc_id) == nullptr) {
      add(f.frame_id, "frame_doc_resolves", "missing document " + f.doc_id);
    }
    if (!inventory.contains(f.sf_type)) {
      add(f.frame_id, "sf_type_inventory", "unknown type " + f.sf_type);
    }
  }

  const auto& declared = c.header().annotators;
  for (std::size_t i = 0; i < c.annotations().size(); ++i) {
    const auto& a = c.annotations()[i];
    const std::string id = "ann#" + std::to_string(i) + "(" + a.annotator_id +
                           ":" + a.doc_id + "/" + a.segment_id + ")";
    if (!on_polarity_grid(a.polarity_score)) {
      add(id, "polarity_grid", "score " + format_number(a.polarity_score));
    }
    if (!declared.empty() &&
        std::find(declared.begin(), declared.end(), a.annotator_id) ==
            declared.end()) {
      add(id, "annotator_declared", "undeclared annotator");
    }
    const Document* d = c.find_document(a.doc_id);
    if (d == nullptr || d->find_segment(a.segment_id) == nullptr) {
      add(id, "annotation_segment_resolves", "missing segment");
    }
    if (a.target.kind == Target::Kind::frame) {
      const SituationFrame* f = c.find_frame(a.target.id);
      if (f == nullptr || f->doc_id != a.doc_id) {
        add(id, "annotation_frame_resolves",
            "frame " + a.target.id + " not in document " + a.doc_id);
      }
    }
  }
  return out;
}

Corpus merge_translations(const Corpus& c,
                          const std::vector<TranslationRecord>& translations) {
  if (translations.empty()) return c;

  std::vector<Document> docs = c.documents();
  std::vector<SituationFrame> frames = c.frames();
  std::vector<SentimentAnnotation> anns = c.annotations();
  std::set<std::string> ids;
  for (const auto& d : docs) ids.insert(d.doc_id);

  for (const auto& t : translations) {
    const Document* src = c.find_document(t.source_doc_id);
    if (src == nullptr) {
      throw ReferenceError("translation " + t.new_doc_id +
                           " references missing source document '" +
                           t.source_doc_id + "'");
    }
    if (t.texts.size() != src->segments.size()) {
      throw AlignmentError("translation " + t.new_doc_id + " has " +
                           std::to_string(t.texts.size()) +
                           " segments but source " + src->doc_id + " has " +
                           std::to_string(src->segments.size()));
    }
    if (!ids.insert(t.new_doc_id).second) {
      throw IntegrityError("duplicate doc_id '" + t.new_doc_id +
                           "' from translation of " + t.source_doc_id);
    }

    Document doc;
    doc.doc_id = t.new_doc_id;
    doc.language = t.language;
    doc.genre = src->genre;
    doc.is_translation = true;
    doc.source_doc_id = src->doc_id;
    for (std::size_t i = 0; i < src->segments.size(); ++i) {
      doc.segments.push_back(
          {src->segments[i].segment_id, src->segments[i].index, t.texts[i]});
    }

    std::map<std::string, std::string> renamed;
    for (const SituationFrame* f : c.frames_of(src->doc_id)) {
      SituationFrame clone = *f;
      clone.frame_id = f->frame_id + "~" + t.new_doc_id;
      clone.doc_id = t.new_doc_id;
      renamed[f->frame_id] = clone.frame_id;
      frames.push_back(std::move(clone));
    }
    for (const SentimentAnnotation* a : c.annotations_of(src->doc_id)) {
      SentimentAnnotation clone = *a;
      clone.doc_id = t.new_doc_id;
      if (clone.target.kind == Target::Kind::frame) {
        auto it = renamed.find(clone.target.id);
        if (it != renamed.end()) clone.target.id = it->second;
      }
      anns.push_back(std::move(clone));
    }
    docs.push_back(std::move(doc));
  }
  return Corpus(c.header(), std::move(docs), std::move(frames),
                std::move(anns));
}

std::string escape_field(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char ch : s) {
    switch (ch) {
      case '\\': out += "\\\\"; break;
      case '\t': out += "\\t"; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      default: out += ch;
    }
  }
  return out;
}

std::string unescape_field(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '\\' && i + 1 < s.size()) {
      switch (s[i + 1]) {
        case 't': out += '\t'; ++i; continue;
        case 'n': out += '\n'; ++i; continue;
        case 'r': out += '\r'; ++i; continue;
        case '\\': out += '\\'; ++i; continue;
        default: break;
      }
    }
    out += s[i];
  }
  return out;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(s.substr(start));
      return out;
    }
    out.emplace_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string format_number(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

}  // namespace sitsent
