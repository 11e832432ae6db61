#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

#include "sitsent/corpus.hpp"
#include "sitsent/error.hpp"

namespace sitsent {

namespace {

struct Line {
  std::size_t number;
  std::vector<std::string> fields;
};

std::vector<Line> read_records(std::istream& in) {
  std::vector<Line> out;
  std::string raw;
  std::size_t number = 0;
  while (std::getline(in, raw)) {
    ++number;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (raw.empty()) continue;
    out.push_back({number, split(raw, '\t')});
  }
  return out;
}

void expect_arity(const Line& l, std::size_t lo, std::size_t hi) {
  const std::size_t n = l.fields.size();
  if (n < lo || n > hi) {
    throw ParseError(l.number, l.fields[0] + " record has " +
                                   std::to_string(n) + " fields, expected " +
                                   std::to_string(lo) +
                                   (lo == hi ? "" : "-" + std::to_string(hi)));
  }
}

void expect_nonempty(const Line& l, std::size_t i, const char* what) {
  if (l.fields[i].empty()) {
    throw ParseError(l.number, std::string("empty ") + what);
  }
}

std::size_t parse_index(const Line& l, std::size_t i) {
  const std::string& s = l.fields[i];
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw ParseError(l.number, "bad index '" + s + "'");
  }
  return v;
}

double parse_double(const Line& l, std::size_t i) {
  const std::string& s = l.fields[i];
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) {
    throw ParseError(l.number, "bad number '" + s + "'");
  }
  return v;
}

std::vector<std::string> parse_csv(std::string_view s) {
  if (s.empty()) return {};
  return split(s, ',');
}

CorpusHeader parse_header(const Line& l) {
  expect_arity(l, 2, 2);
  CorpusHeader h;
  bool saw_types = false;
  for (const std::string& part : split(l.fields[1], ';')) {
    if (part.empty()) continue;
    const auto eq = part.find('=');
    if (eq == std::string::npos) {
      throw ParseError(l.number, "header entry without '=': " + part);
    }
    const std::string key = part.substr(0, eq);
    const std::string value = part.substr(eq + 1);
    if (key == "sf_types") {
      h.sf_types = parse_csv(value);
      saw_types = true;
    } else if (key == "annotators") {
      h.annotators = parse_csv(value);
    } else {
      throw ParseError(l.number, "unknown header key '" + key + "'");
    }
  }
  if (!saw_types) h.sf_types = default_sf_inventory();
  return h;
}

SentimentAnnotation parse_annotation(const Line& l) {
  expect_arity(l, 8, 8);
  SentimentAnnotation a;
  a.annotator_id = l.fields[1];
  a.doc_id = l.fields[2];
  a.segment_id = l.fields[3];
  expect_nonempty(l, 1, "annotator_id");
  expect_nonempty(l, 2, "doc_id");
  expect_nonempty(l, 3, "segment_id");
  a.polarity_score = parse_double(l, 4);
  for (const std::string& e : parse_csv(l.fields[5])) {
    auto emo = parse_emotion(e);
    if (!emo) throw ParseError(l.number, "unknown emotion '" + e + "'");
    a.emotions.insert(*emo);
  }
  auto src = decode_source(l.fields[6]);
  if (!src) throw ParseError(l.number, "bad source '" + l.fields[6] + "'");
  auto tgt = decode_target(l.fields[7]);
  if (!tgt) throw ParseError(l.number, "bad target '" + l.fields[7] + "'");
  a.source = std::move(*src);
  a.target = std::move(*tgt);
  return a;
}

std::string location_of(std::size_t line) {
  return "line " + std::to_string(line);
}

}  // namespace

Corpus parse_corpus(std::istream& in) {
  const std::vector<Line> lines = read_records(in);

  CorpusHeader header;
  header.sf_types = default_sf_inventory();
  std::vector<Document> docs;
  std::vector<std::size_t> doc_lines;
  std::map<std::string, std::size_t> doc_pos;
  struct PendingSegment {
    std::size_t line;
    std::string doc_id;
    Segment seg;
  };
  std::vector<PendingSegment> segs;
  std::vector<std::pair<std::size_t, SituationFrame>> frames;
  std::vector<std::pair<std::size_t, SentimentAnnotation>> anns;

  for (std::size_t i = 0; i < lines.size(); ++i) {
    const Line& l = lines[i];
    const std::string& kind = l.fields[0];
    if (kind == "HDR") {
      if (i != 0) throw ParseError(l.number, "HDR must be the first record");
      header = parse_header(l);
    } else if (kind == "DOC") {
      expect_arity(l, 4, 5);
      expect_nonempty(l, 1, "doc_id");
      Document d;
      d.doc_id = l.fields[1];
      d.language = l.fields[2];
      auto genre = parse_genre(l.fields[3]);
      if (!genre) throw ParseError(l.number, "unknown genre '" + l.fields[3] + "'");
      d.genre = *genre;
      if (l.fields.size() == 5) {
        constexpr std::string_view tag = "translation_of=";
        if (!l.fields[4].starts_with(tag) || l.fields[4].size() == tag.size()) {
          throw ParseError(l.number, "bad DOC attribute '" + l.fields[4] + "'");
        }
        d.is_translation = true;
        d.source_doc_id = l.fields[4].substr(tag.size());
      }
      auto [it, inserted] = doc_pos.try_emplace(d.doc_id, docs.size());
      if (!inserted) {
        throw IntegrityError("duplicate doc_id '" + d.doc_id + "' at " +
                             location_of(l.number) + " (first at " +
                             location_of(doc_lines[it->second]) + ")");
      }
      docs.push_back(std::move(d));
      doc_lines.push_back(l.number);
    } else if (kind == "SEG") {
      expect_arity(l, 5, 5);
      expect_nonempty(l, 2, "segment_id");
      segs.push_back({l.number, l.fields[1],
                      {l.fields[2], parse_index(l, 3), unescape_field(l.fields[4])}});
    } else if (kind == "SF") {
      expect_arity(l, 4, 6);
      expect_nonempty(l, 1, "frame_id");
      SituationFrame f;
      f.frame_id = l.fields[1];
      f.doc_id = l.fields[2];
      f.sf_type = l.fields[3];
      if (l.fields.size() > 4 && !l.fields[4].empty()) {
        f.location = unescape_field(l.fields[4]);
      }
      if (l.fields.size() > 5) {
        for (const std::string& kv : split(l.fields[5], ';')) {
          if (kv.empty()) continue;
          const auto eq = kv.find('=');
          if (eq == std::string::npos) {
            throw ParseError(l.number, "status entry without '=': " + kv);
          }
          f.status[unescape_field(kv.substr(0, eq))] =
              unescape_field(kv.substr(eq + 1));
        }
      }
      frames.emplace_back(l.number, std::move(f));
    } else if (kind == "ANN") {
      anns.emplace_back(l.number, parse_annotation(l));
    } else {
      throw ParseError(l.number, "unknown record kind '" + kind + "'");
    }
  }

  for (auto& p : segs) {
    auto it = doc_pos.find(p.doc_id);
    if (it == doc_pos.end()) {
      throw ReferenceError("segment '" + p.seg.segment_id + "' at " +
                           location_of(p.line) +
                           " references missing document '" + p.doc_id + "'");
    }
    Document& d = docs[it->second];
    if (d.find_segment(p.seg.segment_id) != nullptr) {
      throw IntegrityError("duplicate segment_id '" + p.seg.segment_id +
                           "' in document '" + d.doc_id + "' at " +
                           location_of(p.line));
    }
    d.segments.push_back(std::move(p.seg));
  }
  for (const auto& d : docs) {
    if (d.is_translation && !doc_pos.contains(*d.source_doc_id)) {
      throw ReferenceError("document '" + d.doc_id +
                           "' is a translation of missing document '" +
                           *d.source_doc_id + "'");
    }
  }

  std::map<std::string, std::size_t> frame_pos;
  std::vector<SituationFrame> frame_list;
  for (auto& [line, f] : frames) {
    if (!doc_pos.contains(f.doc_id)) {
      throw ReferenceError("frame '" + f.frame_id + "' at " +
                           location_of(line) +
                           " references missing document '" + f.doc_id + "'");
    }
    if (!frame_pos.try_emplace(f.frame_id, frame_list.size()).second) {
      throw IntegrityError("duplicate frame_id '" + f.frame_id + "' at " +
                           location_of(line));
    }
    frame_list.push_back(std::move(f));
  }

  std::vector<SentimentAnnotation> ann_list;
  const auto& declared = header.annotators;
  for (auto& [line, a] : anns) {
    if (!declared.empty() && std::find(declared.begin(), declared.end(),
                                       a.annotator_id) == declared.end()) {
      throw IntegrityError("annotation at " + location_of(line) +
                           " uses undeclared annotator '" + a.annotator_id +
                           "'");
    }
    auto dit = doc_pos.find(a.doc_id);
    if (dit == doc_pos.end()) {
      throw ReferenceError("annotation at " + location_of(line) +
                           " references missing document '" + a.doc_id + "'");
    }
    if (docs[dit->second].find_segment(a.segment_id) == nullptr) {
      throw ReferenceError("annotation at " + location_of(line) + " in '" +
                           a.doc_id + "' references missing segment '" +
                           a.segment_id + "'");
    }
    if (a.target.kind == Target::Kind::frame) {
      auto fit = frame_pos.find(a.target.id);
      if (fit == frame_pos.end() ||
          frame_list[fit->second].doc_id != a.doc_id) {
        throw ReferenceError("annotation at " + location_of(line) + " in '" +
                             a.doc_id + "' targets frame '" + a.target.id +
                             "' which is not a frame of that document");
      }
    }
    ann_list.push_back(std::move(a));
  }

  return Corpus(std::move(header), std::move(docs), std::move(frame_list),
                std::move(ann_list));
}

Corpus parse_corpus(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_corpus(in);
}

namespace {

std::string annotation_line(const SentimentAnnotation& a) {
  return "ANN\t" + a.annotator_id + "\t" + a.doc_id + "\t" + a.segment_id +
         "\t" + format_number(a.polarity_score) + "\t" +
         format_emotions(a.emotions) + "\t" + encode(a.source) + "\t" +
         encode(a.target) + "\n";
}

}  // namespace

std::string serialize_corpus(const Corpus& c) {
  std::string out = "HDR\tsf_types=" + join(c.header().sf_types, ',') +
                    ";annotators=" + join(c.header().annotators, ',') + "\n";
  for (const auto& d : c.documents()) {
    out += "DOC\t" + d.doc_id + "\t" + d.language + "\t" +
           std::string(to_string(d.genre));
    if (d.is_translation && d.source_doc_id) {
      out += "\ttranslation_of=" + *d.source_doc_id;
    }
    out += "\n";
    for (const auto& s : d.segments) {
      out += "SEG\t" + d.doc_id + "\t" + s.segment_id + "\t" +
             std::to_string(s.index) + "\t" + escape_field(s.text) + "\n";
    }
  }
  for (const auto& f : c.frames()) {
    std::vector<std::string> kv;
    for (const auto& [k, v] : f.status) {
      kv.push_back(escape_field(k) + "=" + escape_field(v));
    }
    out += "SF\t" + f.frame_id + "\t" + f.doc_id + "\t" + f.sf_type + "\t" +
           escape_field(f.location.value_or("")) + "\t" + join(kv, ';') + "\n";
  }
  for (const auto& a : c.annotations()) out += annotation_line(a);
  return out;
}

std::vector<TranslationRecord> parse_translations(std::istream& in) {
  std::vector<TranslationRecord> out;
  std::map<std::string, std::size_t> pos;
  std::vector<std::map<std::size_t, std::string>> texts;
  for (const Line& l : read_records(in)) {
    const std::string& kind = l.fields[0];
    if (kind == "TRA") {
      expect_arity(l, 4, 4);
      expect_nonempty(l, 1, "source_doc_id");
      expect_nonempty(l, 2, "new_doc_id");
      if (!pos.try_emplace(l.fields[2], out.size()).second) {
        throw IntegrityError("duplicate translation doc_id '" + l.fields[2] +
                             "' at " + location_of(l.number));
      }
      out.push_back({l.fields[1], l.fields[2], l.fields[3], {}});
      texts.emplace_back();
    } else if (kind == "TSEG") {
      expect_arity(l, 4, 4);
      auto it = pos.find(l.fields[1]);
      if (it == pos.end()) {
        throw ParseError(l.number, "TSEG for undeclared translation '" +
                                       l.fields[1] + "'");
      }
      const std::size_t index = parse_index(l, 2);
      if (!texts[it->second].try_emplace(index, unescape_field(l.fields[3]))
               .second) {
        throw ParseError(l.number, "duplicate TSEG index " +
                                       std::to_string(index));
      }
    } else {
      throw ParseError(l.number, "unknown record kind '" + kind + "'");
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::size_t expected = 0;
    for (auto& [index, text] : texts[i]) {
      if (index != expected++) {
        throw AlignmentError("translation '" + out[i].new_doc_id +
                             "' is missing segment index " +
                             std::to_string(expected - 1));
      }
      out[i].texts.push_back(std::move(text));
    }
  }
  return out;
}

std::vector<TranslationRecord> parse_translations(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_translations(in);
}

std::string serialize_translations(const std::vector<TranslationRecord>& t) {
  std::string out;
  for (const auto& r : t) {
    out += "TRA\t" + r.source_doc_id + "\t" + r.new_doc_id + "\t" +
           r.language + "\n";
    for (std::size_t i = 0; i < r.texts.size(); ++i) {
      out += "TSEG\t" + r.new_doc_id + "\t" + std::to_string(i) + "\t" +
             escape_field(r.texts[i]) + "\n";
    }
  }
  return out;
}

ReferenceSet parse_reference(std::istream& in) {
  const std::vector<Line> lines = read_records(in);
  if (lines.empty() || lines.front().fields[0] != "HDR") {
    throw ParseError(lines.empty() ? 1 : lines.front().number,
                     "reference file must start with an HDR record");
  }
  const CorpusHeader header = parse_header(lines.front());
  if (header.annotators.empty()) {
    throw ParseError(lines.front().number,
                     "reference header declares no annotators");
  }
  ReferenceSet ref;
  ref.annotators = header.annotators;
  for (const auto& a : header.annotators) ref.by_annotator[a];
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const Line& l = lines[i];
    if (l.fields[0] != "ANN") {
      throw ParseError(l.number, "reference files hold only ANN records, got '" +
                                     l.fields[0] + "'");
    }
    SentimentAnnotation a = parse_annotation(l);
    auto it = ref.by_annotator.find(a.annotator_id);
    if (it == ref.by_annotator.end()) {
      throw IntegrityError("annotation at " + location_of(l.number) +
                           " uses annotator '" + a.annotator_id +
                           "' not declared in the header");
    }
    if (!on_polarity_grid(a.polarity_score)) {
      throw FormatError(l.number, "polarity score " +
                                      format_number(a.polarity_score) +
                                      " is off the 0.5 grid");
    }
    it->second.push_back(std::move(a));
  }
  return ref;
}

ReferenceSet parse_reference(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_reference(in);
}

}  // namespace sitsent
