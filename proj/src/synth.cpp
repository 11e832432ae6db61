#include "sitsent/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "sitsent/error.hpp"
#include "sitsent/random.hpp"

namespace sitsent {

namespace {

const std::vector<std::string>& filler_words() {
  static const std::vector<std::string> words = {
      "the",      "a",        "of",        "in",         "to",       "and",
      "on",       "for",      "with",      "from",       "at",       "by",
      "road",     "water",    "city",      "river",      "bridge",   "report",
      "people",   "area",     "district",  "officials",  "said",     "today",
      "morning",  "village",  "supplies",  "trucks",     "team",     "local",
      "region",   "near",     "north",     "south",      "market",   "school",
      "station",  "agency",   "center",    "week",       "update",   "residents",
      "families", "power",    "lines",     "buildings",  "streets",  "workers",
      "clinic",   "camp",     "food",      "rain",       "wind",     "level",
      "count",    "list",     "plan",      "meeting",    "notice",   "route"};
  return words;
}

const std::vector<std::string>& locations() {
  static const std::vector<std::string> names = {
      "Nicaragua", "Managua",   "Leon",      "Granada",
      "Masaya",    "Esteli",    "Chinandega", "Matagalpa"};
  return names;
}

template <typename T>
const T& pick(const std::vector<T>& v, Rng& rng) {
  return v[uniform_index(rng, v.size())];
}

std::string zero_pad(std::size_t v, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*zu", width, v);
  return buf;
}

double parse_real(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) {
    throw ConfigError("synth spec: bad number for " + key + ": '" + v + "'");
  }
  return x;
}

std::size_t parse_count(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  unsigned long long x = 0;
  try {
    x = std::stoull(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty() || v[0] == '-') {
    throw ConfigError("synth spec: bad count for " + key + ": '" + v + "'");
  }
  return static_cast<std::size_t>(x);
}

std::vector<std::string> parse_words(const std::string& v) {
  std::vector<std::string> out;
  for (auto& w : split(v, ',')) {
    if (!w.empty()) out.push_back(std::move(w));
  }
  return out;
}

}  // namespace

std::size_t SynthSpec::total_documents() const {
  std::size_t n = 0;
  for (const auto& [g, c] : documents) n += c;
  return n;
}

SynthSpec parse_synth_spec(std::istream& in) {
  SynthSpec s;
  bool genres_given = false;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("synth spec line without '=': " + line);
    }
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (auto g = parse_genre(key)) {
      if (!genres_given) s.documents.clear();
      genres_given = true;
      s.documents[*g] = parse_count(key, value);
    } else if (key == "seed") {
      s.seed = parse_count(key, value);
    } else if (key == "language") {
      s.language = value;
    } else if (key == "segments_mean") {
      s.segments_mean = parse_real(key, value);
    } else if (key == "segments_sd") {
      s.segments_sd = parse_real(key, value);
    } else if (key == "max_segments") {
      s.max_segments = parse_count(key, value);
    } else if (key == "frames_min") {
      s.frames_min = parse_count(key, value);
    } else if (key == "frames_max") {
      s.frames_max = parse_count(key, value);
    } else if (key == "filler_min") {
      s.filler_min = parse_count(key, value);
    } else if (key == "filler_max") {
      s.filler_max = parse_count(key, value);
    } else if (key == "positive_rate") {
      s.positive_rate = parse_real(key, value);
    } else if (key == "agreement") {
      s.agreement = parse_real(key, value);
    } else if (key == "negative_share") {
      s.negative_share = parse_real(key, value);
    } else if (key == "emotion_rate") {
      s.emotion_rate = parse_real(key, value);
    } else if (key == "keywords_per_segment") {
      s.keywords_per_segment = parse_count(key, value);
    } else if (key == "negative_keywords") {
      s.negative_keywords = parse_words(value);
    } else if (key == "positive_keywords") {
      s.positive_keywords = parse_words(value);
    } else if (key == "fear_words") {
      s.fear_words = parse_words(value);
    } else if (key == "anger_words") {
      s.anger_words = parse_words(value);
    } else if (key == "joy_words") {
      s.joy_words = parse_words(value);
    } else {
      throw ConfigError("synth spec: unknown key '" + key + "'");
    }
  }
  return s;
}

SynthSpec parse_synth_spec(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_synth_spec(in);
}

std::string format_synth_spec(const SynthSpec& s) {
  std::ostringstream out;
  out << "seed=" << s.seed << "\n"
      << "language=" << s.language << "\n";
  for (const auto& [g, n] : s.documents) out << to_string(g) << "=" << n << "\n";
  out << "segments_mean=" << format_number(s.segments_mean) << "\n"
      << "segments_sd=" << format_number(s.segments_sd) << "\n"
      << "max_segments=" << s.max_segments << "\n"
      << "frames_min=" << s.frames_min << "\n"
      << "frames_max=" << s.frames_max << "\n"
      << "filler_min=" << s.filler_min << "\n"
      << "filler_max=" << s.filler_max << "\n"
      << "positive_rate=" << format_number(s.positive_rate) << "\n"
      << "agreement=" << format_number(s.agreement) << "\n"
      << "negative_share=" << format_number(s.negative_share) << "\n"
      << "emotion_rate=" << format_number(s.emotion_rate) << "\n"
      << "keywords_per_segment=" << s.keywords_per_segment << "\n"
      << "negative_keywords=" << join(s.negative_keywords, ',') << "\n"
      << "positive_keywords=" << join(s.positive_keywords, ',') << "\n"
      << "fear_words=" << join(s.fear_words, ',') << "\n"
      << "anger_words=" << join(s.anger_words, ',') << "\n"
      << "joy_words=" << join(s.joy_words, ',') << "\n";
  return out.str();
}

void validate_synth_spec(const SynthSpec& s) {
  auto fail = [](const std::string& why) { throw ConfigError("synth spec: " + why); };
  if (s.total_documents() == 0) fail("no documents requested");
  if (s.language.empty()) fail("empty language tag");
  if (!(s.positive_rate > 0.0 && s.positive_rate < 1.0)) {
    fail("positive_rate must lie in (0, 1)");
  }
  if (!(s.agreement >= 0.0 && s.agreement <= 1.0)) fail("agreement must lie in [0, 1]");
  if (!(s.negative_share >= 0.0 && s.negative_share <= 1.0)) {
    fail("negative_share must lie in [0, 1]");
  }
  if (!(s.emotion_rate >= 0.0 && s.emotion_rate <= 1.0)) {
    fail("emotion_rate must lie in [0, 1]");
  }
  if (!(s.segments_mean > 0.0) || !(s.segments_sd >= 0.0)) {
    fail("segment distribution needs mean > 0 and sd >= 0");
  }
  if (s.max_segments == 0) fail("max_segments must be positive");
  if (s.frames_min == 0 || s.frames_max < s.frames_min) {
    fail("frames need 1 <= frames_min <= frames_max");
  }
  if (s.filler_min == 0 || s.filler_max < s.filler_min) {
    fail("filler needs 1 <= filler_min <= filler_max");
  }
  if (s.keywords_per_segment == 0) fail("keywords_per_segment must be positive");
  if (s.negative_share > 0.0 && s.negative_keywords.size() < s.keywords_per_segment) {
    fail("fewer negative keywords than keywords_per_segment");
  }
  if (s.negative_share < 1.0 && s.positive_keywords.size() < s.keywords_per_segment) {
    fail("fewer positive keywords than keywords_per_segment");
  }
  if (s.emotion_rate > 0.0 &&
      (s.fear_words.empty() || s.anger_words.empty() || s.joy_words.empty())) {
    fail("emotion words missing");
  }
  const std::set<std::string> filler(filler_words().begin(), filler_words().end());
  for (const auto* list : {&s.negative_keywords, &s.positive_keywords, &s.fear_words,
                           &s.anger_words, &s.joy_words}) {
    for (const auto& w : *list) {
      if (filler.contains(w)) fail("planted word '" + w + "' is a filler word");
    }
  }
}

std::string format_manifest(const SynthManifest& m) {
  std::ostringstream out;
  out << "seed=" << m.seed << "\n";
  for (const auto& [g, n] : m.documents_by_genre) {
    out << "documents_" << to_string(g) << "=" << n << "\n";
  }
  out << "documents=" << m.documents << "\n"
      << "segments=" << m.segments << "\n"
      << "frames=" << m.frames << "\n"
      << "annotations=" << m.annotations << "\n"
      << "annotations_" << kSynthAnnotatorA << "=" << m.annotations_a << "\n"
      << "annotations_" << kSynthAnnotatorB << "=" << m.annotations_b << "\n"
      << "pairs_total=" << m.pairs_total << "\n"
      << "pairs_positive=" << m.pairs_positive << "\n"
      << "agreed=" << m.agreed << "\n"
      << "singletons=" << m.singletons << "\n";
  return out.str();
}

SynthManifest parse_manifest(std::string_view text) {
  SynthManifest m;
  for (const std::string& line : split(text, '\n')) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("bad manifest line: " + line);
    const std::string key = line.substr(0, eq);
    const std::size_t v = parse_count(key, line.substr(eq + 1));
    if (key == "seed") m.seed = v;
    else if (key == "documents") m.documents = v;
    else if (key == "segments") m.segments = v;
    else if (key == "frames") m.frames = v;
    else if (key == "annotations") m.annotations = v;
    else if (key == std::string("annotations_") + kSynthAnnotatorA) m.annotations_a = v;
    else if (key == std::string("annotations_") + kSynthAnnotatorB) m.annotations_b = v;
    else if (key == "pairs_total") m.pairs_total = v;
    else if (key == "pairs_positive") m.pairs_positive = v;
    else if (key == "agreed") m.agreed = v;
    else if (key == "singletons") m.singletons = v;
    else if (key.starts_with("documents_")) {
      auto g = parse_genre(key.substr(10));
      if (!g) throw ConfigError("bad manifest genre: " + key);
      m.documents_by_genre[*g] = v;
    } else {
      throw ConfigError("unknown manifest key: " + key);
    }
  }
  return m;
}

SynthOutput generate_synthetic(const SynthSpec& spec) {
  validate_synth_spec(spec);
  Rng rng(spec.seed);

  // Documents, segments (texts filled in later) and frames.
  std::vector<Document> docs;
  std::vector<SituationFrame> frames;
  const auto& inventory = default_sf_inventory();
  std::size_t doc_no = 0;
  for (const auto& [genre, count] : spec.documents) {
    for (std::size_t i = 0; i < count; ++i) {
      Document d;
      d.doc_id = spec.language + "_" + zero_pad(++doc_no, 4);
      d.language = spec.language;
      d.genre = genre;
      std::size_t n = 1;
      if (genre != Genre::tweet) {
        const double draw =
            std::round(spec.segments_mean + spec.segments_sd * standard_normal(rng));
        n = static_cast<std::size_t>(
            std::clamp(draw, 1.0, static_cast<double>(spec.max_segments)));
      }
      for (std::size_t s = 0; s < n; ++s) {
        d.segments.push_back({"s" + std::to_string(s), s, {}});
      }
      const std::size_t nf =
          spec.frames_min + uniform_index(rng, spec.frames_max - spec.frames_min + 1);
      for (std::size_t f = 0; f < nf; ++f) {
        SituationFrame fr;
        fr.frame_id = "f" + zero_pad(doc_no, 4) + "_" + std::to_string(f);
        fr.doc_id = d.doc_id;
        fr.sf_type = inventory[uniform_index(rng, 3)];
        fr.location = pick(locations(), rng);
        fr.status["urgency"] = coin_flip(rng) ? "urgent" : "non_urgent";
        fr.status["resolution"] = coin_flip(rng) ? "none" : "partial";
        frames.push_back(std::move(fr));
      }
      docs.push_back(std::move(d));
    }
  }

  struct Pair {
    std::size_t doc;
    std::size_t segment;
    std::size_t frame;  // index into `frames`
  };
  std::vector<Pair> pairs;
  {
    std::size_t fi = 0;
    for (std::size_t d = 0; d < docs.size(); ++d) {
      std::size_t nf = 0;
      while (fi + nf < frames.size() && frames[fi + nf].doc_id == docs[d].doc_id) ++nf;
      for (std::size_t s = 0; s < docs[d].segments.size(); ++s) {
        for (std::size_t f = 0; f < nf; ++f) pairs.push_back({d, s, fi + f});
      }
      fi += nf;
    }
  }

  const std::size_t positives = std::max<std::size_t>(
      1, static_cast<std::size_t>(
             std::llround(spec.positive_rate * static_cast<double>(pairs.size()))));
  if (positives > pairs.size()) {
    throw ConfigError("synth spec: more positive pairs than pairs");
  }
  const bool mixed = spec.agreement > 0.0 && spec.agreement < 1.0;
  if (mixed && positives < 2) {
    throw ConfigError("synth spec: agreement strictly between 0 and 1 needs at "
                      "least two sentiment instances; raise positive_rate or "
                      "add documents");
  }

  // Partial Fisher-Yates picks the positive pairs; keep them in pair order.
  std::vector<std::size_t> idx(pairs.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  for (std::size_t i = 0; i < positives; ++i) {
    std::swap(idx[i], idx[i + uniform_index(rng, idx.size() - i)]);
  }
  std::vector<std::size_t> chosen(idx.begin(), idx.begin() + positives);
  std::sort(chosen.begin(), chosen.end());

  // Per-segment sentiment: polarity and optional emotion shared by every
  // positive pair on that segment.
  struct SegmentSentiment {
    bool negative = true;
    std::optional<Emotion> emotion;
  };
  std::map<std::pair<std::size_t, std::size_t>, SegmentSentiment> sentiment;
  for (std::size_t pi : chosen) {
    const auto key = std::make_pair(pairs[pi].doc, pairs[pi].segment);
    if (sentiment.contains(key)) continue;
    SegmentSentiment s;
    s.negative = uniform01(rng) < spec.negative_share;
    if (uniform01(rng) < spec.emotion_rate) {
      s.emotion = s.negative ? (coin_flip(rng) ? Emotion::fear : Emotion::anger)
                             : Emotion::joy;
    }
    sentiment[key] = s;
  }

  // Segment texts: filler, plus two planted keywords (and maybe an emotion
  // word) on sentiment-bearing segments.
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (std::size_t s = 0; s < docs[d].segments.size(); ++s) {
      std::vector<std::string> words;
      const std::size_t len =
          spec.filler_min + uniform_index(rng, spec.filler_max - spec.filler_min + 1);
      for (std::size_t w = 0; w < len; ++w) words.push_back(pick(filler_words(), rng));
      auto it = sentiment.find({d, s});
      if (it != sentiment.end()) {
        const auto& list = it->second.negative ? spec.negative_keywords
                                               : spec.positive_keywords;
        std::vector<std::string> pool = list;
        shuffle(std::span<std::string>(pool), rng);
        std::vector<std::string> planted(
            pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(spec.keywords_per_segment));
        if (it->second.emotion) {
          const auto& emo = *it->second.emotion == Emotion::fear    ? spec.fear_words
                            : *it->second.emotion == Emotion::anger ? spec.anger_words
                                                                    : spec.joy_words;
          planted.push_back(pick(emo, rng));
        }
        for (auto& p : planted) {
          const std::size_t at = uniform_index(rng, words.size() + 1);
          words.insert(words.begin() + static_cast<std::ptrdiff_t>(at), std::move(p));
        }
      }
      if (docs[d].genre == Genre::tweet && coin_flip(rng)) {
        words.push_back("#" + pick(locations(), rng));
      }
      std::string text = join(words, ' ');
      if (!text.empty() && text[0] >= 'a' && text[0] <= 'z') text[0] -= 0x20;
      text += docs[d].genre == Genre::tweet ? "!" : ".";
      docs[d].segments[s].text = std::move(text);
    }
  }

  // Dual annotation. The first `agreed` instances (after a shuffle) are
  // annotated identically up to magnitude and emotions; the rest are seen by
  // one annotator only or with opposite polarity.
  std::vector<std::size_t> order = chosen;
  shuffle(std::span<std::size_t>(order), rng);
  std::size_t agreed =
      static_cast<std::size_t>(std::llround(spec.agreement * static_cast<double>(positives)));
  if (mixed) agreed = std::clamp<std::size_t>(agreed, 1, positives - 1);
  std::set<std::size_t> agreed_set(order.begin(), order.begin() + agreed);

  auto magnitude = [&rng]() { return 0.5 * static_cast<double>(1 + uniform_index(rng, 6)); };
  std::vector<SentimentAnnotation> anns_a;
  std::vector<SentimentAnnotation> anns_b;
  std::size_t singletons = 0;
  for (std::size_t pi : chosen) {
    const Pair& p = pairs[pi];
    const SegmentSentiment& s = sentiment.at({p.doc, p.segment});
    SentimentAnnotation base;
    base.doc_id = docs[p.doc].doc_id;
    base.segment_id = docs[p.doc].segments[p.segment].segment_id;
    base.source = Source::author();
    base.target = Target::frame(frames[p.frame].frame_id);
    const double sign = s.negative ? -1.0 : 1.0;

    SentimentAnnotation a = base;
    a.annotator_id = kSynthAnnotatorA;
    a.polarity_score = sign * magnitude();
    if (s.emotion) a.emotions.insert(*s.emotion);
    SentimentAnnotation b = base;
    b.annotator_id = kSynthAnnotatorB;
    b.polarity_score = sign * magnitude();
    if (s.emotion && coin_flip(rng)) b.emotions.insert(*s.emotion);

    if (agreed_set.contains(pi)) {
      anns_a.push_back(std::move(a));
      anns_b.push_back(std::move(b));
      continue;
    }
    switch (uniform_index(rng, 3)) {
      case 0:
        anns_a.push_back(std::move(a));
        singletons += 1;
        break;
      case 1:
        anns_b.push_back(std::move(b));
        singletons += 1;
        break;
      default:
        b.polarity_score = -b.polarity_score;
        anns_a.push_back(std::move(a));
        anns_b.push_back(std::move(b));
        singletons += 2;
        break;
    }
  }

  SynthManifest m;
  m.seed = spec.seed;
  for (const auto& [g, n] : spec.documents) {
    if (n > 0) m.documents_by_genre[g] = n;
  }
  m.documents = docs.size();
  for (const auto& d : docs) m.segments += d.segments.size();
  m.frames = frames.size();
  m.annotations_a = anns_a.size();
  m.annotations_b = anns_b.size();
  m.annotations = anns_a.size() + anns_b.size();
  m.pairs_total = pairs.size();
  m.pairs_positive = positives;
  m.agreed = agreed;
  m.singletons = singletons;

  std::vector<SentimentAnnotation> all = anns_a;
  all.insert(all.end(), anns_b.begin(), anns_b.end());

  CorpusHeader header;
  header.sf_types = inventory;
  header.annotators = {kSynthAnnotatorA, kSynthAnnotatorB};
  Corpus corpus(header, std::move(docs), std::move(frames), std::move(all));

  std::string reference = "HDR\tsf_types=" + join(header.sf_types, ',') +
                          ";annotators=" + join(header.annotators, ',') + "\n";
  for (const auto& a : corpus.annotations()) {
    reference += "ANN\t" + a.annotator_id + "\t" + a.doc_id + "\t" + a.segment_id +
                 "\t" + format_number(a.polarity_score) + "\t" +
                 format_emotions(a.emotions) + "\t" + encode(a.source) + "\t" +
                 encode(a.target) + "\n";
  }

  SynthOutput out;
  out.corpus_text = serialize_corpus(corpus);
  out.corpus = std::move(corpus);
  out.reference_text = std::move(reference);
  out.manifest = m;
  return out;
}

}  // namespace sitsent
