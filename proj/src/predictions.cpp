#include <sstream>

#include "sitsent/error.hpp"
#include "sitsent/pipeline.hpp"

namespace sitsent {

namespace {

constexpr std::string_view kPipelineMagic = "sitsent-pipeline v1";

std::string polarity_token(Polarity p) {
  return p == Polarity::positive ? "pos" : "neg";
}

std::optional<Polarity> parse_polarity_token(std::string_view s) {
  if (s == "pos") return Polarity::positive;
  if (s == "neg") return Polarity::negative;
  return std::nullopt;
}

void save_route(std::ostream& out, const std::string& name,
                const std::optional<RouteModel>& m) {
  if (!m) {
    out << "route " << name << " none\n";
  } else if (m->linear) {
    out << "route " << name << " linear\n";
    save_linear_model(out, *m->linear);
  } else if (m->constant) {
    out << "route " << name << " constant " << *m->constant << "\n";
  } else {
    throw ConfigError("route '" + name + "' was fitted by a custom fitter and "
                      "cannot be saved");
  }
}

struct LineReader {
  std::istream& in;
  std::size_t line = 0;

  std::string next(std::string_view key) {
    std::string raw;
    if (!std::getline(in, raw)) {
      throw FormatError(line + 1, "pipeline file truncated before '" +
                                      std::string(key) + "'");
    }
    ++line;
    if (!raw.starts_with(std::string(key) + " ") && raw != key) {
      throw FormatError(line, "expected '" + std::string(key) + "'");
    }
    return raw.size() > key.size() ? raw.substr(key.size() + 1) : std::string();
  }
};

std::optional<RouteModel> load_route(LineReader& r, const std::string& name) {
  const std::vector<std::string> f = split(r.next("route"), ' ');
  if (f.empty() || f[0] != name) {
    throw FormatError(r.line, "expected route '" + name + "'");
  }
  if (f.size() == 2 && f[1] == "none") return std::nullopt;
  RouteModel m;
  if (f.size() == 2 && f[1] == "linear") {
    LinearModel lm = load_linear_model(r.in);
    r.line += 7 + lm.weights.size();
    auto shared = std::make_shared<const LinearModel>(lm);
    m.classify = [shared](const LabeledRow& row) {
      return predict_linear(*shared, row.x).label;
    };
    m.description = describe(lm.hyper);
    m.linear = std::move(lm);
    return m;
  }
  if (f.size() == 3 && f[1] == "constant" && (f[2] == "0" || f[2] == "1")) {
    const int label = f[2] == "1" ? 1 : 0;
    m.classify = [label](const LabeledRow&) { return label; };
    m.constant = label;
    m.description = "constant";
    return m;
  }
  throw FormatError(r.line, "bad route line for '" + name + "'");
}

}  // namespace

void TrainedPipeline::save(std::ostream& out) const {
  const FeatureLayout& layout = featurizer_.assembler().layout();
  out << kPipelineMagic << "\n"
      << "variant " << to_string(cfg_.variant) << "\n"
      << "features " << format_feature_blocks(featurizer_.assembler().blocks()) << "\n"
      << "loss " << to_string(cfg_.loss) << "\n"
      << "seed " << cfg_.seed << "\n"
      << "default_source " << encode(cfg_.default_source) << "\n"
      << "default_polarity " << polarity_token(cfg_.default_polarity) << "\n"
      << "system_id " << cfg_.effective_system_id() << "\n"
      << "layout " << layout.tfidf << " " << layout.embedding << " "
      << layout.lexicon << "\n";
  const auto& tfidf = featurizer_.parts().tfidf;
  if (tfidf) {
    out << "tfidf " << tfidf->size() << " " << tfidf->num_fit_docs() << "\n";
    for (std::size_t i = 0; i < tfidf->size(); ++i) {
      out << format_number(tfidf->idf()[i]) << "\t"
          << escape_field(tfidf->terms()[i]) << "\n";
    }
  } else {
    out << "tfidf none\n";
  }
  if (single_) {
    save_route(out, "all", single_);
  } else {
    save_route(out, "tweet", tweet_);
    save_route(out, "other", other_);
  }
}

TrainedPipeline TrainedPipeline::load(std::istream& in,
                                      const PipelineResources& res) {
  LineReader r{in};
  std::string magic;
  if (!std::getline(in, magic) || magic != kPipelineMagic) {
    throw FormatError(1, "not a pipeline model file");
  }
  r.line = 1;
  PipelineConfig cfg;
  cfg.variant = parse_variant(r.next("variant"));
  cfg.blocks = parse_feature_blocks(r.next("features"));
  cfg.loss = parse_loss_kind(r.next("loss"));
  try {
    cfg.seed = std::stoull(r.next("seed"));
  } catch (const std::invalid_argument&) {
    throw FormatError(r.line, "bad seed");
  }
  auto src = decode_source(r.next("default_source"));
  if (!src) throw FormatError(r.line, "bad default_source");
  cfg.default_source = *src;
  auto pol = parse_polarity_token(r.next("default_polarity"));
  if (!pol) throw FormatError(r.line, "bad default_polarity");
  cfg.default_polarity = *pol;
  cfg.system_id = r.next("system_id");

  const std::vector<std::string> lf = split(r.next("layout"), ' ');
  if (lf.size() != 3) throw FormatError(r.line, "layout needs three sizes");
  FeatureLayout layout;
  try {
    layout = {std::stoull(lf[0]), std::stoull(lf[1]), std::stoull(lf[2])};
  } catch (const std::exception&) {
    throw FormatError(r.line, "bad layout");
  }

  FeatureParts parts;
  const std::string tf = r.next("tfidf");
  if (tf != "none") {
    const std::vector<std::string> hf = split(tf, ' ');
    if (hf.size() != 2) throw FormatError(r.line, "bad tfidf header");
    std::size_t vocab = 0;
    std::size_t docs = 0;
    try {
      vocab = std::stoull(hf[0]);
      docs = std::stoull(hf[1]);
    } catch (const std::exception&) {
      throw FormatError(r.line, "bad tfidf header");
    }
    std::vector<std::string> terms;
    std::vector<double> idf;
    std::string raw;
    for (std::size_t i = 0; i < vocab; ++i) {
      if (!std::getline(in, raw)) throw FormatError(r.line + 1, "truncated vocabulary");
      ++r.line;
      const auto tab = raw.find('\t');
      if (tab == std::string::npos) throw FormatError(r.line, "bad vocabulary line");
      try {
        idf.push_back(std::stod(raw.substr(0, tab)));
      } catch (const std::exception&) {
        throw FormatError(r.line, "bad idf value");
      }
      terms.push_back(unescape_field(raw.substr(tab + 1)));
    }
    parts.tfidf = std::make_shared<const TfidfModel>(std::move(terms),
                                                     std::move(idf), docs);
  }
  if (cfg.blocks.embedding) {
    if (!res.embeddings) throw ConfigError("model needs --embeddings");
    parts.embeddings = res.embeddings;
  }
  if (cfg.blocks.lexicon) {
    if (!res.lexicon) throw ConfigError("model needs --lexicon");
    parts.lexicon = res.lexicon;
  }

  TrainedPipeline tp(cfg, PairFeaturizer(cfg.blocks, std::move(parts), layout));
  const bool routed =
      cfg.variant == Variant::model_iib || cfg.variant == Variant::model_iic;
  if (routed) {
    auto tweet = load_route(r, "tweet");
    auto other = load_route(r, "other");
    tp.set_routes(std::move(tweet), std::move(other));
  } else {
    auto all = load_route(r, "all");
    if (!all) throw FormatError(r.line, "single-model pipeline without a model");
    tp.set_single(std::move(*all));
  }
  return tp;
}

void write_predictions(std::ostream& out, const std::string& system_id,
                       const std::vector<SentimentOutput>& outputs) {
  out << "SYS\t" << system_id << "\n";
  for (const auto& o : outputs) {
    out << "OUT\t" << o.doc_id << "\t" << o.segment_id << "\t"
        << polarity_token(o.polarity) << "\t" << format_emotions(o.emotions)
        << "\t" << encode(o.source) << "\t" << encode(o.target) << "\n";
  }
}

PredictionSet parse_predictions(std::istream& in) {
  PredictionSet set;
  bool saw_header = false;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (raw.empty()) continue;
    const std::vector<std::string> f = split(raw, '\t');
    if (!saw_header) {
      if (f[0] != "SYS" || f.size() != 2 || f[1].empty()) {
        throw ParseError(line, "predictions file must start with `SYS<TAB>id`");
      }
      set.system_id = f[1];
      saw_header = true;
      continue;
    }
    if (f[0] != "OUT") {
      throw ParseError(line, "unknown record kind '" + f[0] + "'");
    }
    if (f.size() != 7) {
      throw FormatError(line, "OUT record has " + std::to_string(f.size()) +
                                  " fields, expected 7");
    }
    SentimentOutput o;
    o.doc_id = f[1];
    o.segment_id = f[2];
    auto pol = parse_polarity_token(f[3]);
    if (!pol) throw FormatError(line, "bad polarity token '" + f[3] + "'");
    o.polarity = *pol;
    if (!f[4].empty()) {
      for (const std::string& e : split(f[4], ',')) {
        auto emo = parse_emotion(e);
        if (!emo) throw FormatError(line, "unknown emotion '" + e + "'");
        o.emotions.insert(*emo);
      }
    }
    auto src = decode_source(f[5]);
    if (!src) throw FormatError(line, "bad source '" + f[5] + "'");
    auto tgt = decode_target(f[6]);
    if (!tgt) throw FormatError(line, "bad target '" + f[6] + "'");
    o.source = std::move(*src);
    o.target = std::move(*tgt);
    o.system_id = set.system_id;
    set.outputs.push_back(std::move(o));
  }
  if (!saw_header) throw ParseError(line + 1, "predictions file is empty");
  return set;
}

PredictionSet parse_predictions(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_predictions(in);
}

std::vector<SentimentOutput> import_external_predictions(std::istream& in,
                                                         const Corpus& c) {
  PredictionSet set = parse_predictions(in);
  for (const auto& o : set.outputs) {
    const Document* d = c.find_document(o.doc_id);
    if (d == nullptr) {
      throw ReferenceError("output references missing document '" + o.doc_id + "'");
    }
    if (d->find_segment(o.segment_id) == nullptr) {
      throw ReferenceError("output in '" + o.doc_id +
                           "' references missing segment '" + o.segment_id + "'");
    }
    if (o.target.kind == Target::Kind::frame) {
      const SituationFrame* f = c.find_frame(o.target.id);
      if (f == nullptr || f->doc_id != o.doc_id) {
        throw ReferenceError("output in '" + o.doc_id + "' targets frame '" +
                             o.target.id + "' which is not a frame of that document");
      }
    }
  }
  return std::move(set.outputs);
}

std::vector<SentimentOutput> import_external_predictions(std::string_view text,
                                                         const Corpus& c) {
  std::istringstream in{std::string(text)};
  return import_external_predictions(in, c);
}

}  // namespace sitsent
