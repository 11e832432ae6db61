#include "sitsent/pipeline.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "sitsent/error.hpp"

namespace sitsent {

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::baseline_tfidf: return "baseline_tfidf";
    case Variant::baseline_embedding: return "baseline_embedding";
    case Variant::minority: return "minority";
    case Variant::model_iia: return "model_iia";
    case Variant::model_iib: return "model_iib";
    case Variant::model_iic: return "model_iic";
    case Variant::external: return "external";
  }
  return "unknown";
}

Variant parse_variant(std::string_view s) {
  for (Variant v : {Variant::baseline_tfidf, Variant::baseline_embedding,
                    Variant::minority, Variant::model_iia, Variant::model_iib,
                    Variant::model_iic, Variant::external}) {
    if (to_string(v) == s) return v;
  }
  throw ConfigError("unknown variant '" + std::string(s) + "'");
}

std::string PipelineConfig::effective_system_id() const {
  return system_id.empty() ? std::string(to_string(variant)) : system_id;
}

FeatureBlocks default_blocks(Variant v) {
  if (v == Variant::baseline_embedding) return {false, true, false};
  return {true, false, false};
}

namespace {

bool is_routed(Variant v) {
  return v == Variant::model_iib || v == Variant::model_iic;
}

bool is_balanced(Variant v) {
  return v == Variant::model_iia || v == Variant::model_iib ||
         v == Variant::model_iic;
}

}  // namespace

void validate_config(const PipelineConfig& cfg) {
  if (cfg.variant == Variant::baseline_tfidf && !cfg.blocks.tfidf) {
    throw ConfigError("baseline_tfidf needs the tfidf feature block");
  }
  if (cfg.variant == Variant::baseline_embedding && !cfg.blocks.embedding) {
    throw ConfigError("baseline_embedding needs the embedding feature block");
  }
  if (!cfg.blocks.tfidf && !cfg.blocks.embedding && !cfg.blocks.lexicon) {
    throw ConfigError("no feature block selected");
  }
  if (cfg.grid.empty()) throw ConfigError("empty hyperparameter grid");
  if (cfg.k_inner < 2) throw ConfigError("k_inner must be at least 2");
}

std::vector<PairInstance> build_pairs(const Corpus& c) {
  std::vector<PairInstance> out;
  for (const auto& d : c.documents()) {
    const auto frames = c.frames_of(d.doc_id);
    if (frames.empty()) continue;
    std::set<std::pair<std::string_view, std::string_view>> positive;
    for (const SentimentAnnotation* a : c.annotations_of(d.doc_id)) {
      if (a->target.kind == Target::Kind::frame) {
        positive.emplace(a->segment_id, a->target.id);
      }
    }
    for (const auto& s : d.segments) {
      for (const SituationFrame* f : frames) {
        PairInstance p;
        p.doc_id = d.doc_id;
        p.segment_id = s.segment_id;
        p.segment_index = s.index;
        p.frame_id = f->frame_id;
        p.label = positive.contains({s.segment_id, f->frame_id}) ? 1 : 0;
        p.tweet = d.genre == Genre::tweet;
        out.push_back(std::move(p));
      }
    }
  }
  return out;
}

DomainPartition route_domains(const Corpus& c) {
  DomainPartition p;
  for (const auto& d : c.documents()) {
    (d.genre == Genre::tweet ? p.tweets : p.others).push_back(d.doc_id);
  }
  return p;
}

EmotionSet tag_emotions(const Lexicon& l, const TokenSequence& s) {
  EmotionSet out;
  const std::vector<double> shares = lexicon_features(l, s);
  for (Emotion e : {Emotion::fear, Emotion::anger, Emotion::joy}) {
    const auto idx = l.category_index(to_string(e));
    if (!idx) {
      throw ConfigError("lexicon has no '" + std::string(to_string(e)) +
                        "' category for emotion tagging");
    }
    if (shares[*idx] > 0.0) out.insert(e);
  }
  return out;
}

namespace {

RouteModel constant_route(int label, std::string why) {
  RouteModel m;
  m.classify = [label](const LabeledRow&) { return label; };
  m.constant = label;
  m.description = std::move(why);
  return m;
}

RouteModel linear_route(LinearModel model, std::string description) {
  auto shared = std::make_shared<const LinearModel>(model);
  RouteModel m;
  m.classify = [shared](const LabeledRow& r) {
    return predict_linear(*shared, r.x).label;
  };
  m.linear = std::move(model);
  m.description = std::move(description);
  return m;
}

}  // namespace

RouteFitter default_route_fitter(const PipelineConfig& cfg) {
  if (cfg.variant == Variant::minority) {
    return [](const LabeledDataset& d) {
      return constant_route(minority_baseline(d).label, "minority");
    };
  }
  const LinearSpec spec{cfg.loss, is_balanced(cfg.variant)};
  return [spec, grid = cfg.grid, k_inner = cfg.k_inner,
          seed = cfg.seed](const LabeledDataset& d) {
    if (!d.has_both_classes()) {
      return constant_route(d[0].label, "single-class");
    }
    const std::size_t k = std::min(k_inner, d.group_count());
    Hyper chosen = grid.front();
    if (grid.size() > 1 && k >= 2) {
      chosen = grid_search(d, grid, k, seed, spec).best;
    }
    const ClassWeights cw =
        spec.balance_classes ? class_weights(d.labels()) : ClassWeights{};
    return linear_route(train_linear(d, cw, chosen, spec.loss), describe(chosen));
  };
}

PairFeaturizer::PairFeaturizer(const Corpus& fit_corpus,
                               const FeatureBlocks& blocks,
                               const PipelineResources& res)
    : assembler_(blocks, {}) {
  if (blocks.tfidf) {
    std::vector<TokenSequence> segments;
    for (const auto& d : fit_corpus.documents()) {
      for (const auto& s : d.segments) segments.push_back(tokenize(s.text));
    }
    parts_.tfidf = std::make_shared<const TfidfModel>(fit_tfidf(segments, 1));
  }
  if (blocks.embedding) parts_.embeddings = res.embeddings;
  if (blocks.lexicon) parts_.lexicon = res.lexicon;
  assembler_ = FeatureAssembler(blocks, parts_.layout_for(blocks));
}

PairFeaturizer::PairFeaturizer(FeatureBlocks blocks, FeatureParts parts,
                               FeatureLayout layout)
    : parts_(std::move(parts)), assembler_(blocks, layout) {}

std::vector<LabeledRow> PairFeaturizer::rows(
    const Corpus& c, const std::vector<PairInstance>& pairs) const {
  std::map<std::pair<std::string, std::size_t>, FeatureVector> cache;
  std::vector<LabeledRow> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    auto key = std::make_pair(p.doc_id, p.segment_index);
    auto it = cache.find(key);
    if (it == cache.end()) {
      const Document* d = c.find_document(p.doc_id);
      const Segment* s = d ? d->find_segment(p.segment_id) : nullptr;
      if (s == nullptr) {
        throw ReferenceError("pair references missing segment " + p.doc_id +
                             "/" + p.segment_id);
      }
      it = cache.emplace(key, assembler_.assemble(parts_, tokenize(s->text))).first;
    }
    LabeledRow r;
    r.x = it->second;
    r.label = p.label;
    r.group = p.doc_id;
    r.meta = {p.doc_id, p.segment_id, p.frame_id, p.tweet};
    out.push_back(std::move(r));
  }
  return out;
}

TrainedPipeline::TrainedPipeline(PipelineConfig cfg, PairFeaturizer featurizer)
    : cfg_(std::move(cfg)), featurizer_(std::move(featurizer)) {}

void TrainedPipeline::set_routes(std::optional<RouteModel> tweet,
                                 std::optional<RouteModel> other) {
  tweet_ = std::move(tweet);
  other_ = std::move(other);
}

const RouteModel& TrainedPipeline::route_for(bool tweet) {
  if (single_) return *single_;
  const auto& own = tweet ? tweet_ : other_;
  if (own) return *own;
  const auto& fallback = tweet ? other_ : tweet_;
  if (!fallback) throw ConfigError("pipeline has no trained model");
  const std::string msg = std::string("no ") + (tweet ? "tweet" : "non-tweet") +
                          " model was trained; using the " +
                          (tweet ? "non-tweet" : "tweet") + " model instead";
  if (std::find(warnings_.begin(), warnings_.end(), msg) == warnings_.end()) {
    warnings_.push_back(msg);
  }
  return *fallback;
}

std::vector<SentimentOutput> TrainedPipeline::predict(const Corpus& c,
                                                      const PipelineResources& res) {
  const std::vector<PairInstance> pairs = build_pairs(c);
  const std::vector<LabeledRow> rows = featurizer_.rows(c, pairs);
  std::vector<SentimentOutput> out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const PairInstance& p = pairs[i];
    if (cfg_.variant == Variant::model_iic && !p.tweet) continue;
    if (route_for(p.tweet).classify(rows[i]) != 1) continue;
    SentimentOutput o;
    o.doc_id = p.doc_id;
    o.segment_id = p.segment_id;
    o.polarity = cfg_.default_polarity;
    o.source = cfg_.default_source;
    o.target = Target::frame(p.frame_id);
    o.system_id = cfg_.effective_system_id();
    if (res.lexicon) {
      const Segment* s = c.find_document(p.doc_id)->find_segment(p.segment_id);
      o.emotions = tag_emotions(*res.lexicon, tokenize(s->text));
    }
    out.push_back(std::move(o));
  }
  return out;
}

Trainer variant_trainer(const PipelineConfig& cfg, const RouteFitter& fitter) {
  if (cfg.variant == Variant::external) {
    throw ConfigError("the external variant imports predictions; nothing to train");
  }
  RouteFitter fit = fitter ? fitter : default_route_fitter(cfg);
  if (!is_routed(cfg.variant)) {
    return [fit](const LabeledDataset& d) -> TrainedClassifier {
      RouteModel m = fit(d);
      return {std::move(m.classify), m.description};
    };
  }
  const bool tweets_only = cfg.variant == Variant::model_iic;
  return [fit, tweets_only](const LabeledDataset& d) -> TrainedClassifier {
    std::vector<std::size_t> tweet_idx;
    std::vector<std::size_t> other_idx;
    for (std::size_t i = 0; i < d.size(); ++i) {
      (d[i].meta.tweet ? tweet_idx : other_idx).push_back(i);
    }
    std::optional<RouteModel> tweet;
    std::optional<RouteModel> other;
    if (!tweet_idx.empty()) tweet = fit(d.subset(tweet_idx));
    if (!other_idx.empty()) other = fit(d.subset(other_idx));
    Classifier tweet_fn = tweet ? tweet->classify : other->classify;
    Classifier other_fn = other ? other->classify : tweet->classify;
    std::string desc = "tweet:" + (tweet ? tweet->description : "fallback") +
                       ";other:" + (other ? other->description : "fallback");
    return {[tweet_fn, other_fn, tweets_only](const LabeledRow& r) {
              if (r.meta.tweet) return tweet_fn(r);
              return tweets_only ? 0 : other_fn(r);
            },
            std::move(desc)};
  };
}

TrainedPipeline train_pipeline(const Corpus& c, const PipelineConfig& cfg,
                               const PipelineResources& res,
                               const RouteFitter& fitter) {
  validate_config(cfg);
  if (cfg.variant == Variant::external) {
    throw ConfigError("the external variant imports predictions; nothing to train");
  }
  PairFeaturizer featurizer(c, cfg.blocks, res);
  const std::vector<PairInstance> pairs = build_pairs(c);
  LabeledDataset all(featurizer.rows(c, pairs));
  const RouteFitter fit = fitter ? fitter : default_route_fitter(cfg);

  TrainedPipeline tp(cfg, std::move(featurizer));
  if (!is_routed(cfg.variant)) {
    tp.set_single(fit(all));
    return tp;
  }
  std::vector<std::size_t> tweet_idx;
  std::vector<std::size_t> other_idx;
  for (std::size_t i = 0; i < all.size(); ++i) {
    (all[i].meta.tweet ? tweet_idx : other_idx).push_back(i);
  }
  std::optional<RouteModel> tweet;
  std::optional<RouteModel> other;
  if (!tweet_idx.empty()) tweet = fit(all.subset(tweet_idx));
  if (!other_idx.empty()) other = fit(all.subset(other_idx));
  tp.set_routes(std::move(tweet), std::move(other));
  return tp;
}

std::vector<SentimentOutput> run_pipeline(const Corpus& c,
                                          const PipelineConfig& cfg,
                                          const PipelineResources& res,
                                          const RouteFitter& fitter) {
  return train_pipeline(c, cfg, res, fitter).predict(c, res);
}

LabeledDataset build_dataset(const Corpus& c, const PipelineConfig& cfg,
                             const PipelineResources& res) {
  validate_config(cfg);
  const PairFeaturizer featurizer(c, cfg.blocks, res);
  return LabeledDataset(featurizer.rows(c, build_pairs(c)));
}

CvReport cross_validate(const Corpus& c, const PipelineConfig& cfg,
                        const PipelineResources& res, std::size_t k_outer) {
  const LabeledDataset d = build_dataset(c, cfg, res);
  return kfold_cv(d, k_outer, variant_trainer(cfg), cfg.seed);
}

}  // namespace sitsent
