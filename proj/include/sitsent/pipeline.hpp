#pragma once

#include <functional>
#include <istream>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sitsent/corpus.hpp"
#include "sitsent/features.hpp"
#include "sitsent/learners.hpp"

namespace sitsent {

enum class Variant {
  baseline_tfidf,
  baseline_embedding,
  minority,
  model_iia,
  model_iib,
  model_iic,
  external,
};

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view s);

struct PipelineConfig {
  Variant variant = Variant::model_iib;
  FeatureBlocks blocks;
  LossKind loss = LossKind::hinge;
  std::vector<Hyper> grid = default_grid();
  std::size_t k_inner = 10;
  std::uint64_t seed = 42;
  Source default_source = Source::author();
  Polarity default_polarity = Polarity::negative;
  // Empty means "use the variant name".
  std::string system_id;

  std::string effective_system_id() const;
};

// The blocks a variant needs when the caller does not choose: the embedding
// baseline uses averaged embeddings, everything else TF-IDF.
FeatureBlocks default_blocks(Variant v);

// Throws ConfigError when a variant's required block is missing.
void validate_config(const PipelineConfig& cfg);

struct PairInstance {
  std::string doc_id;
  std::string segment_id;
  std::size_t segment_index = 0;
  std::string frame_id;
  int label = 0;
  bool tweet = false;
};

// One pair per (segment, frame) of each document, segment-major. Label 1 iff
// some annotation of the document on that segment targets that frame.
std::vector<PairInstance> build_pairs(const Corpus& c);

struct DomainPartition {
  std::vector<std::string> tweets;
  std::vector<std::string> others;
};

DomainPartition route_domains(const Corpus& c);

// Emotions whose lexicon category fires on the tokens. The lexicon must carry
// `fear`, `anger` and `joy` categories.
EmotionSet tag_emotions(const Lexicon& l, const TokenSequence& s);

// External resources that are loaded rather than fitted.
struct PipelineResources {
  std::shared_ptr<const EmbeddingTable> embeddings;
  std::shared_ptr<const Lexicon> lexicon;
};

// A fitted pair classifier for one route. `linear` / `constant` are set for
// the built-in fitters and make the route persistable.
struct RouteModel {
  Classifier classify;
  std::optional<LinearModel> linear;
  std::optional<int> constant;
  std::string description;
};

using RouteFitter = std::function<RouteModel(const LabeledDataset&)>;

// The fitter a variant uses: minority baseline, or inner grid search plus
// refit of a linear model (class-balanced for the model_ii* variants).
RouteFitter default_route_fitter(const PipelineConfig& cfg);

// Tokenises every segment once and turns pairs into labeled rows.
class PairFeaturizer {
 public:
  // Fits the TF-IDF block on the corpus segments when it is selected.
  PairFeaturizer(const Corpus& fit_corpus, const FeatureBlocks& blocks,
                 const PipelineResources& res);
  // Rebinds previously fitted parts to the layout they were saved with.
  PairFeaturizer(FeatureBlocks blocks, FeatureParts parts, FeatureLayout layout);

  const FeatureParts& parts() const { return parts_; }
  const FeatureAssembler& assembler() const { return assembler_; }

  std::vector<LabeledRow> rows(const Corpus& c,
                               const std::vector<PairInstance>& pairs) const;

 private:
  FeatureParts parts_;
  FeatureAssembler assembler_;
};

class TrainedPipeline {
 public:
  TrainedPipeline(PipelineConfig cfg, PairFeaturizer featurizer);

  const PipelineConfig& config() const { return cfg_; }
  const PairFeaturizer& featurizer() const { return featurizer_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  void set_single(RouteModel m) { single_ = std::move(m); }
  void set_routes(std::optional<RouteModel> tweet, std::optional<RouteModel> other);

  // Outputs ordered by document, segment and frame. Routes without a model
  // fall back to the other route and record a warning.
  std::vector<SentimentOutput> predict(const Corpus& c,
                                       const PipelineResources& res);

  void save(std::ostream& out) const;
  static TrainedPipeline load(std::istream& in, const PipelineResources& res);

 private:
  const RouteModel& route_for(bool tweet);

  PipelineConfig cfg_;
  PairFeaturizer featurizer_;
  std::optional<RouteModel> single_;
  std::optional<RouteModel> tweet_;
  std::optional<RouteModel> other_;
  std::vector<std::string> warnings_;
};

TrainedPipeline train_pipeline(const Corpus& c, const PipelineConfig& cfg,
                               const PipelineResources& res,
                               const RouteFitter& fitter = {});

// Train on c, then predict on c.
std::vector<SentimentOutput> run_pipeline(const Corpus& c,
                                          const PipelineConfig& cfg,
                                          const PipelineResources& res,
                                          const RouteFitter& fitter = {});

// Wraps a route fitter as a CV trainer that honours the variant's routing.
Trainer variant_trainer(const PipelineConfig& cfg, const RouteFitter& fitter = {});

// Featurised pair dataset (TF-IDF fitted on the whole corpus).
LabeledDataset build_dataset(const Corpus& c, const PipelineConfig& cfg,
                             const PipelineResources& res);

// Document-grouped k-fold CV of the variant, with the inner grid search
// running inside every outer training split.
CvReport cross_validate(const Corpus& c, const PipelineConfig& cfg,
                        const PipelineResources& res, std::size_t k_outer);

// Predictions file: `SYS<TAB>system_id`, then one `OUT` record per output.
struct PredictionSet {
  std::string system_id;
  std::vector<SentimentOutput> outputs;
};

void write_predictions(std::ostream& out, const std::string& system_id,
                       const std::vector<SentimentOutput>& outputs);
PredictionSet parse_predictions(std::istream& in);
PredictionSet parse_predictions(std::string_view text);

// Parses and checks every record against the corpus.
std::vector<SentimentOutput> import_external_predictions(std::istream& in,
                                                         const Corpus& c);
std::vector<SentimentOutput> import_external_predictions(std::string_view text,
                                                         const Corpus& c);

}  // namespace sitsent
