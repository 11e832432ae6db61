#include <doctest.h>

#include <set>
#include <sstream>

#include "sitsent/error.hpp"
#include "sitsent/pipeline.hpp"
#include "sitsent/scorer.hpp"
#include "sitsent/synth.hpp"
#include "test_support.hpp"

using namespace sitsent;

namespace {

SynthSpec small_spec(std::uint64_t seed) {
  SynthSpec s;
  s.seed = seed;
  s.documents = {{Genre::tweet, 8}, {Genre::news_article, 8}};
  s.segments_mean = 4.0;
  s.segments_sd = 2.0;
  s.max_segments = 8;
  s.frames_max = 2;
  s.positive_rate = 0.15;
  return s;
}

PipelineConfig quick_config(Variant v) {
  PipelineConfig cfg;
  cfg.variant = v;
  cfg.grid = parse_grid("0.01,1");
  cfg.k_inner = 3;
  cfg.system_id = "sys";
  return cfg;
}

std::set<AnnotationKey> keys(const std::vector<SentimentOutput>& outs) {
  std::set<AnnotationKey> s;
  for (const auto& o : outs) s.insert(key_of(o));
  return s;
}

const char* kLexicon =
    "fear\tafraid,terrified\n"
    "anger\tfurious\n"
    "joy\thappy\n";

}  // namespace

TEST_CASE("pair construction") {
  const Corpus c = parse_corpus(testing::kSmallCorpus);
  const std::vector<PairInstance> pairs = build_pairs(c);
  REQUIRE(pairs.size() == 3);
  CHECK(pairs[0].doc_id == "d1");
  CHECK(pairs[0].tweet);
  CHECK(pairs[0].label == 1);
  CHECK(pairs[1].segment_id == "s0");
  CHECK(pairs[1].label == 0);
  CHECK(pairs[2].segment_id == "s1");
  CHECK(pairs[2].segment_index == 1);
  CHECK(pairs[2].frame_id == "f2");
  CHECK(pairs[2].label == 1);
  CHECK_FALSE(pairs[2].tweet);
}

TEST_CASE("pair count is frames times segments summed over documents") {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    SynthSpec s = small_spec(seed);
    s.frames_max = 3;
    const SynthOutput out = generate_synthetic(s);
    std::size_t expected = 0;
    for (const auto& d : out.corpus.documents()) {
      expected += out.corpus.frames_of(d.doc_id).size() * d.segments.size();
    }
    const auto pairs = build_pairs(out.corpus);
    CHECK(pairs.size() == expected);
    CHECK(pairs.size() == out.manifest.pairs_total);
    std::size_t pos = 0;
    for (const auto& p : pairs) pos += p.label;
    CHECK(pos == out.manifest.pairs_positive);
  }
}

TEST_CASE("domain routing") {
  const Corpus c = parse_corpus(testing::kSmallCorpus);
  const DomainPartition p = route_domains(c);
  CHECK(p.tweets == std::vector<std::string>{"d1"});
  CHECK(p.others == std::vector<std::string>{"d2"});
}

TEST_CASE("emotion tagging from the lexicon") {
  const Lexicon l = load_lexicon(kLexicon);
  const EmotionSet e = tag_emotions(l, tokenize("I am afraid and FURIOUS"));
  CHECK(e.count(Emotion::fear) == 1);
  CHECK(e.count(Emotion::anger) == 1);
  CHECK(e.count(Emotion::joy) == 0);
  CHECK(tag_emotions(l, tokenize("nothing here")).empty());
  CHECK_THROWS_AS(tag_emotions(load_lexicon("fear\tafraid\n"), tokenize("x")), ConfigError);
}

TEST_CASE("configuration checks") {
  PipelineConfig cfg;
  cfg.variant = Variant::baseline_embedding;
  cfg.blocks = FeatureBlocks{true, false, false};
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);
  cfg.variant = Variant::baseline_tfidf;
  cfg.blocks = FeatureBlocks{false, true, false};
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);
  cfg.blocks = FeatureBlocks{false, false, false};
  cfg.variant = Variant::model_iia;
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);
  CHECK(default_blocks(Variant::baseline_embedding).embedding);
  CHECK(default_blocks(Variant::model_iib).tfidf);
  CHECK(parse_variant("model_iic") == Variant::model_iic);
  CHECK_THROWS_AS(parse_variant("model_iv"), ConfigError);

  PipelineConfig ext;
  ext.variant = Variant::external;
  const Corpus c = parse_corpus(testing::kSmallCorpus);
  CHECK_THROWS_AS(train_pipeline(c, ext, {}), ConfigError);
}

TEST_CASE("outputs carry the configured defaults") {
  const SynthOutput s = generate_synthetic(small_spec(3));
  PipelineConfig cfg = quick_config(Variant::minority);
  const auto outs = run_pipeline(s.corpus, cfg, {});
  REQUIRE_FALSE(outs.empty());
  for (const auto& o : outs) {
    CHECK(o.polarity == Polarity::negative);
    CHECK(o.source == Source::author());
    CHECK(o.target.kind == Target::Kind::frame);
    CHECK(o.system_id == "sys");
    CHECK(o.emotions.empty());
  }
  // The minority baseline predicts every pair positive here.
  CHECK(outs.size() == build_pairs(s.corpus).size());

  cfg.default_polarity = Polarity::positive;
  cfg.default_source = Source::unspecified();
  PipelineResources res;
  res.lexicon = std::make_shared<const Lexicon>(load_lexicon(kLexicon));
  cfg.blocks = FeatureBlocks{true, false, true};
  bool tagged = false;
  for (const auto& o : run_pipeline(s.corpus, cfg, res)) {
    CHECK(o.polarity == Polarity::positive);
    CHECK(o.source == Source::unspecified());
    tagged = tagged || !o.emotions.empty();
  }
  CHECK(tagged);
}

TEST_CASE("model_iic is model_iib restricted to tweets") {
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    const SynthOutput s = generate_synthetic(small_spec(seed));
    const auto iib = run_pipeline(s.corpus, quick_config(Variant::model_iib), {});
    const auto iic = run_pipeline(s.corpus, quick_config(Variant::model_iic), {});
    std::vector<SentimentOutput> tweets_only;
    for (const auto& o : iib) {
      if (s.corpus.find_document(o.doc_id)->genre == Genre::tweet) tweets_only.push_back(o);
    }
    CHECK(keys(iic) == keys(tweets_only));
    CHECK(iic.size() == tweets_only.size());
  }
}

TEST_CASE("a missing route falls back with a warning") {
  SynthSpec only_tweets = small_spec(8);
  only_tweets.documents = {{Genre::tweet, 12}};
  only_tweets.positive_rate = 0.3;
  const SynthOutput train = generate_synthetic(only_tweets);
  TrainedPipeline tp = train_pipeline(train.corpus, quick_config(Variant::model_iib), {});
  CHECK(tp.warnings().empty());
  const SynthOutput mixed = generate_synthetic(small_spec(9));
  tp.predict(mixed.corpus, {});
  REQUIRE(tp.warnings().size() == 1);
  CHECK(tp.warnings()[0].find("non-tweet") != std::string::npos);
}

TEST_CASE("a trained pipeline survives save and load") {
  const SynthOutput s = generate_synthetic(small_spec(11));
  for (Variant v : {Variant::baseline_tfidf, Variant::model_iia, Variant::model_iib,
                    Variant::minority}) {
    TrainedPipeline tp = train_pipeline(s.corpus, quick_config(v), {});
    std::stringstream buf;
    tp.save(buf);
    const std::string saved = buf.str();
    TrainedPipeline back = TrainedPipeline::load(buf, {});
    CHECK(back.config().variant == v);
    CHECK(back.predict(s.corpus, {}) == tp.predict(s.corpus, {}));
    std::stringstream again;
    back.save(again);
    CHECK(again.str() == saved);
  }
  std::istringstream junk("garbage\n");
  CHECK_THROWS(TrainedPipeline::load(junk, {}));
}

TEST_CASE("cross-validation is seeded and document-grouped") {
  const SynthOutput s = generate_synthetic(small_spec(13));
  const PipelineConfig cfg = quick_config(Variant::model_iia);
  const CvReport a = cross_validate(s.corpus, cfg, {}, 4);
  const CvReport b = cross_validate(s.corpus, cfg, {}, 4);
  std::ostringstream ra;
  std::ostringstream rb;
  write_cv_report(ra, a);
  write_cv_report(rb, b);
  CHECK(ra.str() == rb.str());
  std::size_t tested = 0;
  for (const auto& f : a.folds) tested += f.test_rows;
  CHECK(tested == build_pairs(s.corpus).size());
  CHECK_THROWS_AS(cross_validate(s.corpus, cfg, {}, 100), ConfigError);
}

TEST_CASE("prediction files") {
  const Corpus c = parse_corpus(testing::kSmallCorpus);
  std::vector<SentimentOutput> outs = {testing::output("d1", "s0", Polarity::negative)};
  outs[0].emotions.insert(Emotion::fear);
  outs.push_back(testing::output("d2", "s1", Polarity::positive, Source::entity("mayor"),
                                 Target::frame("f2")));
  std::ostringstream out;
  write_predictions(out, "sys", outs);
  const PredictionSet back = parse_predictions(out.str());
  CHECK(back.system_id == "sys");
  CHECK(back.outputs == outs);
  CHECK(import_external_predictions(out.str(), c) == outs);

  CHECK_THROWS_AS(parse_predictions(""), ParseError);
  CHECK_THROWS_AS(parse_predictions("OUT\td1\n"), ParseError);
  CHECK_THROWS_AS(parse_predictions("SYS\tx\nOUT\td1\ts0\tneg\n"), FormatError);
  CHECK_THROWS_AS(parse_predictions("SYS\tx\nOUT\td1\ts0\tmaybe\t\tauthor\tframe:f1\n"),
                  FormatError);
  CHECK_THROWS_AS(parse_predictions("SYS\tx\nOUT\td1\ts0\tneg\tboredom\tauthor\tframe:f1\n"),
                  FormatError);
  CHECK_THROWS_AS(
      import_external_predictions("SYS\tx\nOUT\td9\ts0\tneg\t\tauthor\tframe:f1\n", c),
      ReferenceError);
  CHECK_THROWS_AS(
      import_external_predictions("SYS\tx\nOUT\td1\ts7\tneg\t\tauthor\tframe:f1\n", c),
      ReferenceError);
  CHECK_THROWS_AS(
      import_external_predictions("SYS\tx\nOUT\td1\ts0\tneg\t\tauthor\tframe:f2\n", c),
      ReferenceError);
}
