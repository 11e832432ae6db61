#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <set>

#include "sitsent/error.hpp"
#include "sitsent/scorer.hpp"
#include "sitsent/synth.hpp"

using namespace sitsent;

namespace {

AgreementPartition partition_of(const SynthOutput& s) {
  const ReferenceSet ref = parse_reference(s.reference_text);
  return compute_agreement(ref.by_annotator.at(kSynthAnnotatorA),
                           ref.by_annotator.at(kSynthAnnotatorB));
}

}  // namespace

TEST_CASE("generated corpora are valid and match their manifest") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SynthSpec spec;
    spec.seed = seed;
    spec.frames_max = 3;
    const SynthOutput s = generate_synthetic(spec);
    CHECK(validate_corpus(s.corpus).empty());

    const Corpus reparsed = parse_corpus(s.corpus_text);
    CHECK(same_records(reparsed, s.corpus));

    const SynthManifest& m = s.manifest;
    CHECK(m.seed == seed);
    CHECK(m.documents == s.corpus.documents().size());
    CHECK(m.documents == spec.total_documents());
    CHECK(m.frames == s.corpus.frames().size());
    CHECK(m.annotations == s.corpus.annotations().size());
    CHECK(m.annotations == m.annotations_a + m.annotations_b);
    std::size_t segments = 0;
    for (const auto& d : s.corpus.documents()) {
      segments += d.segments.size();
      if (d.genre == Genre::tweet) CHECK(d.segments.size() == 1);
      CHECK(d.segments.size() <= spec.max_segments);
      const auto frames = s.corpus.frames_of(d.doc_id).size();
      CHECK(frames >= spec.frames_min);
      CHECK(frames <= spec.frames_max);
    }
    CHECK(m.segments == segments);

    const AgreementPartition p = partition_of(s);
    CHECK(p.d_size() == m.agreed);
    CHECK(p.s_size() == m.singletons);
    CHECK(parse_manifest(format_manifest(m)).agreed == m.agreed);
  }
}

TEST_CASE("full agreement leaves no singletons") {
  SynthSpec spec;
  spec.agreement = 1.0;
  const SynthOutput s = generate_synthetic(spec);
  const AgreementPartition p = partition_of(s);
  CHECK(p.s_size() == 0);
  CHECK(p.d_size() == s.manifest.pairs_positive);
  CHECK(s.manifest.singletons == 0);
}

TEST_CASE("positive pair count follows the rate") {
  SynthSpec spec;
  spec.positive_rate = 0.1;
  const SynthOutput s = generate_synthetic(spec);
  const double expected = std::round(0.1 * static_cast<double>(s.manifest.pairs_total));
  CHECK(static_cast<double>(s.manifest.pairs_positive) == std::max(1.0, expected));
}

TEST_CASE("generation is a pure function of its settings") {
  SynthSpec spec;
  spec.seed = 99;
  const SynthOutput a = generate_synthetic(spec);
  const SynthOutput b = generate_synthetic(spec);
  CHECK(a.corpus_text == b.corpus_text);
  CHECK(a.reference_text == b.reference_text);
  CHECK(format_manifest(a.manifest) == format_manifest(b.manifest));
  spec.seed = 100;
  CHECK(generate_synthetic(spec).corpus_text != a.corpus_text);
}

TEST_CASE("planted keywords mark the sentiment segments") {
  SynthSpec spec;
  spec.seed = 4;
  const SynthOutput s = generate_synthetic(spec);
  std::set<std::pair<std::string, std::string>> sentiment;
  for (const auto& a : s.corpus.annotations()) sentiment.insert({a.doc_id, a.segment_id});
  std::set<std::string> planted(spec.negative_keywords.begin(), spec.negative_keywords.end());
  planted.insert(spec.positive_keywords.begin(), spec.positive_keywords.end());
  for (const auto& d : s.corpus.documents()) {
    for (const auto& seg : d.segments) {
      bool has = false;
      for (const auto& w : planted) has = has || seg.text.find(w) != std::string::npos;
      CHECK(has == (sentiment.count({d.doc_id, seg.segment_id}) == 1));
    }
  }
}

TEST_CASE("spec files") {
  SynthSpec spec;
  spec.seed = 3;
  spec.documents = {{Genre::tweet, 5}, {Genre::sms, 2}};
  spec.agreement = 0.5;
  const SynthSpec back = parse_synth_spec(format_synth_spec(spec));
  CHECK(back.seed == 3);
  CHECK(back.documents == spec.documents);
  CHECK(back.agreement == 0.5);
  CHECK(format_synth_spec(back) == format_synth_spec(spec));
  CHECK_THROWS_AS(parse_synth_spec("colour=blue\n"), ConfigError);
  CHECK_THROWS_AS(parse_synth_spec("seed=abc\n"), ConfigError);
}

TEST_CASE("impossible specs are rejected") {
  auto rejects = [](auto mutate) {
    SynthSpec s;
    mutate(s);
    CHECK_THROWS_AS(generate_synthetic(s), ConfigError);
  };
  rejects([](SynthSpec& s) { s.documents.clear(); });
  rejects([](SynthSpec& s) { s.positive_rate = 0.0; });
  rejects([](SynthSpec& s) { s.positive_rate = 1.0; });
  rejects([](SynthSpec& s) { s.agreement = 1.5; });
  rejects([](SynthSpec& s) { s.frames_min = 3; s.frames_max = 2; });
  rejects([](SynthSpec& s) { s.filler_min = 5; s.filler_max = 4; });
  rejects([](SynthSpec& s) { s.keywords_per_segment = 4; });
  rejects([](SynthSpec& s) { s.fear_words.clear(); });
  rejects([](SynthSpec& s) { s.negative_keywords = {"the", "a", "of"}; });
  rejects([](SynthSpec& s) {
    s.documents = {{Genre::tweet, 1}};
    s.agreement = 0.5;
  });
}

TEST_CASE("the bundled seed-7 fixture regenerates byte for byte") {
  const std::string dir = std::string(SITSENT_SOURCE_DIR) + "/data/synth_seed7/";
  auto slurp = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  };
  const SynthSpec spec = parse_synth_spec(slurp(dir + "spec.txt"));
  CHECK(spec.seed == 7);
  const SynthOutput s = generate_synthetic(spec);
  CHECK(s.corpus_text == slurp(dir + "corpus.tsv"));
  CHECK(s.reference_text == slurp(dir + "reference.tsv"));

  const Corpus c = parse_corpus(slurp(dir + "corpus.tsv"));
  const SynthManifest m = parse_manifest(slurp(dir + "manifest.txt"));
  CHECK(c.documents().size() == m.documents);
  CHECK(c.frames().size() == m.frames);
  CHECK(c.annotations().size() == m.annotations);
  CHECK(pair_count(c) == m.pairs_total);
  std::size_t segments = 0;
  for (const auto& d : c.documents()) segments += d.segments.size();
  CHECK(segments == m.segments);
}
