#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <string>
#include <vector>

#include "sitsent/corpus.hpp"

namespace sitsent {

// Shape of a synthetic dual-annotated corpus. Non-tweet segment counts are
// drawn from a rounded normal (default 7.07 +- 4.96, clamped to
// [1, max_segments]); tweets always have one segment.
struct SynthSpec {
  std::uint64_t seed = 7;
  std::string language = "eng";
  std::map<Genre, std::size_t> documents = {{Genre::tweet, 20},
                                            {Genre::news_article, 10}};
  double segments_mean = 7.07;
  double segments_sd = 4.96;
  std::size_t max_segments = 30;
  std::size_t frames_min = 1;
  std::size_t frames_max = 1;
  // Filler words per segment, drawn uniformly from [filler_min, filler_max].
  std::size_t filler_min = 3;
  std::size_t filler_max = 6;
  // Fraction of (frame, segment) pairs that carry sentiment.
  double positive_rate = 0.05;
  // Fraction of sentiment instances both annotators agree on.
  double agreement = 0.7;
  double negative_share = 0.85;
  double emotion_rate = 0.5;
  // Distinct polarity keywords planted in each sentiment-bearing segment.
  std::size_t keywords_per_segment = 3;
  std::vector<std::string> negative_keywords = {"devastated", "terrible", "tragic"};
  std::vector<std::string> positive_keywords = {"grateful", "relieved", "hopeful"};
  std::vector<std::string> fear_words = {"afraid", "terrified"};
  std::vector<std::string> anger_words = {"furious", "outraged"};
  std::vector<std::string> joy_words = {"happy", "delighted"};

  std::size_t total_documents() const;
};

// `key=value` lines; unknown keys are a ConfigError. Genre keys
// (`tweet=20`) replace the default document mix as a whole.
SynthSpec parse_synth_spec(std::istream& in);
SynthSpec parse_synth_spec(std::string_view text);
std::string format_synth_spec(const SynthSpec& s);

// Throws ConfigError for specs that cannot be honoured.
void validate_synth_spec(const SynthSpec& s);

struct SynthManifest {
  std::uint64_t seed = 0;
  std::map<Genre, std::size_t> documents_by_genre;
  std::size_t documents = 0;
  std::size_t segments = 0;
  std::size_t frames = 0;
  std::size_t annotations = 0;
  std::size_t annotations_a = 0;
  std::size_t annotations_b = 0;
  std::size_t pairs_total = 0;  // sum over documents of frames x segments
  std::size_t pairs_positive = 0;
  std::size_t agreed = 0;      // |D|
  std::size_t singletons = 0;  // |S|
};

std::string format_manifest(const SynthManifest& m);
SynthManifest parse_manifest(std::string_view text);

struct SynthOutput {
  Corpus corpus;
  std::string corpus_text;
  std::string reference_text;
  SynthManifest manifest;
};

inline constexpr const char* kSynthAnnotatorA = "ann_a";
inline constexpr const char* kSynthAnnotatorB = "ann_b";

SynthOutput generate_synthetic(const SynthSpec& spec);

}  // namespace sitsent
