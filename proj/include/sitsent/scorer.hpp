#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "sitsent/corpus.hpp"

namespace sitsent {

// What the scorer compares: supporting segment, polarity sign, source and
// target. Sentiment magnitude and emotions are deliberately absent.
struct AnnotationKey {
  std::string doc_id;
  std::string segment_id;
  Polarity polarity = Polarity::negative;
  Source source;
  Target target;

  auto operator<=>(const AnnotationKey&) const = default;
};

AnnotationKey key_of(const SentimentAnnotation& a);
AnnotationKey key_of(const SentimentOutput& o);

using KeyMultiset = std::map<AnnotationKey, std::size_t>;

std::size_t total(const KeyMultiset& m);

// D: keys both annotators produced (one element per matched pair).
// S: everything left over from either annotator.
struct AgreementPartition {
  KeyMultiset agreed;
  KeyMultiset single;

  std::size_t d_size() const { return total(agreed); }
  std::size_t s_size() const { return total(single); }
};

AgreementPartition compute_agreement(const std::vector<SentimentAnnotation>& a,
                                     const std::vector<SentimentAnnotation>& b);

struct MatchCounts {
  std::size_t matches_in_d = 0;
  std::size_t matches_in_s = 0;
  std::size_t unmatched = 0;
  std::size_t d_size = 0;
  std::size_t s_size = 0;

  MatchCounts& operator+=(const MatchCounts& o);
};

struct ScoreReport {
  MatchCounts counts;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool degenerate = false;
  std::map<std::string, MatchCounts> per_document;
};

//   precision = (2 Md + Ms) / (2 Md + Ms + Unmatched)
//   recall    = (2 Md + Ms) / (2 |D| + |S|)
// Zero denominators give 0 and set `degenerate`.
ScoreReport metrics_from_counts(const MatchCounts& c);

// Each system key consumes at most one reference element, D before S.
ScoreReport score(const std::vector<SentimentOutput>& outputs,
                  const AgreementPartition& p);

void write_score_report(std::ostream& out, const ScoreReport& r);

struct PermutationResult {
  double observed = 0.0;  // |f1(A) - f1(B)|
  std::size_t at_least_as_extreme = 0;
  std::size_t iterations = 0;
  std::size_t exchange_units = 0;
  bool exhaustive = false;
  double p_value = 1.0;
};

// Approximate randomisation over documents. When 2^documents <= n the swap
// patterns are cycled in order instead of sampled; when n is a multiple of
// 2^documents the estimate is within 1/(n+1) of the exact permutation p.
// p = (1 + #{permuted >= observed}) / (n + 1).
PermutationResult permutation_test(const std::vector<SentimentOutput>& a,
                                   const std::vector<SentimentOutput>& b,
                                   const AgreementPartition& p,
                                   std::size_t iterations, std::uint64_t seed);

void write_permutation_report(std::ostream& out, const PermutationResult& r);

}  // namespace sitsent
