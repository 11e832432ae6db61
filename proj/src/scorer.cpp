#include "sitsent/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "sitsent/random.hpp"

namespace sitsent {

AnnotationKey key_of(const SentimentAnnotation& a) {
  return {a.doc_id, a.segment_id, a.polarity(), a.source, a.target};
}

AnnotationKey key_of(const SentimentOutput& o) {
  return {o.doc_id, o.segment_id, o.polarity, o.source, o.target};
}

std::size_t total(const KeyMultiset& m) {
  std::size_t n = 0;
  for (const auto& [k, c] : m) n += c;
  return n;
}

namespace {

template <typename Range>
KeyMultiset to_multiset(const Range& items) {
  KeyMultiset m;
  for (const auto& x : items) ++m[key_of(x)];
  return m;
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

AgreementPartition compute_agreement(const std::vector<SentimentAnnotation>& a,
                                     const std::vector<SentimentAnnotation>& b) {
  const KeyMultiset ma = to_multiset(a);
  const KeyMultiset mb = to_multiset(b);
  AgreementPartition p;
  auto ia = ma.begin();
  auto ib = mb.begin();
  auto add_single = [&p](const AnnotationKey& k, std::size_t n) {
    if (n > 0) p.single[k] += n;
  };
  while (ia != ma.end() || ib != mb.end()) {
    if (ib == mb.end() || (ia != ma.end() && ia->first < ib->first)) {
      add_single(ia->first, ia->second);
      ++ia;
    } else if (ia == ma.end() || ib->first < ia->first) {
      add_single(ib->first, ib->second);
      ++ib;
    } else {
      const std::size_t both = std::min(ia->second, ib->second);
      p.agreed[ia->first] = both;
      add_single(ia->first, ia->second - both + ib->second - both);
      ++ia;
      ++ib;
    }
  }
  return p;
}

MatchCounts& MatchCounts::operator+=(const MatchCounts& o) {
  matches_in_d += o.matches_in_d;
  matches_in_s += o.matches_in_s;
  unmatched += o.unmatched;
  d_size += o.d_size;
  s_size += o.s_size;
  return *this;
}

ScoreReport metrics_from_counts(const MatchCounts& c) {
  ScoreReport r;
  r.counts = c;
  const double credit = 2.0 * static_cast<double>(c.matches_in_d) +
                        static_cast<double>(c.matches_in_s);
  const double p_den = credit + static_cast<double>(c.unmatched);
  const double r_den =
      2.0 * static_cast<double>(c.d_size) + static_cast<double>(c.s_size);
  if (p_den > 0.0) {
    r.precision = credit / p_den;
  } else {
    r.degenerate = true;
  }
  if (r_den > 0.0) {
    r.recall = credit / r_den;
  } else {
    r.degenerate = true;
  }
  if (r.precision + r.recall > 0.0) {
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  }
  return r;
}

ScoreReport score(const std::vector<SentimentOutput>& outputs,
                  const AgreementPartition& p) {
  std::map<std::string, MatchCounts> per_doc;
  for (const auto& [k, n] : p.agreed) per_doc[k.doc_id].d_size += n;
  for (const auto& [k, n] : p.single) per_doc[k.doc_id].s_size += n;

  for (const auto& [k, n] : to_multiset(outputs)) {
    MatchCounts& m = per_doc[k.doc_id];
    std::size_t left = n;
    if (auto it = p.agreed.find(k); it != p.agreed.end()) {
      const std::size_t used = std::min(left, it->second);
      m.matches_in_d += used;
      left -= used;
    }
    if (auto it = p.single.find(k); it != p.single.end()) {
      const std::size_t used = std::min(left, it->second);
      m.matches_in_s += used;
      left -= used;
    }
    m.unmatched += left;
  }

  MatchCounts sum;
  for (const auto& [doc, m] : per_doc) sum += m;
  ScoreReport r = metrics_from_counts(sum);
  r.per_document = std::move(per_doc);
  return r;
}

void write_score_report(std::ostream& out, const ScoreReport& r) {
  const MatchCounts& c = r.counts;
  out << "d_size=" << c.d_size << "\n"
      << "s_size=" << c.s_size << "\n"
      << "matches_in_d=" << c.matches_in_d << "\n"
      << "matches_in_s=" << c.matches_in_s << "\n"
      << "unmatched=" << c.unmatched << "\n"
      << "precision=" << fixed6(r.precision) << "\n"
      << "recall=" << fixed6(r.recall) << "\n"
      << "f1=" << fixed6(r.f1) << "\n"
      << "degenerate=" << (r.degenerate ? 1 : 0) << "\n"
      << "\n"
      << "doc_id\td_size\ts_size\tmatches_in_d\tmatches_in_s\tunmatched\t"
         "precision\trecall\tf1\n";
  for (const auto& [doc, m] : r.per_document) {
    const ScoreReport d = metrics_from_counts(m);
    out << doc << "\t" << m.d_size << "\t" << m.s_size << "\t" << m.matches_in_d
        << "\t" << m.matches_in_s << "\t" << m.unmatched << "\t"
        << fixed6(d.precision) << "\t" << fixed6(d.recall) << "\t"
        << fixed6(d.f1) << "\n";
  }
}

PermutationResult permutation_test(const std::vector<SentimentOutput>& a,
                                   const std::vector<SentimentOutput>& b,
                                   const AgreementPartition& p,
                                   std::size_t iterations, std::uint64_t seed) {
  const ScoreReport ra = score(a, p);
  const ScoreReport rb = score(b, p);

  // Scoring decomposes over documents, so a swap only exchanges the two
  // systems' per-document match counts.
  std::vector<std::string> units;
  for (const auto& o : a) units.push_back(o.doc_id);
  for (const auto& o : b) units.push_back(o.doc_id);
  std::sort(units.begin(), units.end());
  units.erase(std::unique(units.begin(), units.end()), units.end());

  auto system_part = [](const ScoreReport& r, const std::string& doc) {
    MatchCounts m;
    auto it = r.per_document.find(doc);
    if (it != r.per_document.end()) {
      m.matches_in_d = it->second.matches_in_d;
      m.matches_in_s = it->second.matches_in_s;
      m.unmatched = it->second.unmatched;
    }
    return m;
  };
  std::vector<MatchCounts> part_a;
  std::vector<MatchCounts> part_b;
  for (const auto& doc : units) {
    part_a.push_back(system_part(ra, doc));
    part_b.push_back(system_part(rb, doc));
  }
  MatchCounts shared;
  shared.d_size = ra.counts.d_size;
  shared.s_size = ra.counts.s_size;

  PermutationResult res;
  res.observed = std::abs(ra.f1 - rb.f1);
  res.iterations = iterations;
  res.exchange_units = units.size();
  res.exhaustive =
      units.size() < 63 && (std::size_t{1} << units.size()) <= iterations;

  Rng rng(seed);
  const std::size_t patterns =
      res.exhaustive ? (std::size_t{1} << units.size()) : 0;
  std::vector<bool> swap(units.size());
  for (std::size_t it = 0; it < iterations; ++it) {
    if (res.exhaustive) {
      const std::size_t pattern = it % patterns;
      for (std::size_t j = 0; j < units.size(); ++j) swap[j] = (pattern >> j) & 1;
    } else {
      for (std::size_t j = 0; j < units.size(); ++j) swap[j] = coin_flip(rng);
    }
    MatchCounts ca = shared;
    MatchCounts cb = shared;
    for (std::size_t j = 0; j < units.size(); ++j) {
      ca += swap[j] ? part_b[j] : part_a[j];
      cb += swap[j] ? part_a[j] : part_b[j];
    }
    const double stat =
        std::abs(metrics_from_counts(ca).f1 - metrics_from_counts(cb).f1);
    if (stat >= res.observed - 1e-12) ++res.at_least_as_extreme;
  }
  res.p_value = static_cast<double>(1 + res.at_least_as_extreme) /
                static_cast<double>(iterations + 1);
  return res;
}

void write_permutation_report(std::ostream& out, const PermutationResult& r) {
  out << "observed_abs_f1_difference=" << fixed6(r.observed) << "\n"
      << "iterations=" << r.iterations << "\n"
      << "exchange_units=" << r.exchange_units << "\n"
      << "exhaustive=" << (r.exhaustive ? 1 : 0) << "\n"
      << "at_least_as_extreme=" << r.at_least_as_extreme << "\n"
      << "p_value=" << format_number(r.p_value) << "\n";
}

}  // namespace sitsent
