#pragma once

// Reference implementations used to check the library. They share no code
// with it beyond the plain data types.

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

#include "sitsent/corpus.hpp"
#include "sitsent/learners.hpp"
#include "sitsent/scorer.hpp"

namespace sitsent::oracle {

// ---- linear objective -----------------------------------------------------

// Accumulated in long double so that central differences of the objective
// stay well below the tolerance even where the true gradient is zero.
inline long double objective_ld(const std::vector<LabeledRow>& rows,
                                const std::vector<long double>& w, long double b,
                                const ClassWeights& cw, double lambda, LossKind loss) {
  long double data = 0.0L;
  for (const auto& r : rows) {
    const std::vector<double> x = r.x.to_dense();
    long double dot = 0.0L;
    for (std::size_t j = 0; j < x.size(); ++j) dot += w[j] * x[j];
    const long double y = r.label == 1 ? 1.0L : -1.0L;
    const long double z = y * (dot + b);
    const long double c = r.label == 1 ? cw.positive : cw.negative;
    data += c * (loss == LossKind::hinge ? std::max(0.0L, 1.0L - z)
                                         : std::log1p(std::exp(-z)));
  }
  long double reg = 0.0L;
  for (long double v : w) reg += v * v;
  return data / static_cast<long double>(rows.size()) + lambda * reg;
}

inline double objective(const std::vector<LabeledRow>& rows, const std::vector<double>& w,
                        double b, const ClassWeights& cw, double lambda, LossKind loss) {
  const std::vector<long double> wl(w.begin(), w.end());
  return static_cast<double>(objective_ld(rows, wl, b, cw, lambda, loss));
}

struct FdResult {
  std::vector<double> weights;
  double bias = 0.0;
};

// Central differences with step h on every weight and on the bias.
inline FdResult fd_gradient(const std::vector<LabeledRow>& rows, const std::vector<double>& w0,
                            double b0, const ClassWeights& cw, double lambda,
                            LossKind loss, double h = 1e-5) {
  std::vector<long double> w(w0.begin(), w0.end());
  const long double b = b0;
  const long double step = h;
  FdResult g;
  for (std::size_t j = 0; j < w.size(); ++j) {
    const long double keep = w[j];
    w[j] = keep + step;
    const long double up = objective_ld(rows, w, b, cw, lambda, loss);
    w[j] = keep - step;
    const long double down = objective_ld(rows, w, b, cw, lambda, loss);
    w[j] = keep;
    g.weights.push_back(static_cast<double>((up - down) / (2.0L * step)));
  }
  g.bias = static_cast<double>((objective_ld(rows, w, b + step, cw, lambda, loss) -
                                objective_ld(rows, w, b - step, cw, lambda, loss)) /
                               (2.0L * step));
  return g;
}

inline double relative_error(double a, double n) {
  const double scale = std::max({std::abs(a), std::abs(n), 1e-6});
  return std::abs(a - n) / scale;
}

// ---- agreement-weighted scoring --------------------------------------------

struct Counts {
  std::size_t d_size = 0;
  std::size_t s_size = 0;
  std::size_t md = 0;
  std::size_t ms = 0;
  std::size_t unmatched = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

namespace detail {

// Largest number of A-B pairs with identical keys, by exhaustive search over
// "pair a[i] with some unused equal-key b, or leave it single".
inline std::size_t best_pairing(const std::vector<AnnotationKey>& a,
                                std::vector<AnnotationKey>& b_left, std::size_t i,
                                std::vector<AnnotationKey>& paired) {
  if (i == a.size()) return 0;
  std::vector<AnnotationKey> skip_pairs;
  std::size_t best = best_pairing(a, b_left, i + 1, skip_pairs);
  std::vector<AnnotationKey> best_pairs = skip_pairs;
  for (std::size_t j = 0; j < b_left.size(); ++j) {
    if (!(b_left[j] == a[i])) continue;
    AnnotationKey taken = b_left[j];
    b_left.erase(b_left.begin() + static_cast<std::ptrdiff_t>(j));
    std::vector<AnnotationKey> sub;
    const std::size_t with = 1 + best_pairing(a, b_left, i + 1, sub);
    b_left.insert(b_left.begin() + static_cast<std::ptrdiff_t>(j), taken);
    if (with > best) {
      best = with;
      sub.push_back(a[i]);
      best_pairs = sub;
    }
    break;  // equal-key partners are interchangeable
  }
  paired = best_pairs;
  return best;
}

// Best credit 2*md + ms over every way of sending each output to an unused
// D element, an unused S element, or nowhere.
inline void best_matching(const std::vector<AnnotationKey>& outs, std::size_t i,
                          std::map<AnnotationKey, std::size_t>& d_left,
                          std::map<AnnotationKey, std::size_t>& s_left, std::size_t md,
                          std::size_t ms, std::size_t& best_md, std::size_t& best_ms) {
  if (i == outs.size()) {
    if (2 * md + ms > 2 * best_md + best_ms) {
      best_md = md;
      best_ms = ms;
    }
    return;
  }
  const AnnotationKey& k = outs[i];
  best_matching(outs, i + 1, d_left, s_left, md, ms, best_md, best_ms);
  if (d_left[k] > 0) {
    --d_left[k];
    best_matching(outs, i + 1, d_left, s_left, md + 1, ms, best_md, best_ms);
    ++d_left[k];
  }
  if (s_left[k] > 0) {
    --s_left[k];
    best_matching(outs, i + 1, d_left, s_left, md, ms + 1, best_md, best_ms);
    ++s_left[k];
  }
}

}  // namespace detail

inline Counts sec_score(const std::vector<SentimentAnnotation>& a,
                        const std::vector<SentimentAnnotation>& b,
                        const std::vector<SentimentOutput>& outputs) {
  std::vector<AnnotationKey> ka;
  std::vector<AnnotationKey> kb;
  for (const auto& x : a) ka.push_back({x.doc_id, x.segment_id, x.polarity_score > 0 ? Polarity::positive : Polarity::negative, x.source, x.target});
  for (const auto& x : b) kb.push_back({x.doc_id, x.segment_id, x.polarity_score > 0 ? Polarity::positive : Polarity::negative, x.source, x.target});
  std::vector<AnnotationKey> paired;
  std::vector<AnnotationKey> b_left = kb;
  const std::size_t pairs = detail::best_pairing(ka, b_left, 0, paired);

  std::map<AnnotationKey, std::size_t> d_left;
  std::map<AnnotationKey, std::size_t> s_left;
  for (const auto& k : paired) ++d_left[k];
  for (const auto& k : ka) ++s_left[k];
  for (const auto& k : kb) ++s_left[k];
  for (const auto& k : paired) s_left[k] -= 2;

  Counts c;
  c.d_size = pairs;
  c.s_size = ka.size() + kb.size() - 2 * pairs;

  std::vector<AnnotationKey> outs;
  for (const auto& o : outputs) outs.push_back({o.doc_id, o.segment_id, o.polarity, o.source, o.target});
  detail::best_matching(outs, 0, d_left, s_left, 0, 0, c.md, c.ms);
  c.unmatched = outs.size() - c.md - c.ms;

  const double credit = 2.0 * static_cast<double>(c.md) + static_cast<double>(c.ms);
  const double p_den = credit + static_cast<double>(c.unmatched);
  const double r_den = 2.0 * static_cast<double>(c.d_size) + static_cast<double>(c.s_size);
  c.precision = p_den > 0 ? credit / p_den : 0.0;
  c.recall = r_den > 0 ? credit / r_den : 0.0;
  c.f1 = c.precision + c.recall > 0
             ? 2 * c.precision * c.recall / (c.precision + c.recall)
             : 0.0;
  return c;
}

// ---- plain precision / recall / F1 ----------------------------------------

struct Plain {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Each output may claim one equal-key reference item.
inline Plain plain_prf(const std::vector<AnnotationKey>& reference,
                       const std::vector<AnnotationKey>& outputs) {
  std::vector<AnnotationKey> left = reference;
  std::size_t hits = 0;
  for (const auto& o : outputs) {
    auto it = std::find(left.begin(), left.end(), o);
    if (it != left.end()) {
      left.erase(it);
      ++hits;
    }
  }
  Plain p;
  p.precision = outputs.empty() ? 0.0 : static_cast<double>(hits) / outputs.size();
  p.recall = reference.empty() ? 0.0 : static_cast<double>(hits) / reference.size();
  p.f1 = p.precision + p.recall > 0
             ? 2 * p.precision * p.recall / (p.precision + p.recall)
             : 0.0;
  return p;
}

// ---- exact permutation distribution ---------------------------------------

// Fraction of the 2^m document swap patterns whose |f1 difference| reaches
// the observed one. Every pattern is scored from scratch.
inline double exact_permutation_p(const std::vector<SentimentAnnotation>& ref_a,
                                  const std::vector<SentimentAnnotation>& ref_b,
                                  const std::vector<SentimentOutput>& a,
                                  const std::vector<SentimentOutput>& b) {
  std::vector<std::string> docs;
  for (const auto& o : a) docs.push_back(o.doc_id);
  for (const auto& o : b) docs.push_back(o.doc_id);
  std::sort(docs.begin(), docs.end());
  docs.erase(std::unique(docs.begin(), docs.end()), docs.end());
  const double observed =
      std::abs(sec_score(ref_a, ref_b, a).f1 - sec_score(ref_a, ref_b, b).f1);
  std::size_t hits = 0;
  const std::size_t patterns = std::size_t{1} << docs.size();
  for (std::size_t mask = 0; mask < patterns; ++mask) {
    std::vector<SentimentOutput> xa;
    std::vector<SentimentOutput> xb;
    auto swapped = [&](const std::string& doc) {
      const auto pos = std::find(docs.begin(), docs.end(), doc) - docs.begin();
      return (mask >> pos) & 1;
    };
    for (const auto& o : a) (swapped(o.doc_id) ? xb : xa).push_back(o);
    for (const auto& o : b) (swapped(o.doc_id) ? xa : xb).push_back(o);
    const double stat =
        std::abs(sec_score(ref_a, ref_b, xa).f1 - sec_score(ref_a, ref_b, xb).f1);
    if (stat >= observed - 1e-12) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(patterns);
}

}  // namespace sitsent::oracle
