#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "sitsent/error.hpp"
#include "sitsent/learners.hpp"
#include "sitsent/random.hpp"

namespace sitsent {

std::vector<std::size_t> FoldAssignment::test_rows(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of_row.size(); ++i) {
    if (fold_of_row[i] == fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> FoldAssignment::train_rows(std::size_t fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < fold_of_row.size(); ++i) {
    if (fold_of_row[i] != fold) out.push_back(i);
  }
  return out;
}

std::uint64_t FoldAssignment::hash() const {
  // FNV-1a over k and the per-row fold ids
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xFF;
      h *= 0x100000001b3ULL;
    }
  };
  mix(k);
  for (std::size_t f : fold_of_row) mix(f);
  return h;
}

FoldAssignment assign_folds(const LabeledDataset& d, std::size_t k,
                            std::uint64_t seed) {
  const std::size_t groups = d.group_count();
  if (k < 2 || k > groups) {
    throw ConfigError("k=" + std::to_string(k) + " folds needs 2 <= k <= " +
                      std::to_string(groups) + " (distinct groups)");
  }

  struct Group {
    std::vector<std::size_t> rows;
    std::size_t positives = 0;
  };
  std::vector<Group> list;
  std::map<std::string_view, std::size_t> index;
  for (std::size_t i = 0; i < d.size(); ++i) {
    auto [it, inserted] = index.try_emplace(d[i].group, list.size());
    if (inserted) list.emplace_back();
    list[it->second].rows.push_back(i);
    list[it->second].positives += d[i].label == 1 ? 1 : 0;
  }

  std::vector<std::size_t> order(list.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  shuffle(std::span<std::size_t>(order), rng);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return list[a].positives > list[b].positives;
  });

  std::vector<std::size_t> fold_pos(k, 0);
  std::vector<std::size_t> fold_rows(k, 0);
  FoldAssignment fa;
  fa.k = k;
  fa.fold_of_row.assign(d.size(), 0);
  for (std::size_t g : order) {
    std::size_t best = 0;
    for (std::size_t f = 1; f < k; ++f) {
      if (fold_pos[f] < fold_pos[best] ||
          (fold_pos[f] == fold_pos[best] && fold_rows[f] < fold_rows[best])) {
        best = f;
      }
    }
    fold_pos[best] += list[g].positives;
    fold_rows[best] += list[g].rows.size();
    for (std::size_t r : list[g].rows) fa.fold_of_row[r] = best;
  }
  return fa;
}

CvReport kfold_cv(const LabeledDataset& d, std::size_t k, const Trainer& trainer,
                  std::uint64_t seed) {
  const FoldAssignment fa = assign_folds(d, k, seed);
  CvReport report;
  report.k = k;
  report.seed = seed;
  report.assignment_hash = fa.hash();

  for (std::size_t f = 0; f < k; ++f) {
    const auto train_idx = fa.train_rows(f);
    const auto test_idx = fa.test_rows(f);
    const TrainedClassifier model = trainer(d.subset(train_idx));
    FoldResult fr;
    fr.train_rows = train_idx.size();
    fr.test_rows = test_idx.size();
    fr.description = model.description;
    for (std::size_t i : test_idx) fr.counts.add(d[i].label, model.predict(d[i]));
    fr.score = prf(fr.counts);
    report.pooled_counts += fr.counts;
    report.folds.push_back(std::move(fr));
  }
  report.pooled = prf(report.pooled_counts);

  auto mean_of = [&](auto field) {
    double s = 0.0;
    for (const auto& fr : report.folds) s += field(fr.score);
    return s / static_cast<double>(k);
  };
  auto stdev_of = [&](auto field, double mean) {
    double s = 0.0;
    for (const auto& fr : report.folds) {
      const double dx = field(fr.score) - mean;
      s += dx * dx;
    }
    return std::sqrt(s / static_cast<double>(k - 1));
  };
  auto p = [](const PrfScore& s) { return s.precision; };
  auto r = [](const PrfScore& s) { return s.recall; };
  auto f1 = [](const PrfScore& s) { return s.f1; };
  report.mean = {mean_of(p), mean_of(r), mean_of(f1), false};
  report.stdev = {stdev_of(p, report.mean.precision),
                  stdev_of(r, report.mean.recall), stdev_of(f1, report.mean.f1),
                  false};
  for (const auto& fr : report.folds) {
    report.mean.degenerate = report.mean.degenerate || fr.score.degenerate;
  }
  return report;
}

namespace {

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

void write_cv_report(std::ostream& out, const CvReport& r) {
  out << "k=" << r.k << "\n"
      << "seed=" << r.seed << "\n"
      << "fold_assignment_hash=" << r.assignment_hash << "\n"
      << "pooled_tp=" << r.pooled_counts.tp << "\n"
      << "pooled_fp=" << r.pooled_counts.fp << "\n"
      << "pooled_fn=" << r.pooled_counts.fn << "\n"
      << "pooled_tn=" << r.pooled_counts.tn << "\n"
      << "pooled_precision=" << fixed6(r.pooled.precision) << "\n"
      << "pooled_recall=" << fixed6(r.pooled.recall) << "\n"
      << "pooled_f1=" << fixed6(r.pooled.f1) << "\n"
      << "mean_precision=" << fixed6(r.mean.precision) << "\n"
      << "mean_recall=" << fixed6(r.mean.recall) << "\n"
      << "mean_f1=" << fixed6(r.mean.f1) << "\n"
      << "stdev_precision=" << fixed6(r.stdev.precision) << "\n"
      << "stdev_recall=" << fixed6(r.stdev.recall) << "\n"
      << "stdev_f1=" << fixed6(r.stdev.f1) << "\n"
      << "\n"
      << "fold\ttrain_rows\ttest_rows\ttp\tfp\tfn\ttn\tprecision\trecall\tf1\t"
         "degenerate\tchosen\n";
  for (std::size_t f = 0; f < r.folds.size(); ++f) {
    const FoldResult& fr = r.folds[f];
    out << f << "\t" << fr.train_rows << "\t" << fr.test_rows << "\t"
        << fr.counts.tp << "\t" << fr.counts.fp << "\t" << fr.counts.fn << "\t"
        << fr.counts.tn << "\t" << fixed6(fr.score.precision) << "\t"
        << fixed6(fr.score.recall) << "\t" << fixed6(fr.score.f1) << "\t"
        << (fr.score.degenerate ? 1 : 0) << "\t" << fr.description << "\n";
  }
}

}  // namespace sitsent
