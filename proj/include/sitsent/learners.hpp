#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "sitsent/features.hpp"

namespace sitsent {

enum class LossKind { logistic, hinge };

std::string_view to_string(LossKind k);
LossKind parse_loss_kind(std::string_view s);

struct Hyper {
  double lambda = 0.01;
  int epochs = 30;
  double learning_rate = 0.5;
  std::uint64_t seed = 42;

  bool operator==(const Hyper&) const = default;
};

std::string describe(const Hyper& h);

// The default regularisation grid, 1e-3 ... 1e2.
std::vector<Hyper> default_grid(const Hyper& base = {});
std::vector<Hyper> parse_grid(std::string_view csv, const Hyper& base = {});

struct ClassWeights {
  double negative = 1.0;
  double positive = 1.0;

  double of(int label) const { return label == 1 ? positive : negative; }
};

// Inverse class frequency, w_c = N / (2 n_c).
ClassWeights class_weights(std::span<const int> labels);

// Identity of the (frame, segment) pair a row was built from.
struct PairMeta {
  std::string doc_id;
  std::string segment_id;
  std::string frame_id;
  bool tweet = false;
};

struct LabeledRow {
  FeatureVector x;
  int label = 0;
  std::string group;  // rows sharing a group never straddle folds
  PairMeta meta;
};

class LabeledDataset {
 public:
  // Throws DegenerateDataError when empty, LayoutError on mixed layouts.
  explicit LabeledDataset(std::vector<LabeledRow> rows);

  std::size_t size() const { return rows_.size(); }
  const std::vector<LabeledRow>& rows() const { return rows_; }
  const LabeledRow& operator[](std::size_t i) const { return rows_[i]; }
  const FeatureLayout& layout() const { return rows_.front().x.layout; }
  std::vector<int> labels() const;
  std::size_t positives() const;
  double prevalence() const;
  std::size_t group_count() const;
  bool has_both_classes() const;

  LabeledDataset subset(std::span<const std::size_t> indices) const;

 private:
  std::vector<LabeledRow> rows_;
};

struct LinearModel {
  FeatureLayout layout;
  std::vector<double> weights;
  double bias = 0.0;
  LossKind loss = LossKind::hinge;
  Hyper hyper;

  static LinearModel zeros(FeatureLayout layout, LossKind loss, Hyper hyper);
};

struct Prediction {
  int label = 0;
  double score = 0.0;
};

double margin(const LinearModel& m, const FeatureVector& x);

// label = 1 iff w.x + b > 0; a score of exactly zero predicts 0.
Prediction predict_linear(const LinearModel& m, const FeatureVector& x);

// (1/N) sum_i c_{y_i} loss(y_i, w.x_i + b) + lambda ||w||^2
double objective(const LinearModel& m, std::span<const LabeledRow> batch,
                 const ClassWeights& cw);

struct Gradient {
  std::vector<double> weights;
  double bias = 0.0;
};

// Analytic (sub)gradient of objective() at m. For the hinge loss the kink at
// margin 1 takes the zero subgradient.
Gradient loss_gradient(const LinearModel& m, std::span<const LabeledRow> batch,
                       const ClassWeights& cw);

// Seeded SGD with per-epoch reshuffling and step size
// learning_rate / (1 + 2 lambda learning_rate t). Returns the epoch-end
// iterate with the lowest full objective; the trace records that running
// minimum, so it never increases. Bitwise reproducible.
LinearModel train_linear(const LabeledDataset& d, const ClassWeights& cw,
                         const Hyper& hyper, LossKind loss,
                         std::vector<double>* objective_trace = nullptr);

void save_linear_model(std::ostream& out, const LinearModel& m);
LinearModel load_linear_model(std::istream& in);

struct ConstantClassifier {
  int label = 1;
  int predict(const FeatureVector&) const { return label; }
};

// Always predicts the rarer label of d; a tie goes to label 1.
ConstantClassifier minority_baseline(const LabeledDataset& d);

struct BinaryCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  void add(int truth, int predicted);
  BinaryCounts& operator+=(const BinaryCounts& o);
};

struct PrfScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  // Set when a zero denominator forced a metric to 0.
  bool degenerate = false;
};

PrfScore prf(const BinaryCounts& c);

using Classifier = std::function<int(const LabeledRow&)>;

struct TrainedClassifier {
  Classifier predict;
  std::string description;
};

using Trainer = std::function<TrainedClassifier(const LabeledDataset&)>;

// Group-level stratified fold assignment: groups are shuffled under the seed,
// ordered by positive count, and dealt greedily to the fold with the fewest
// positives (then fewest rows, then lowest index).
struct FoldAssignment {
  std::size_t k = 0;
  std::vector<std::size_t> fold_of_row;

  std::vector<std::size_t> test_rows(std::size_t fold) const;
  std::vector<std::size_t> train_rows(std::size_t fold) const;
  std::uint64_t hash() const;
};

FoldAssignment assign_folds(const LabeledDataset& d, std::size_t k,
                            std::uint64_t seed);

struct FoldResult {
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  BinaryCounts counts;
  PrfScore score;
  std::string description;
};

struct CvReport {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::uint64_t assignment_hash = 0;
  std::vector<FoldResult> folds;
  PrfScore mean;
  PrfScore stdev;
  // Metrics over the concatenated held-out predictions of every fold.
  BinaryCounts pooled_counts;
  PrfScore pooled;
};

CvReport kfold_cv(const LabeledDataset& d, std::size_t k, const Trainer& trainer,
                  std::uint64_t seed);

void write_cv_report(std::ostream& out, const CvReport& r);

struct LinearSpec {
  LossKind loss = LossKind::hinge;
  // Inverse class frequency weights when set, uniform weights otherwise.
  bool balance_classes = true;
};

Trainer make_linear_trainer(const LinearSpec& spec, const Hyper& hyper);
Trainer make_minority_trainer();

struct GridResult {
  Hyper best;
  std::vector<std::pair<Hyper, double>> scores;  // pooled inner F1, grid order
};

// Picks the hyper with the highest pooled inner-CV F1; ties go to the
// smaller lambda, then to the earlier grid entry.
GridResult grid_search(const LabeledDataset& d, const std::vector<Hyper>& grid,
                       std::size_t k_inner, std::uint64_t seed,
                       const LinearSpec& spec);

// Inner grid search followed by a refit on all training rows. k_inner is
// clamped to the number of groups; with fewer than two groups or one class
// present the first grid entry is used without search.
Trainer make_nested_trainer(const LinearSpec& spec, std::vector<Hyper> grid,
                            std::size_t k_inner, std::uint64_t seed);

}  // namespace sitsent
