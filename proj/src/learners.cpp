#include "sitsent/learners.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "sitsent/corpus.hpp"
#include "sitsent/error.hpp"
#include "sitsent/random.hpp"

namespace sitsent {

std::string_view to_string(LossKind k) {
  return k == LossKind::hinge ? "hinge" : "logistic";
}

LossKind parse_loss_kind(std::string_view s) {
  if (s == "hinge") return LossKind::hinge;
  if (s == "logistic") return LossKind::logistic;
  throw ConfigError("unknown loss kind '" + std::string(s) + "'");
}

std::string describe(const Hyper& h) {
  return "lambda=" + format_number(h.lambda) +
         ",epochs=" + std::to_string(h.epochs) +
         ",learning_rate=" + format_number(h.learning_rate) +
         ",seed=" + std::to_string(h.seed);
}

std::vector<Hyper> default_grid(const Hyper& base) {
  std::vector<Hyper> grid;
  for (double lambda : {1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0}) {
    Hyper h = base;
    h.lambda = lambda;
    grid.push_back(h);
  }
  return grid;
}

std::vector<Hyper> parse_grid(std::string_view csv, const Hyper& base) {
  std::vector<Hyper> grid;
  for (const std::string& item : split(csv, ',')) {
    if (item.empty()) continue;
    Hyper h = base;
    std::size_t used = 0;
    try {
      h.lambda = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || !(h.lambda >= 0.0) || !std::isfinite(h.lambda)) {
      throw ConfigError("bad grid value '" + item + "'");
    }
    grid.push_back(h);
  }
  if (grid.empty()) throw ConfigError("empty hyperparameter grid");
  return grid;
}

ClassWeights class_weights(std::span<const int> labels) {
  std::size_t pos = 0;
  for (int y : labels) pos += y == 1 ? 1 : 0;
  const std::size_t n = labels.size();
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) {
    throw DegenerateDataError("class weights need both classes (" +
                              std::to_string(neg) + " negative, " +
                              std::to_string(pos) + " positive)");
  }
  const double total = static_cast<double>(n);
  return {total / (2.0 * static_cast<double>(neg)),
          total / (2.0 * static_cast<double>(pos))};
}

LabeledDataset::LabeledDataset(std::vector<LabeledRow> rows)
    : rows_(std::move(rows)) {
  if (rows_.empty()) throw DegenerateDataError("labeled dataset is empty");
  const FeatureLayout& l = rows_.front().x.layout;
  for (const auto& r : rows_) {
    if (!(r.x.layout == l)) {
      throw LayoutError("dataset rows disagree on feature layout: " +
                        describe(l) + " vs " + describe(r.x.layout));
    }
    if (r.group.empty()) {
      throw IntegrityError("dataset row without a group key");
    }
    if (r.label != 0 && r.label != 1) {
      throw IntegrityError("dataset label must be 0 or 1");
    }
  }
}

std::vector<int> LabeledDataset::labels() const {
  std::vector<int> out;
  out.reserve(rows_.size());
  for (const auto& r : rows_) out.push_back(r.label);
  return out;
}

std::size_t LabeledDataset::positives() const {
  std::size_t n = 0;
  for (const auto& r : rows_) n += r.label == 1 ? 1 : 0;
  return n;
}

double LabeledDataset::prevalence() const {
  return static_cast<double>(positives()) / static_cast<double>(rows_.size());
}

std::size_t LabeledDataset::group_count() const {
  std::set<std::string_view> groups;
  for (const auto& r : rows_) groups.insert(r.group);
  return groups.size();
}

bool LabeledDataset::has_both_classes() const {
  const std::size_t p = positives();
  return p > 0 && p < rows_.size();
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
  std::vector<LabeledRow> rows;
  rows.reserve(indices.size());
  for (std::size_t i : indices) rows.push_back(rows_.at(i));
  return LabeledDataset(std::move(rows));
}

LinearModel LinearModel::zeros(FeatureLayout layout, LossKind loss, Hyper hyper) {
  LinearModel m;
  m.layout = layout;
  m.weights.assign(layout.total(), 0.0);
  m.loss = loss;
  m.hyper = hyper;
  return m;
}

namespace {

double dot(std::span<const double> w, const FeatureVector& x) {
  double s = 0.0;
  for (const auto& [col, v] : x.sparse) s += w[col] * v;
  const std::size_t offset = x.layout.tfidf;
  for (std::size_t j = 0; j < x.dense.size(); ++j) s += w[offset + j] * x.dense[j];
  return s;
}

// Adds scale * x to w.
void axpy(std::vector<double>& w, double scale, const FeatureVector& x) {
  for (const auto& [col, v] : x.sparse) w[col] += scale * v;
  const std::size_t offset = x.layout.tfidf;
  for (std::size_t j = 0; j < x.dense.size(); ++j) w[offset + j] += scale * x.dense[j];
}

double signed_label(int y) { return y == 1 ? 1.0 : -1.0; }

double softplus(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double loss_value(LossKind k, double y, double f) {
  if (k == LossKind::hinge) return std::max(0.0, 1.0 - y * f);
  return softplus(-y * f);
}

// d loss / d f
double loss_slope(LossKind k, double y, double f) {
  if (k == LossKind::hinge) return y * f < 1.0 ? -y : 0.0;
  return -y * sigmoid(-y * f);
}

void check_layout(const LinearModel& m, const FeatureVector& x) {
  if (!(x.layout == m.layout)) {
    throw LayoutError("model layout " + describe(m.layout) +
                      " does not match features " + describe(x.layout));
  }
}

}  // namespace

double margin(const LinearModel& m, const FeatureVector& x) {
  check_layout(m, x);
  return dot(m.weights, x) + m.bias;
}

Prediction predict_linear(const LinearModel& m, const FeatureVector& x) {
  const double s = margin(m, x);
  return {s > 0.0 ? 1 : 0, s};
}

double objective(const LinearModel& m, std::span<const LabeledRow> batch,
                 const ClassWeights& cw) {
  double data = 0.0;
  for (const auto& r : batch) {
    data += cw.of(r.label) * loss_value(m.loss, signed_label(r.label), margin(m, r.x));
  }
  double reg = 0.0;
  for (double w : m.weights) reg += w * w;
  return data / static_cast<double>(batch.size()) + m.hyper.lambda * reg;
}

Gradient loss_gradient(const LinearModel& m, std::span<const LabeledRow> batch,
                       const ClassWeights& cw) {
  if (batch.empty()) throw DegenerateDataError("gradient of an empty batch");
  Gradient g;
  g.weights.assign(m.weights.size(), 0.0);
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (const auto& r : batch) {
    const double y = signed_label(r.label);
    const double slope = cw.of(r.label) * loss_slope(m.loss, y, margin(m, r.x)) * inv_n;
    if (slope == 0.0) continue;
    axpy(g.weights, slope, r.x);
    g.bias += slope;
  }
  for (std::size_t j = 0; j < g.weights.size(); ++j) {
    g.weights[j] += 2.0 * m.hyper.lambda * m.weights[j];
  }
  return g;
}

LinearModel train_linear(const LabeledDataset& d, const ClassWeights& cw,
                         const Hyper& hyper, LossKind loss,
                         std::vector<double>* objective_trace) {
  if (!(hyper.lambda >= 0.0) || hyper.epochs < 1 || !(hyper.learning_rate > 0.0)) {
    throw ConfigError("invalid hyperparameters: " + describe(hyper));
  }
  if (!d.has_both_classes()) {
    throw DegenerateDataError("training data holds a single class");
  }
  for (const auto& r : d.rows()) {
    bool finite = true;
    for (const auto& [col, v] : r.x.sparse) finite = finite && std::isfinite(v);
    for (double v : r.x.dense) finite = finite && std::isfinite(v);
    if (!finite) {
      throw NumericError("non-finite feature value in row of group " + r.group);
    }
  }

  const std::span<const LabeledRow> rows(d.rows());
  LinearModel best = LinearModel::zeros(d.layout(), loss, hyper);
  double best_obj = objective(best, rows, cw);

  // w = scale * v, so the L2 shrinkage costs O(1) per step.
  std::vector<double> v = best.weights;
  double scale = 1.0;
  double bias = 0.0;
  const double base_rate = hyper.learning_rate;
  std::uint64_t t = 0;

  std::vector<std::size_t> order(d.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(hyper.seed);

  for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
    shuffle(std::span<std::size_t>(order), rng);
    for (std::size_t i : order) {
      const LabeledRow& r = rows[i];
      const double eta =
          base_rate / (1.0 + 2.0 * hyper.lambda * base_rate * static_cast<double>(t));
      ++t;
      const double y = signed_label(r.label);
      const double f = scale * dot(v, r.x) + bias;
      const double g = cw.of(r.label) * loss_slope(loss, y, f);

      const double shrink = 1.0 - 2.0 * eta * hyper.lambda;
      if (shrink <= 0.0) {
        std::fill(v.begin(), v.end(), 0.0);
        scale = 1.0;
      } else {
        scale *= shrink;
      }
      if (g != 0.0) {
        axpy(v, -eta * g / scale, r.x);
        bias -= eta * g;
      }
      if (scale < 1e-9) {
        for (double& x : v) x *= scale;
        scale = 1.0;
      }
    }

    // The returned model is the best epoch-end iterate, so the logged trace
    // never increases even though single SGD epochs may.
    LinearModel candidate = best;
    for (std::size_t j = 0; j < v.size(); ++j) candidate.weights[j] = scale * v[j];
    candidate.bias = bias;
    const double obj = objective(candidate, rows, cw);
    if (!std::isfinite(obj)) throw NumericError("objective diverged");
    if (obj <= best_obj) {
      best = std::move(candidate);
      best_obj = obj;
    }
    if (objective_trace) objective_trace->push_back(best_obj);
  }
  return best;
}

ConstantClassifier minority_baseline(const LabeledDataset& d) {
  const std::size_t pos = d.positives();
  const std::size_t neg = d.size() - pos;
  if (pos == 0 || neg == 0) {
    throw DegenerateDataError("minority baseline needs both classes");
  }
  return {pos <= neg ? 1 : 0};
}

void BinaryCounts::add(int truth, int predicted) {
  if (truth == 1) {
    ++(predicted == 1 ? tp : fn);
  } else {
    ++(predicted == 1 ? fp : tn);
  }
}

BinaryCounts& BinaryCounts::operator+=(const BinaryCounts& o) {
  tp += o.tp;
  fp += o.fp;
  fn += o.fn;
  tn += o.tn;
  return *this;
}

PrfScore prf(const BinaryCounts& c) {
  PrfScore s;
  const double tp = static_cast<double>(c.tp);
  if (c.tp + c.fp > 0) {
    s.precision = tp / static_cast<double>(c.tp + c.fp);
  } else {
    s.degenerate = true;
  }
  if (c.tp + c.fn > 0) {
    s.recall = tp / static_cast<double>(c.tp + c.fn);
  } else {
    s.degenerate = true;
  }
  if (s.precision + s.recall > 0.0) {
    s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
  }
  return s;
}

Trainer make_linear_trainer(const LinearSpec& spec, const Hyper& hyper) {
  return [spec, hyper](const LabeledDataset& d) -> TrainedClassifier {
    if (!d.has_both_classes()) {
      const int only = d[0].label;
      return {[only](const LabeledRow&) { return only; },
              "constant=" + std::to_string(only)};
    }
    const ClassWeights cw =
        spec.balance_classes ? class_weights(d.labels()) : ClassWeights{};
    auto model = std::make_shared<const LinearModel>(
        train_linear(d, cw, hyper, spec.loss));
    return {[model](const LabeledRow& r) { return predict_linear(*model, r.x).label; },
            describe(hyper)};
  };
}

Trainer make_minority_trainer() {
  return [](const LabeledDataset& d) -> TrainedClassifier {
    const ConstantClassifier c = minority_baseline(d);
    return {[c](const LabeledRow& r) { return c.predict(r.x); },
            "minority=" + std::to_string(c.label)};
  };
}

GridResult grid_search(const LabeledDataset& d, const std::vector<Hyper>& grid,
                       std::size_t k_inner, std::uint64_t seed,
                       const LinearSpec& spec) {
  if (grid.empty()) throw ConfigError("empty hyperparameter grid");
  GridResult result;
  std::size_t best = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const CvReport r = kfold_cv(d, k_inner, make_linear_trainer(spec, grid[i]), seed);
    result.scores.emplace_back(grid[i], r.pooled.f1);
    if (i == 0) continue;
    const double f = r.pooled.f1;
    const double fb = result.scores[best].second;
    if (f > fb || (f == fb && grid[i].lambda < grid[best].lambda)) best = i;
  }
  result.best = grid[best];
  return result;
}

Trainer make_nested_trainer(const LinearSpec& spec, std::vector<Hyper> grid,
                            std::size_t k_inner, std::uint64_t seed) {
  if (grid.empty()) throw ConfigError("empty hyperparameter grid");
  return [spec, grid = std::move(grid), k_inner, seed](const LabeledDataset& d) {
    const std::size_t k = std::min(k_inner, d.group_count());
    Hyper chosen = grid.front();
    if (grid.size() > 1 && k >= 2 && d.has_both_classes()) {
      chosen = grid_search(d, grid, k, seed, spec).best;
    }
    return make_linear_trainer(spec, chosen)(d);
  };
}

}  // namespace sitsent
