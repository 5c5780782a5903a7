#include "intent/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

namespace intent::models {

double ConfusionMatrix::accuracy() const {
  const auto n = total();
  return n == 0 ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(n);
}

void ConfusionMatrix::add(int truth, int predicted) {
  if (truth) (predicted ? tp : fn) += 1;
  else (predicted ? fp : tn) += 1;
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& o) {
  tp += o.tp;
  tn += o.tn;
  fp += o.fp;
  fn += o.fn;
  return *this;
}

std::string model_name(const ModelSpec& spec) {
  if (const auto* k = std::get_if<KnnSpec>(&spec)) return "kNN (k=" + std::to_string(k->k) + ")";
  return "NN [5,10,1]";
}

Classifier train(const ModelSpec& spec, const LabeledDataset& data, const FeatureMask& mask,
                 const features::ScalingParams& scaling) {
  if (const auto* k = std::get_if<KnnSpec>(&spec)) return knn_fit(data, mask, k->k, scaling);
  return mlp_train(data, mask, std::get<MlpSpec>(spec).options, scaling);
}

Prediction predict(const Classifier& model, const features::FeatureVector& x) {
  return std::visit(
      [&](const auto& m) -> Prediction {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, KnnModel>) return knn_predict(m, x);
        else return mlp_predict(m, x);
      },
      model);
}

std::vector<Prediction> predict_batch(const Classifier& model,
                                      std::span<const features::FeatureVector> xs, Exec exec) {
  if (const auto* k = std::get_if<KnnModel>(&model)) return knn_predict_batch(*k, xs, exec);
  const auto& m = std::get<MlpModel>(model);
  std::vector<Prediction> out(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) out[i] = mlp_predict(m, xs[i]);
  return out;
}

const FeatureMask& mask_of(const Classifier& model) {
  return std::visit([](const auto& m) -> const FeatureMask& { return m.mask; }, model);
}

const features::ScalingParams& scaling_of(const Classifier& model) {
  return std::visit([](const auto& m) -> const features::ScalingParams& { return m.scaling; }, model);
}

ConfusionMatrix evaluate(const Classifier& model, const LabeledDataset& data, Exec exec) {
  const auto preds = predict_batch(model, data.x, exec);
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < data.size(); ++i) cm.add(data.y[i], preds[i].label);
  return cm;
}

namespace {

struct FoldPlan {
  std::vector<std::vector<std::size_t>> test;
  std::vector<std::vector<std::size_t>> train;
};

FoldPlan plan_folds(const LabeledDataset& data, int folds, std::uint64_t seed) {
  const std::size_t n = data.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order.begin(), order.end());
  FoldPlan plan;
  std::vector<int> fold_of(n);
  for (int f = 0; f < folds; ++f) {
    const std::size_t lo = n * static_cast<std::size_t>(f) / static_cast<std::size_t>(folds);
    const std::size_t hi = n * static_cast<std::size_t>(f + 1) / static_cast<std::size_t>(folds);
    std::vector<std::size_t> test(order.begin() + static_cast<std::ptrdiff_t>(lo),
                                  order.begin() + static_cast<std::ptrdiff_t>(hi));
    std::sort(test.begin(), test.end());
    for (std::size_t r : test) fold_of[r] = f;
    plan.test.push_back(std::move(test));
  }
  plan.train.resize(static_cast<std::size_t>(folds));
  for (std::size_t r = 0; r < n; ++r)
    for (int f = 0; f < folds; ++f)
      if (fold_of[r] != f) plan.train[static_cast<std::size_t>(f)].push_back(r);
  return plan;
}

bool both_classes(const LabeledDataset& data, const std::vector<std::size_t>& rows) {
  bool pos = false;
  bool neg = false;
  for (std::size_t r : rows) (data.y[r] ? pos : neg) = true;
  return pos && neg;
}

bool plan_ok(const LabeledDataset& data, const FoldPlan& plan) {
  return std::all_of(plan.train.begin(), plan.train.end(),
                     [&](const auto& rows) { return both_classes(data, rows); });
}

}  // namespace

CvResult cross_validate(const LabeledDataset& data, const FeatureMask& mask, const ModelSpec& spec,
                        int folds, std::uint64_t seed, Exec exec) {
  validate(mask);
  if (folds < 2) throw ParameterError("need at least 2 folds");
  if (data.size() < static_cast<std::size_t>(folds))
    throw ParameterError("fewer samples than folds; some fold would be empty");

  CvResult res;
  res.folds = folds;
  res.seed = seed;
  FoldPlan plan = plan_folds(data, folds, seed);
  if (!plan_ok(data, plan)) {
    plan = plan_folds(data, folds, seed ^ 0x5851f42d4c957f2dULL);
    res.resampled = true;
    if (!plan_ok(data, plan))
      throw TrainingError("a training split lacks one class even after resampling the folds");
  }

  res.per_fold.resize(static_cast<std::size_t>(folds));
  const auto run_fold = [&](int f) {
    const auto& tr = plan.train[static_cast<std::size_t>(f)];
    const auto& te = plan.test[static_cast<std::size_t>(f)];
    const LabeledDataset train_set = data.subset(tr);
    const LabeledDataset test_set = data.subset(te);
    const Classifier model = train(spec, train_set, mask);
    res.per_fold[static_cast<std::size_t>(f)] = evaluate(model, test_set, Exec::Serial);
  };

  // Exceptions must not cross the OpenMP region boundary.
  std::vector<std::string> errors(static_cast<std::size_t>(folds));
  if (exec == Exec::Serial) {
    for (int f = 0; f < folds; ++f) run_fold(f);
  } else {
#pragma omp parallel for schedule(dynamic, 1)
    for (int f = 0; f < folds; ++f) {
      try {
        run_fold(f);
      } catch (const std::exception& e) {
        errors[static_cast<std::size_t>(f)] = e.what();
      }
    }
    for (const auto& e : errors)
      if (!e.empty()) throw TrainingError(e);
  }

  double acc_sum = 0.0;
  for (const auto& cm : res.per_fold) {
    res.confusion += cm;
    acc_sum += cm.accuracy();
  }
  res.mean_fold_accuracy = acc_sum / folds;
  res.accuracy = res.confusion.accuracy();
  return res;
}

std::vector<AblationRow> ablation_study(const LabeledDataset& data,
                                        const std::vector<FeatureMask>& masks,
                                        const std::vector<ModelSpec>& specs, int folds,
                                        std::uint64_t seed, Exec exec) {
  if (masks.empty()) throw ParameterError("ablation needs at least one mask");
  std::vector<AblationRow> rows;
  for (const auto& spec : specs)
    for (const auto& mask : masks)
      rows.push_back({mask, model_name(spec), cross_validate(data, mask, spec, folds, seed, exec)});
  std::stable_sort(rows.begin(), rows.end(), [](const AblationRow& a, const AblationRow& b) {
    return a.result.accuracy > b.result.accuracy;
  });
  return rows;
}

std::string format_row(const FeatureMask& mask, const ConfusionMatrix& cm) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%-2s %-2s %-2s %-2s %-2s | %.4f | %lld %lld %lld %lld",
                mask.ts ? "TS" : "", mask.hp ? "HP" : "", mask.hs ? "HS" : "",
                mask.ga ? "GA" : "", mask.gs ? "GS" : "", cm.accuracy(),
                static_cast<long long>(cm.tp), static_cast<long long>(cm.tn),
                static_cast<long long>(cm.fp), static_cast<long long>(cm.fn));
  return buf;
}

std::string format_table(const std::vector<AblationRow>& rows) {
  std::string out = "model           | TS HP HS GA GS | acc    | TP TN FP FN\n";
  for (const auto& r : rows) {
    char name[32];
    std::snprintf(name, sizeof name, "%-15s | ", r.model.c_str());
    out += name + format_row(r.mask, r.result.confusion) + "\n";
  }
  return out;
}

}  // namespace intent::models
