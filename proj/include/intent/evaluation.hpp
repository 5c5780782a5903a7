#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "intent/models.hpp"

namespace intent::models {

struct ConfusionMatrix {
  std::int64_t tp = 0;
  std::int64_t tn = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;

  std::int64_t total() const { return tp + tn + fp + fn; }
  double accuracy() const;
  void add(int truth, int predicted);
  ConfusionMatrix& operator+=(const ConfusionMatrix& o);
  bool operator==(const ConfusionMatrix&) const = default;
};

struct KnnSpec {
  int k = 11;
};

struct MlpSpec {
  MlpOptions options;
};

using ModelSpec = std::variant<KnnSpec, MlpSpec>;
std::string model_name(const ModelSpec& spec);  // "kNN (k=11)", "NN [5,10,1]"

using Classifier = std::variant<KnnModel, MlpModel>;

Classifier train(const ModelSpec& spec, const LabeledDataset& data, const FeatureMask& mask,
                 const features::ScalingParams& scaling = {});
Prediction predict(const Classifier& model, const features::FeatureVector& x);
std::vector<Prediction> predict_batch(const Classifier& model,
                                      std::span<const features::FeatureVector> xs,
                                      Exec exec = Exec::Parallel);
const FeatureMask& mask_of(const Classifier& model);
const features::ScalingParams& scaling_of(const Classifier& model);

ConfusionMatrix evaluate(const Classifier& model, const LabeledDataset& data,
                         Exec exec = Exec::Parallel);

struct CvResult {
  double accuracy = 0.0;            // pooled (TP+TN)/total over held-out folds
  double mean_fold_accuracy = 0.0;  // unweighted mean of per-fold accuracies
  ConfusionMatrix confusion;
  std::vector<ConfusionMatrix> per_fold;
  int folds = 0;
  std::uint64_t seed = 0;
  bool resampled = false;
};

// Frames are shuffled by `seed` and cut into `folds` contiguous chunks. If a
// training split lacks a class, the shuffle is redrawn once before failing.
CvResult cross_validate(const LabeledDataset& data, const FeatureMask& mask, const ModelSpec& spec,
                        int folds = 5, std::uint64_t seed = 1, Exec exec = Exec::Parallel);

struct AblationRow {
  FeatureMask mask;
  std::string model;
  CvResult result;
};

// One cross-validation per (mask, model), sorted by accuracy, best first.
std::vector<AblationRow> ablation_study(const LabeledDataset& data,
                                        const std::vector<FeatureMask>& masks,
                                        const std::vector<ModelSpec>& specs, int folds = 5,
                                        std::uint64_t seed = 1, Exec exec = Exec::Parallel);

// Table-style text: "TS HP HS GA GS | 0.9167 | 607 2145 163 87".
std::string format_row(const FeatureMask& mask, const ConfusionMatrix& cm);
std::string format_table(const std::vector<AblationRow>& rows);

}  // namespace intent::models
