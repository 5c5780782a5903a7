#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "intent/features.hpp"

namespace intent::models {

enum class Exec { Serial, Parallel };

// Which reduced features a model reads. Flags follow the table column order
// TS, HP, HS, GA, GS.
struct FeatureMask {
  bool ts = true;
  bool hp = true;
  bool hs = true;
  bool ga = true;
  bool gs = true;

  std::size_t size() const { return ts + hp + hs + ga + gs; }
  // Masked feature values in column order. Without TS the hand features are
  // read ungated (FeatureVector::proximity / proximity_dot).
  void project(const features::FeatureVector& f, double* out) const;
  std::vector<double> project(const features::FeatureVector& f) const;

  std::string to_string() const;  // e.g. "TS,HP,GA"
  static FeatureMask parse(std::string_view s);
  static FeatureMask all() { return {}; }
  bool operator==(const FeatureMask&) const = default;
};

void validate(const FeatureMask& m);

// The seven feature combinations of the ablation table.
std::vector<FeatureMask> ablation_presets();

struct LabeledDataset {
  std::vector<features::FeatureVector> x;
  std::vector<int> y;      // 1 intentional, 0 unintentional
  std::vector<int> group;  // source trace index per row

  std::size_t size() const { return x.size(); }
  std::size_t positives() const;
  void append(const LabeledDataset& other);
  // Row-major masked design matrix.
  Eigen::MatrixXd design(const FeatureMask& mask) const;
  LabeledDataset subset(std::span<const std::size_t> rows) const;
};

struct Prediction {
  int label = 0;
  double score = 0.0;  // kNN vote fraction or network output
};

// ---- k nearest neighbours -------------------------------------------------

struct KnnModel {
  FeatureMask mask;
  int k = 11;
  std::size_t dim = 0;
  std::vector<double> rows;  // n x dim, row-major
  std::vector<std::uint8_t> labels;
  features::ScalingParams scaling;

  std::size_t size() const { return labels.size(); }
};

// Stores the masked rows verbatim. k must be odd, positive and <= n.
KnnModel knn_fit(const LabeledDataset& data, const FeatureMask& mask, int k,
                 const features::ScalingParams& scaling = {});

// Majority vote among the k nearest rows (Euclidean on masked features).
// Equal distances are ordered by ascending training row index; an exact vote
// tie predicts unintentional.
Prediction knn_predict(const KnnModel& model, const features::FeatureVector& x);
Prediction knn_predict_masked(const KnnModel& model, std::span<const double> x);

std::vector<Prediction> knn_predict_batch(const KnnModel& model,
                                          std::span<const features::FeatureVector> xs,
                                          Exec exec = Exec::Parallel);

// ---- feed-forward network [inputs, 10, 1] ---------------------------------

inline constexpr int kHiddenUnits = 10;

struct MlpModel {
  FeatureMask mask;
  Eigen::MatrixXd w1;  // hidden x inputs
  Eigen::VectorXd b1;  // hidden
  Eigen::VectorXd w2;  // hidden
  double b2 = 0.0;
  features::ScalingParams scaling;

  int inputs() const { return static_cast<int>(w1.cols()); }
  std::size_t parameter_count() const;
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> p);
};

struct MlpOptions {
  int epochs = 2000;
  double learning_rate = 0.5;
  std::uint64_t seed = 1;
  bool record_loss = false;
};

struct MlpTrainReport {
  double final_loss = 0.0;
  double training_accuracy = 0.0;
  std::vector<double> loss_history;  // loss before each epoch, if recorded
};

// Weights uniform in [-0.5, 0.5) drawn from the seed.
MlpModel mlp_init(const FeatureMask& mask, std::uint64_t seed);

// Mean binary cross-entropy over the rows of x.
double mlp_loss(const MlpModel& m, const Eigen::MatrixXd& x, std::span<const int> y);
// Loss and gradient in parameter order (w1 row-major, b1, w2, b2).
double mlp_loss_grad(const MlpModel& m, const Eigen::MatrixXd& x, std::span<const int> y,
                     std::vector<double>& grad);

// Full-batch gradient descent on binary cross-entropy. Throws TrainingError if
// the loss stops being finite.
MlpModel mlp_train(const LabeledDataset& data, const FeatureMask& mask, const MlpOptions& opt,
                   const features::ScalingParams& scaling = {}, MlpTrainReport* report = nullptr);

Prediction mlp_predict(const MlpModel& m, const features::FeatureVector& x);
// Throws InputShapeError if x does not match the network's input size.
Prediction mlp_predict_masked(const MlpModel& m, std::span<const double> x);

}  // namespace intent::models
