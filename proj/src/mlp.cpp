#include <algorithm>
#include <cmath>

#include "intent/models.hpp"

namespace intent::models {

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

Eigen::VectorXd labels_vector(std::span<const int> y) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) v[static_cast<Eigen::Index>(i)] = y[i] != 0;
  return v;
}

struct Forward {
  Eigen::MatrixXd h;  // n x hidden
  Eigen::VectorXd z;  // n
};

Forward forward(const MlpModel& m, const Eigen::MatrixXd& x) {
  Forward f;
  f.h = ((x * m.w1.transpose()).rowwise() + m.b1.transpose()).unaryExpr(&sigmoid);
  f.z = (f.h * m.w2).array() + m.b2;
  return f;
}

double mean_loss(const Eigen::VectorXd& z, const Eigen::VectorXd& y) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) sum += softplus(z[i]) - y[i] * z[i];
  return sum / static_cast<double>(z.size());
}

void check_inputs(const MlpModel& m, const Eigen::MatrixXd& x, std::span<const int> y) {
  if (x.cols() != m.inputs()) throw InputShapeError("design matrix width does not match network inputs");
  if (static_cast<std::size_t>(x.rows()) != y.size()) throw InputShapeError("labels and rows differ in length");
  if (x.rows() == 0) throw InputShapeError("empty training set");
}

}  // namespace

std::size_t MlpModel::parameter_count() const {
  return static_cast<std::size_t>(w1.size() + b1.size() + w2.size() + 1);
}

std::vector<double> MlpModel::parameters() const {
  std::vector<double> p;
  p.reserve(parameter_count());
  for (Eigen::Index r = 0; r < w1.rows(); ++r)
    for (Eigen::Index c = 0; c < w1.cols(); ++c) p.push_back(w1(r, c));
  for (Eigen::Index i = 0; i < b1.size(); ++i) p.push_back(b1[i]);
  for (Eigen::Index i = 0; i < w2.size(); ++i) p.push_back(w2[i]);
  p.push_back(b2);
  return p;
}

void MlpModel::set_parameters(std::span<const double> p) {
  if (p.size() != parameter_count()) throw InputShapeError("parameter vector has wrong length");
  std::size_t k = 0;
  for (Eigen::Index r = 0; r < w1.rows(); ++r)
    for (Eigen::Index c = 0; c < w1.cols(); ++c) w1(r, c) = p[k++];
  for (Eigen::Index i = 0; i < b1.size(); ++i) b1[i] = p[k++];
  for (Eigen::Index i = 0; i < w2.size(); ++i) w2[i] = p[k++];
  b2 = p[k];
}

MlpModel mlp_init(const FeatureMask& mask, std::uint64_t seed) {
  validate(mask);
  MlpModel m;
  m.mask = mask;
  const auto in = static_cast<Eigen::Index>(mask.size());
  m.w1.resize(kHiddenUnits, in);
  m.b1.resize(kHiddenUnits);
  m.w2.resize(kHiddenUnits);
  Rng rng(seed);
  std::vector<double> p(m.parameter_count());
  for (double& v : p) v = rng.uniform(-0.5, 0.5);
  m.set_parameters(p);
  return m;
}

double mlp_loss(const MlpModel& m, const Eigen::MatrixXd& x, std::span<const int> y) {
  check_inputs(m, x, y);
  return mean_loss(forward(m, x).z, labels_vector(y));
}

double mlp_loss_grad(const MlpModel& m, const Eigen::MatrixXd& x, std::span<const int> y,
                     std::vector<double>& grad) {
  check_inputs(m, x, y);
  const Eigen::VectorXd yv = labels_vector(y);
  const Forward f = forward(m, x);
  const double n = static_cast<double>(x.rows());
  const Eigen::VectorXd dz = (f.z.unaryExpr(&sigmoid) - yv) / n;
  const Eigen::VectorXd gw2 = f.h.transpose() * dz;
  const double gb2 = dz.sum();
  const Eigen::MatrixXd da =
      ((dz * m.w2.transpose()).array() * f.h.array() * (1.0 - f.h.array())).matrix();
  const Eigen::MatrixXd gw1 = da.transpose() * x;
  const Eigen::VectorXd gb1 = da.colwise().sum().transpose();

  grad.clear();
  grad.reserve(m.parameter_count());
  for (Eigen::Index r = 0; r < gw1.rows(); ++r)
    for (Eigen::Index c = 0; c < gw1.cols(); ++c) grad.push_back(gw1(r, c));
  for (Eigen::Index i = 0; i < gb1.size(); ++i) grad.push_back(gb1[i]);
  for (Eigen::Index i = 0; i < gw2.size(); ++i) grad.push_back(gw2[i]);
  grad.push_back(gb2);
  return mean_loss(f.z, yv);
}

MlpModel mlp_train(const LabeledDataset& data, const FeatureMask& mask, const MlpOptions& opt,
                   const features::ScalingParams& scaling, MlpTrainReport* report) {
  const std::size_t pos = data.positives();
  if (pos == 0 || pos == data.size()) throw TrainingError("training data must contain both classes");
  if (opt.epochs < 0 || !(opt.learning_rate > 0.0)) throw ParameterError("invalid training options");
  MlpModel m = mlp_init(mask, opt.seed);
  m.scaling = scaling;
  const Eigen::MatrixXd x = data.design(mask);
  std::vector<double> params = m.parameters();
  std::vector<double> grad;
  MlpTrainReport rep;
  for (int e = 0; e < opt.epochs; ++e) {
    const double loss = mlp_loss_grad(m, x, data.y, grad);
    if (!std::isfinite(loss))
      throw TrainingError("loss diverged at epoch " + std::to_string(e) + " (learning rate " +
                          std::to_string(opt.learning_rate) + ")");
    if (opt.record_loss) rep.loss_history.push_back(loss);
    for (std::size_t i = 0; i < params.size(); ++i) params[i] -= opt.learning_rate * grad[i];
    if (!std::all_of(params.begin(), params.end(), [](double v) { return std::isfinite(v); }))
      throw TrainingError("parameters became non-finite at epoch " + std::to_string(e) + " (learning rate " +
                          std::to_string(opt.learning_rate) + ")");
    m.set_parameters(params);
  }
  rep.final_loss = mlp_loss(m, x, data.y);
  if (!std::isfinite(rep.final_loss)) throw TrainingError("final loss is not finite");
  const Forward f = forward(m, x);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < data.size(); ++i)
    correct += (sigmoid(f.z[static_cast<Eigen::Index>(i)]) >= 0.5 ? 1 : 0) == (data.y[i] != 0);
  rep.training_accuracy = static_cast<double>(correct) / static_cast<double>(data.size());
  if (report) *report = std::move(rep);
  return m;
}

Prediction mlp_predict_masked(const MlpModel& m, std::span<const double> x) {
  if (static_cast<Eigen::Index>(x.size()) != m.inputs())
    throw InputShapeError("network expects " + std::to_string(m.inputs()) + " inputs, got " +
                          std::to_string(x.size()));
  const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
  const Eigen::VectorXd h = (m.w1 * xv + m.b1).unaryExpr(&sigmoid);
  Prediction p;
  p.score = sigmoid(h.dot(m.w2) + m.b2);
  p.label = p.score >= 0.5 ? 1 : 0;
  return p;
}

Prediction mlp_predict(const MlpModel& m, const features::FeatureVector& x) {
  double buf[5];
  m.mask.project(x, buf);
  return mlp_predict_masked(m, {buf, m.mask.size()});
}

}  // namespace intent::models
