#include <algorithm>
#include <utility>

#include "intent/models.hpp"

namespace intent::models {

KnnModel knn_fit(const LabeledDataset& data, const FeatureMask& mask, int k,
                 const features::ScalingParams& scaling) {
  validate(mask);
  if (k < 1 || k % 2 == 0) throw ParameterError("k must be a positive odd integer, got " + std::to_string(k));
  if (static_cast<std::size_t>(k) > data.size())
    throw ParameterError("k=" + std::to_string(k) + " exceeds " + std::to_string(data.size()) + " samples");
  if (data.y.size() != data.size()) throw InputShapeError("labels and rows differ in length");
  KnnModel m;
  m.mask = mask;
  m.k = k;
  m.dim = mask.size();
  m.scaling = scaling;
  m.rows.resize(data.size() * m.dim);
  m.labels.resize(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    mask.project(data.x[i], m.rows.data() + i * m.dim);
    m.labels[i] = data.y[i] != 0;
  }
  return m;
}

Prediction knn_predict_masked(const KnnModel& model, std::span<const double> x) {
  if (x.size() != model.dim) throw InputShapeError("query has wrong feature count");
  const std::size_t n = model.size();
  const std::size_t k = static_cast<std::size_t>(model.k);
  // Max-heap on (distance, index) holding the k best rows seen so far. Rows
  // arrive in ascending index order, so an equal distance never displaces.
  std::vector<std::pair<double, std::size_t>> heap;
  heap.reserve(k);
  const double* row = model.rows.data();
  for (std::size_t i = 0; i < n; ++i, row += model.dim) {
    double d2 = 0.0;
    for (std::size_t c = 0; c < model.dim; ++c) {
      const double diff = row[c] - x[c];
      d2 += diff * diff;
    }
    if (heap.size() < k) {
      heap.emplace_back(d2, i);
      std::push_heap(heap.begin(), heap.end());
    } else if (d2 < heap.front().first) {
      std::pop_heap(heap.begin(), heap.end());
      heap.back() = {d2, i};
      std::push_heap(heap.begin(), heap.end());
    }
  }
  std::size_t votes = 0;
  for (const auto& [d, i] : heap) votes += model.labels[i];
  Prediction p;
  p.score = static_cast<double>(votes) / static_cast<double>(heap.size());
  p.label = 2 * votes > heap.size() ? 1 : 0;
  return p;
}

Prediction knn_predict(const KnnModel& model, const features::FeatureVector& x) {
  double buf[5];
  model.mask.project(x, buf);
  return knn_predict_masked(model, {buf, model.dim});
}

std::vector<Prediction> knn_predict_batch(const KnnModel& model,
                                          std::span<const features::FeatureVector> xs,
                                          Exec exec) {
  std::vector<Prediction> out(xs.size());
  const auto n = static_cast<std::ptrdiff_t>(xs.size());
  if (exec == Exec::Serial) {
    for (std::ptrdiff_t q = 0; q < n; ++q) out[q] = knn_predict(model, xs[q]);
  } else {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t q = 0; q < n; ++q) out[q] = knn_predict(model, xs[q]);
  }
  return out;
}

}  // namespace intent::models
