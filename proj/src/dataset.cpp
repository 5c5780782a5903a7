#include <algorithm>
#include <sstream>

#include "intent/models.hpp"

namespace intent::models {

void FeatureMask::project(const features::FeatureVector& f, double* out) const {
  std::size_t i = 0;
  if (ts) out[i++] = f.gamma;
  if (hp) out[i++] = ts ? f.d : f.proximity;
  if (hs) out[i++] = ts ? f.d_dot : f.proximity_dot;
  if (ga) out[i++] = f.alpha;
  if (gs) out[i++] = f.alpha_dot;
}

std::vector<double> FeatureMask::project(const features::FeatureVector& f) const {
  std::vector<double> v(size());
  project(f, v.data());
  return v;
}

std::string FeatureMask::to_string() const {
  std::string s;
  auto add = [&](bool on, const char* name) {
    if (!on) return;
    if (!s.empty()) s += ',';
    s += name;
  };
  add(ts, "TS");
  add(hp, "HP");
  add(hs, "HS");
  add(ga, "GA");
  add(gs, "GS");
  return s;
}

FeatureMask FeatureMask::parse(std::string_view s) {
  FeatureMask m{false, false, false, false, false};
  std::stringstream ss{std::string(s)};
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    tok.erase(std::remove_if(tok.begin(), tok.end(), ::isspace), tok.end());
    std::transform(tok.begin(), tok.end(), tok.begin(), ::toupper);
    if (tok == "TS") m.ts = true;
    else if (tok == "HP") m.hp = true;
    else if (tok == "HS") m.hs = true;
    else if (tok == "GA") m.ga = true;
    else if (tok == "GS") m.gs = true;
    else if (!tok.empty()) throw ParameterError("unknown feature flag '" + tok + "'");
  }
  validate(m);
  return m;
}

void validate(const FeatureMask& m) {
  if (m.size() == 0) throw ParameterError("feature mask selects no features");
}

std::vector<FeatureMask> ablation_presets() {
  return {
      {true, true, true, true, true},      {true, true, true, true, false},
      {true, true, false, true, true},     {true, true, false, true, false},
      {true, true, false, false, false},   {true, false, false, false, false},
      {false, true, false, false, false},
  };
}

std::size_t LabeledDataset::positives() const {
  return static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
}

void LabeledDataset::append(const LabeledDataset& other) {
  x.insert(x.end(), other.x.begin(), other.x.end());
  y.insert(y.end(), other.y.begin(), other.y.end());
  group.insert(group.end(), other.group.begin(), other.group.end());
}

Eigen::MatrixXd LabeledDataset::design(const FeatureMask& mask) const {
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> m(
      static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(mask.size()));
  for (std::size_t i = 0; i < size(); ++i) mask.project(x[i], m.row(static_cast<Eigen::Index>(i)).data());
  return m;
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> rows) const {
  LabeledDataset out;
  out.x.reserve(rows.size());
  out.y.reserve(rows.size());
  for (std::size_t r : rows) {
    out.x.push_back(x[r]);
    out.y.push_back(y[r]);
    out.group.push_back(r < group.size() ? group[r] : 0);
  }
  return out;
}

}  // namespace intent::models
