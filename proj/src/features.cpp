#include "intent/features.hpp"

#include <algorithm>
#include <cmath>

namespace intent::features {

namespace {

double clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

const Poi* find_kind(const PoiSet& pois, PoiKind kind) {
  for (const auto& p : pois.pois)
    if (p.kind == kind) return &p;
  return nullptr;
}

std::optional<double> angle_or_none(const std::optional<perception::GazeEstimate>& gaze,
                                    const Vec2& pixel) {
  try {
    return perception::gaze_angle_to_point(*gaze, pixel);
  } catch (const GeometryError&) {
    return std::nullopt;
  }
}

}  // namespace

bool SensorSnapshot::any_active() const {
  return std::any_of(gamma.begin(), gamma.end(), [](std::uint8_t g) { return g != 0; });
}

void validate(const SensorSnapshot& s) {
  if (s.gamma.size() != s.positions.size())
    throw InputShapeError("snapshot has " + std::to_string(s.gamma.size()) + " touch bits but " +
                          std::to_string(s.positions.size()) + " positions");
}

void validate(const PoiSet& pois) {
  int left = 0;
  int right = 0;
  for (const auto& p : pois.pois) {
    left += p.kind == PoiKind::HandLeft;
    right += p.kind == PoiKind::HandRight;
  }
  if (left > 1 || right > 1) throw ParameterError("at most one POI per hand is allowed");
}

void validate(const ScalingParams& p) {
  for (double v : {p.d_max, p.d_dot_max, p.alpha_max, p.alpha_dot_max, p.proximity_dot_max})
    if (!(v > 0.0) || !std::isfinite(v))
      throw ParameterError("scaling maxima must be finite and strictly positive");
}

double BackwardDifference::rate(double value, double t) {
  if (prev_ && !(t > prev_t_))
    throw StreamOrderError("timestamps must be strictly increasing within a stream");
  double r = 0.0;
  if (prev_) r = std::abs(value - *prev_) / (t - prev_t_);
  prev_ = value;
  prev_t_ = t;
  return r;
}

double BackwardDifference::update(double value, double t, double rate_max) {
  return clamp01(rate(value, t) / rate_max);
}

double hand_distance(const Vec3& hand, std::size_t sensor, const SensorSnapshot& snapshot,
                     const ScalingParams& scaling) {
  if (sensor >= snapshot.gamma.size() || sensor >= snapshot.positions.size())
    throw LookupError("unknown sensor id " + std::to_string(sensor));
  if (snapshot.gamma[sensor] == 0) return 1.0;
  return std::min(1.0, (hand - snapshot.positions[sensor]).norm() / scaling.d_max);
}

RawGazeAngles assign_hands_and_gaze_raw(const SensorSnapshot& snapshot, const Wrists& wrists,
                                        const std::optional<perception::GazeEstimate>& gaze,
                                        const PoiSet& pois) {
  validate(snapshot);
  constexpr double inf = std::numeric_limits<double>::infinity();
  bool use_left = false;
  bool use_right = false;
  for (std::size_t j = 0; j < snapshot.size(); ++j) {
    if (snapshot.gamma[j] == 0) continue;
    const double dl = wrists.left ? (*wrists.left - snapshot.positions[j]).norm() : inf;
    const double dr = wrists.right ? (*wrists.right - snapshot.positions[j]).norm() : inf;
    if (wrists.left && dl <= dr) use_left = true;
    if (wrists.right && dr < dl) use_right = true;
  }

  RawGazeAngles out;
  const bool gaze_ok = gaze && gaze->valid();
  for (const auto& p : pois.pois) {
    if (p.kind == PoiKind::Static)
      out.statics.push_back(gaze_ok ? angle_or_none(gaze, p.pixel) : std::nullopt);
  }
  if (!gaze_ok) return out;
  if (use_left)
    if (const Poi* p = find_kind(pois, PoiKind::HandLeft)) out.left = angle_or_none(gaze, p->pixel);
  if (use_right)
    if (const Poi* p = find_kind(pois, PoiKind::HandRight))
      out.right = angle_or_none(gaze, p->pixel);
  return out;
}

double GazeAngles::min() const {
  double m = std::min(left, right);
  for (double s : statics) m = std::min(m, s);
  return m;
}

GazeAngles scale(const RawGazeAngles& raw, const ScalingParams& scaling) {
  auto s = [&](const std::optional<double>& a) {
    return a ? clamp01(*a / scaling.alpha_max) : 1.0;
  };
  GazeAngles g;
  g.left = s(raw.left);
  g.right = s(raw.right);
  g.statics.reserve(raw.statics.size());
  for (const auto& a : raw.statics) g.statics.push_back(s(a));
  return g;
}

GazeAngles assign_hands_and_gaze(const SensorSnapshot& snapshot, const Wrists& wrists,
                                 const std::optional<perception::GazeEstimate>& gaze,
                                 const PoiSet& pois, const ScalingParams& scaling) {
  return scale(assign_hands_and_gaze_raw(snapshot, wrists, gaze, pois), scaling);
}

FrameMeasurements measure(const FrameInputs& in) {
  validate(in.snapshot);
  FrameMeasurements m;
  m.t = in.t;
  m.any_touch = in.snapshot.any_active();
  for (std::size_t j = 0; j < in.snapshot.size(); ++j) {
    const Vec3& p = in.snapshot.positions[j];
    for (const auto* w : {&in.wrists.left, &in.wrists.right}) {
      if (!*w) continue;
      const double dist = (**w - p).norm();
      m.ungated_min = std::min(m.ungated_min, dist);
      if (in.snapshot.gamma[j] != 0) {
        m.active_distances.push_back(dist);
        m.gated_min = std::min(m.gated_min, dist);
      }
    }
  }
  m.angles = assign_hands_and_gaze_raw(in.snapshot, in.wrists, in.gaze, in.pois);
  return m;
}

FeatureVector reduce(const FrameMeasurements& m, const ScalingParams& scaling,
                     FeatureStreamState& state) {
  if (state.last_t && !(m.t > *state.last_t))
    throw StreamOrderError("frame at t=" + std::to_string(m.t) +
                           " does not follow t=" + std::to_string(*state.last_t));
  FeatureVector f;
  f.gamma = m.any_touch ? 1.0 : 0.0;
  f.d = (m.any_touch && std::isfinite(m.gated_min)) ? std::min(1.0, m.gated_min / scaling.d_max)
                                                    : 1.0;
  f.alpha = scale(m.angles, scaling).min();
  f.proximity = std::isfinite(m.ungated_min) ? std::min(1.0, m.ungated_min / scaling.d_max) : 1.0;
  f.d_dot = state.d.update(f.d, m.t, scaling.d_dot_max);
  f.alpha_dot = state.alpha.update(f.alpha, m.t, scaling.alpha_dot_max);
  f.proximity_dot = state.proximity.update(f.proximity, m.t, scaling.proximity_dot_max);
  state.last_t = m.t;
  return f;
}

ScalingParams fit_scaling(std::span<const std::vector<FrameMeasurements>> streams) {
  ScalingParams p;
  double d_max = 0.0;
  double a_max = 0.0;
  bool any_active = false;
  for (const auto& s : streams) {
    for (const auto& m : s) {
      for (double d : m.active_distances) {
        d_max = std::max(d_max, d);
        any_active = true;
      }
      for (const auto* a : {&m.angles.left, &m.angles.right})
        if (*a) a_max = std::max(a_max, **a);
      for (const auto& a : m.angles.statics)
        if (a) a_max = std::max(a_max, *a);
    }
  }
  if (!any_active) throw FitError("training frames contain no active sensor with a visible hand");
  if (!(d_max > 0.0)) throw FitError("all hand distances are zero");
  if (!(a_max > 0.0)) throw FitError("training frames contain no gaze angle");
  p.d_max = d_max;
  p.alpha_max = a_max;

  // Second pass: rates of the scaled signals. Unit rate maxima keep the
  // intermediate values unclamped.
  ScalingParams unit = p;
  unit.d_dot_max = unit.alpha_dot_max = unit.proximity_dot_max = 1.0;
  double dd = 0.0;
  double ad = 0.0;
  double pd = 0.0;
  for (const auto& s : streams) {
    FeatureStreamState st;
    for (const auto& m : s) {
      const double d = (m.any_touch && std::isfinite(m.gated_min)) ? std::min(1.0, m.gated_min / d_max) : 1.0;
      const double a = scale(m.angles, unit).min();
      const double prox = std::isfinite(m.ungated_min) ? std::min(1.0, m.ungated_min / d_max) : 1.0;
      dd = std::max(dd, st.d.rate(d, m.t));
      ad = std::max(ad, st.alpha.rate(a, m.t));
      pd = std::max(pd, st.proximity.rate(prox, m.t));
    }
  }
  if (!(dd > 0.0) || !(ad > 0.0) || !(pd > 0.0))
    throw FitError("training streams are constant; cannot fit speed maxima");
  p.d_dot_max = dd;
  p.alpha_dot_max = ad;
  p.proximity_dot_max = pd;
  return p;
}

}  // namespace intent::features
