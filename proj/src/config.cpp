#include "intent/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace intent {

using nlohmann::json;

namespace {

json vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vec_from(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

Vec3 vec3_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Vec2 vec2_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("expected a 2-vector");
  return {j[0].get<double>(), j[1].get<double>()};
}

json transform_json(const Transform& t) {
  json j;
  j["translation"] = {t.translation().x(), t.translation().y(), t.translation().z()};
  if (!t.linear().isIdentity(0.0)) {
    json r = json::array();
    for (int i = 0; i < 3; ++i) r.push_back({t.linear()(i, 0), t.linear()(i, 1), t.linear()(i, 2)});
    j["rotation"] = r;
  }
  return j;
}

Transform transform_from(const json& j) {
  Transform t = Transform::Identity();
  t.translation() = vec3_from(j.at("translation"));
  if (j.contains("rotation")) {
    const auto& r = j.at("rotation");
    if (r.size() != 3) throw ConfigError("rotation must be a 3x3 matrix");
    for (int i = 0; i < 3; ++i) {
      if (r[i].size() != 3) throw ConfigError("rotation must be a 3x3 matrix");
      for (int c = 0; c < 3; ++c) t.linear()(i, c) = r[i][c].get<double>();
    }
  }
  return t;
}

json gains_json(const control::ImpedanceGains& g) { return {{"kp", vec_json(g.kp)}, {"kd", vec_json(g.kd)}}; }

control::ImpedanceGains gains_from(const json& j) {
  return {vec_from(j.at("kp")), vec_from(j.at("kd"))};
}

}  // namespace

void validate(const PipelineConfig& c) {
  if (!(c.window_span > 0.0)) throw ConfigError("window span must be positive");
  if (!(c.threshold > 0.0 && c.threshold < 1.0)) throw ConfigError("threshold must lie in (0, 1)");
}

SceneConfig SceneConfig::demo() {
  SceneConfig c;
  c.arms = kinematics::demo_arms();
  c.layout = kinematics::demo_layout(c.arms);
  perception::CameraIntrinsics intr{600.0, 600.0, 320.0, 240.0};
  c.camera = perception::Camera::look_at(intr, Vec3(-0.3, 0.0, 2.1), Vec3(0.75, 0.0, 1.0));
  c.limb_bounds = perception::LimbLengthBounds::defaults();
  c.home = {(Eigen::VectorXd(7) << 0.2, 0.15, 0.0, 0.35, 0.0, 0.3, 0.0).finished(),
            (Eigen::VectorXd(7) << -0.2, 0.15, 0.0, 0.35, 0.0, 0.3, 0.0).finished()};
  const auto pix = [&](const Vec3& w) { return perception::to_pixel(w, c.camera).pixel; };
  c.pois = {
      {"tool_left", PoiConfig::Kind::EndEffector, Vec2::Zero(), 0},
      {"tool_right", PoiConfig::Kind::EndEffector, Vec2::Zero(), 1},
      {"monitor", PoiConfig::Kind::Static, pix(Vec3(0.1, 0.9, 1.45)), 0},
      {"workpiece", PoiConfig::Kind::Static, pix(Vec3(0.75, 0.0, 0.78)), 0},
  };
  c.gains = control::GainPresets::defaults(7);
  c.inertia = Eigen::VectorXd::Ones(7);
  return c;
}

void validate(const SceneConfig& c) {
  if (c.arms.empty()) throw ConfigError("scene needs at least one arm");
  try {
    for (const auto& a : c.arms) kinematics::validate(a.chain);
    kinematics::validate(c.layout, c.arms);
  } catch (const LayoutError& e) {
    throw ConfigError(e.what());
  }
  perception::validate(c.camera.intrinsics);
  perception::validate(c.limb_bounds);
  validate(c.pipeline);
  control::validate(c.gains);
  const auto dof = c.arms.front().chain.dof();
  for (const auto& a : c.arms)
    if (a.chain.dof() != dof) throw ConfigError("all arms must share one dof");
  if (static_cast<std::size_t>(c.gains.stiff.kp.size()) != dof ||
      static_cast<std::size_t>(c.inertia.size()) != dof)
    throw ConfigError("gains and inertia must have one entry per joint");
  if ((c.inertia.array() <= 0.0).any()) throw ConfigError("inertia must be positive");
  if (!(c.control_dt > 0.0)) throw ConfigError("control_dt must be positive");
  if (!(c.push.stiffness >= 0.0 && c.push.damping >= 0.0 && c.push.torque_limit >= 0.0))
    throw ConfigError("human push parameters must be non-negative");
  if (c.home.size() != c.arms.size()) throw ConfigError("need one home configuration per arm");
  for (std::size_t a = 0; a < c.arms.size(); ++a) {
    try {
      kinematics::check_joint_config(c.arms[a].chain, c.home[a]);
    } catch (const Error& e) {
      throw ConfigError(std::string("home configuration: ") + e.what());
    }
  }
  for (const auto& p : c.pois)
    if (p.kind == PoiConfig::Kind::EndEffector &&
        (p.arm < 0 || static_cast<std::size_t>(p.arm) >= c.arms.size()))
      throw ConfigError("POI " + p.name + " references a missing arm");
}

std::string SceneConfig::id() const { return hex64(fnv1a64(to_json(*this))); }

std::string to_json(const SceneConfig& c) {
  json j;
  j["format_version"] = kConfigFormatVersion;
  json arms = json::array();
  for (std::size_t a = 0; a < c.arms.size(); ++a) {
    const auto& arm = c.arms[a];
    json links = json::array();
    for (const auto& l : arm.chain.links)
      links.push_back({{"axis", {l.axis.x(), l.axis.y(), l.axis.z()}}, {"offset", transform_json(l.offset)}});
    arms.push_back({{"name", arm.name},
                    {"base", transform_json(arm.base)},
                    {"links", links},
                    {"lower", vec_json(arm.chain.lower)},
                    {"upper", vec_json(arm.chain.upper)},
                    {"home", vec_json(c.home[a])}});
  }
  j["arms"] = arms;
  json sensors = json::array();
  for (const auto& s : c.layout.sensors)
    sensors.push_back({{"id", s.id}, {"arm", s.arm}, {"link", s.link}, {"mount", transform_json(s.mount)}});
  j["sensors"] = sensors;
  const auto& in = c.camera.intrinsics;
  j["camera"] = {{"fx", in.fx}, {"fy", in.fy}, {"cx", in.cx}, {"cy", in.cy},
                 {"world_from_camera", transform_json(c.camera.world_from_camera)}};
  json limbs = json::object();
  for (std::size_t i = 0; i < perception::kLimbCount; ++i) {
    const auto l = static_cast<perception::Limb>(i);
    limbs[std::string(perception::limb_name(l))] = {c.limb_bounds[l].min, c.limb_bounds[l].max};
  }
  j["limb_bounds"] = {{"ranges", limbs}, {"max_missing_fraction", c.limb_bounds.max_missing_fraction}};
  json pois = json::array();
  for (const auto& p : c.pois) {
    json pj = {{"name", p.name}};
    if (p.kind == PoiConfig::Kind::Static) {
      pj["kind"] = "static";
      pj["pixel"] = {p.pixel.x(), p.pixel.y()};
    } else {
      pj["kind"] = "end_effector";
      pj["arm"] = p.arm;
    }
    pois.push_back(pj);
  }
  j["pois"] = pois;
  j["control"] = {{"compliant", gains_json(c.gains.compliant)},
                  {"stiff", gains_json(c.gains.stiff)},
                  {"inertia", vec_json(c.inertia)},
                  {"dt", c.control_dt},
                  {"human_push",
                   {{"stiffness", c.push.stiffness}, {"damping", c.push.damping}, {"torque_limit", c.push.torque_limit}}}};
  j["pipeline"] = {{"window_span", c.pipeline.window_span}, {"threshold", c.pipeline.threshold}};
  return j.dump(2);
}

SceneConfig scene_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    if (!j.contains("format_version") || j["format_version"].get<int>() != kConfigFormatVersion)
      throw ConfigError("unsupported config format_version");
    SceneConfig c;
    for (const auto& aj : j.at("arms")) {
      kinematics::Arm arm;
      arm.name = aj.at("name").get<std::string>();
      arm.base = transform_from(aj.at("base"));
      for (const auto& lj : aj.at("links"))
        arm.chain.links.push_back({vec3_from(lj.at("axis")), transform_from(lj.at("offset"))});
      arm.chain.lower = vec_from(aj.at("lower"));
      arm.chain.upper = vec_from(aj.at("upper"));
      c.home.push_back(vec_from(aj.at("home")));
      c.arms.push_back(std::move(arm));
    }
    for (const auto& sj : j.at("sensors"))
      c.layout.sensors.push_back({sj.at("id").get<int>(), sj.at("arm").get<int>(),
                                  sj.at("link").get<int>(), transform_from(sj.at("mount"))});
    const auto& cj = j.at("camera");
    c.camera.intrinsics = {cj.at("fx").get<double>(), cj.at("fy").get<double>(),
                           cj.at("cx").get<double>(), cj.at("cy").get<double>()};
    c.camera.world_from_camera = transform_from(cj.at("world_from_camera"));
    const auto& lb = j.at("limb_bounds");
    for (std::size_t i = 0; i < perception::kLimbCount; ++i) {
      const auto l = static_cast<perception::Limb>(i);
      const auto& r = lb.at("ranges").at(std::string(perception::limb_name(l)));
      c.limb_bounds[l] = {r.at(0).get<double>(), r.at(1).get<double>()};
    }
    c.limb_bounds.max_missing_fraction = lb.at("max_missing_fraction").get<double>();
    for (const auto& pj : j.at("pois")) {
      PoiConfig p;
      p.name = pj.at("name").get<std::string>();
      const auto kind = pj.at("kind").get<std::string>();
      if (kind == "static") {
        p.kind = PoiConfig::Kind::Static;
        p.pixel = vec2_from(pj.at("pixel"));
      } else if (kind == "end_effector") {
        p.kind = PoiConfig::Kind::EndEffector;
        p.arm = pj.at("arm").get<int>();
      } else {
        throw ConfigError("unknown POI kind '" + kind + "'");
      }
      c.pois.push_back(p);
    }
    const auto& ctl = j.at("control");
    c.gains.compliant = gains_from(ctl.at("compliant"));
    c.gains.stiff = gains_from(ctl.at("stiff"));
    c.inertia = vec_from(ctl.at("inertia"));
    c.control_dt = ctl.at("dt").get<double>();
    c.push.stiffness = ctl.at("human_push").at("stiffness").get<double>();
    c.push.damping = ctl.at("human_push").at("damping").get<double>();
    c.push.torque_limit = ctl.at("human_push").at("torque_limit").get<double>();
    c.pipeline.window_span = j.at("pipeline").at("window_span").get<double>();
    c.pipeline.threshold = j.at("pipeline").at("threshold").get<double>();
    validate(c);
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

SceneConfig load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return scene_from_json(ss.str());
}

void save_scene(const std::filesystem::path& path, const SceneConfig& c) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config " + path.string());
  out << to_json(c) << '\n';
}

}  // namespace intent
