#include "intent/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "intent/common.hpp"

namespace intent::sim {

using nlohmann::json;

namespace {

json interval_json(const Interval& i) { return {i.start, i.end}; }

Interval interval_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ConfigError("interval must be [start, end]");
  return {j[0].get<double>(), j[1].get<double>()};
}

void check_interval(const Interval& i, double duration, const char* what) {
  if (!(std::isfinite(i.start) && std::isfinite(i.end)) || i.start < 0.0 || i.end <= i.start ||
      i.end > duration)
    throw ConfigError(std::string(what) + " interval must lie within the scenario duration");
}

}  // namespace

std::string_view kind_name(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::Manipulation: return "manipulation";
    case ScenarioKind::Distracted: return "distracted";
    case ScenarioKind::Collision: return "collision";
    case ScenarioKind::Idle: return "idle";
    case ScenarioKind::Mixed: return "mixed";
  }
  return "?";
}

ScenarioKind kind_from_name(std::string_view name) {
  for (auto k : {ScenarioKind::Manipulation, ScenarioKind::Distracted, ScenarioKind::Collision,
                 ScenarioKind::Idle, ScenarioKind::Mixed})
    if (kind_name(k) == name) return k;
  throw ConfigError("unknown scenario kind '" + std::string(name) + "'");
}

void validate(const ScenarioSpec& s) {
  if (!(s.duration > 0.0) || !std::isfinite(s.duration)) throw ConfigError("duration must be positive");
  if (!(s.frame_rate > 0.0) || !std::isfinite(s.frame_rate)) throw ConfigError("frame rate must be positive");
  if (!(s.noise.pixel >= 0.0 && s.noise.gaze >= 0.0 && s.noise.depth >= 0.0))
    throw ConfigError("noise levels must be non-negative");
  const auto& a = s.actor;
  for (double v : {a.upper_arm, a.forearm, a.shoulder_width, a.shoulder_height, a.hip_width, a.hip_height,
                   a.head_height})
    if (!(v > 0.0)) throw ConfigError("actor dimensions must be positive");
  if (!(a.hip_height < a.shoulder_height && a.shoulder_height < a.head_height))
    throw ConfigError("actor must have hips below shoulders below head");
  const auto& sc = s.schedule;
  if (sc.contact) check_interval(*sc.contact, s.duration, "contact");
  if (sc.distraction) check_interval(*sc.distraction, s.duration, "distraction");
  if (sc.hover) check_interval(*sc.hover, s.duration, "hover");
  if (sc.occlusions)
    for (const auto& o : *sc.occlusions) check_interval(o, s.duration, "occlusion");
  if (sc.sensor && *sc.sensor < 0) throw ConfigError("sensor id must be non-negative");
  if (sc.push_scale && !(*sc.push_scale >= 0.0)) throw ConfigError("push scale must be non-negative");
}

std::string to_json(const ScenarioSpec& s) {
  json j;
  j["kind"] = kind_name(s.kind);
  j["duration"] = s.duration;
  j["seed"] = s.seed;
  j["frame_rate"] = s.frame_rate;
  j["noise"] = {{"pixel", s.noise.pixel}, {"gaze", s.noise.gaze}, {"depth", s.noise.depth}};
  const auto& a = s.actor;
  j["actor"] = {{"upper_arm", a.upper_arm},         {"forearm", a.forearm},
                {"shoulder_width", a.shoulder_width}, {"shoulder_height", a.shoulder_height},
                {"hip_width", a.hip_width},         {"hip_height", a.hip_height},
                {"head_height", a.head_height},     {"stand_x", a.stand_x},
                {"stand_y", a.stand_y}};
  json sc = json::object();
  const auto& d = s.schedule;
  if (d.contact) sc["contact"] = interval_json(*d.contact);
  if (d.distraction) sc["distraction"] = interval_json(*d.distraction);
  if (d.hover) sc["hover"] = interval_json(*d.hover);
  if (d.occlusions) {
    sc["occlusions"] = json::array();
    for (const auto& o : *d.occlusions) sc["occlusions"].push_back(interval_json(o));
  }
  if (d.sensor) sc["sensor"] = *d.sensor;
  if (d.hand) sc["hand"] = *d.hand == Hand::Left ? "left" : "right";
  if (d.body_part) sc["body_part"] = *d.body_part == BodyPart::Hip ? "hip" : "elbow";
  if (d.push_scale) sc["push_scale"] = *d.push_scale;
  j["schedule"] = sc;
  if (s.mini_skeleton) j["mini_skeleton"] = true;
  return j.dump();
}

ScenarioSpec spec_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("scenario spec is not valid JSON: ") + e.what());
  }
  try {
    ScenarioSpec s;
    s.kind = kind_from_name(j.at("kind").get<std::string>());
    s.duration = j.value("duration", s.duration);
    s.seed = j.value("seed", s.seed);
    s.frame_rate = j.value("frame_rate", s.frame_rate);
    if (j.contains("noise")) {
      const auto& n = j["noise"];
      s.noise.pixel = n.value("pixel", s.noise.pixel);
      s.noise.gaze = n.value("gaze", s.noise.gaze);
      s.noise.depth = n.value("depth", s.noise.depth);
    }
    if (j.contains("actor")) {
      const auto& a = j["actor"];
      auto& o = s.actor;
      o.upper_arm = a.value("upper_arm", o.upper_arm);
      o.forearm = a.value("forearm", o.forearm);
      o.shoulder_width = a.value("shoulder_width", o.shoulder_width);
      o.shoulder_height = a.value("shoulder_height", o.shoulder_height);
      o.hip_width = a.value("hip_width", o.hip_width);
      o.hip_height = a.value("hip_height", o.hip_height);
      o.head_height = a.value("head_height", o.head_height);
      o.stand_x = a.value("stand_x", o.stand_x);
      o.stand_y = a.value("stand_y", o.stand_y);
    }
    if (j.contains("schedule")) {
      const auto& sc = j["schedule"];
      auto& d = s.schedule;
      if (sc.contains("contact")) d.contact = interval_from(sc["contact"]);
      if (sc.contains("distraction")) d.distraction = interval_from(sc["distraction"]);
      if (sc.contains("hover")) d.hover = interval_from(sc["hover"]);
      if (sc.contains("occlusions")) {
        d.occlusions.emplace();
        for (const auto& o : sc["occlusions"]) d.occlusions->push_back(interval_from(o));
      }
      if (sc.contains("sensor")) d.sensor = sc["sensor"].get<int>();
      if (sc.contains("hand")) {
        const auto h = sc["hand"].get<std::string>();
        if (h != "left" && h != "right") throw ConfigError("hand must be left or right");
        d.hand = h == "left" ? Hand::Left : Hand::Right;
      }
      if (sc.contains("body_part")) {
        const auto b = sc["body_part"].get<std::string>();
        if (b != "hip" && b != "elbow") throw ConfigError("body_part must be hip or elbow");
        d.body_part = b == "hip" ? BodyPart::Hip : BodyPart::Elbow;
      }
      if (sc.contains("push_scale")) d.push_scale = sc["push_scale"].get<double>();
    }
    s.mini_skeleton = j.value("mini_skeleton", false);
    validate(s);
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed scenario spec: ") + e.what());
  }
}

ScenarioSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario spec " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return spec_from_json(ss.str());
}

}  // namespace intent::sim
