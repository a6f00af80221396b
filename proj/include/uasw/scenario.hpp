// Plain-text scenario files for the simulator.
//
//   # comment
//   duration_ms = 4000
//   noise_std = 5            scene defaults, inherited by every segment
//   segment 0                a new scene starting at 0 ms
//   reflector range_m=1.05 amplitude=400 velocity_mps=0
//   segment 2000
//   noise_std = 8            overrides for this segment only
//   obstacle material=human surface=dry movement=mobile front_m=1.5 amplitude=600
//
// Scene keys: noise_std, leakage_tap, leakage_amplitude, rx_gain. Reflector
// keys: range_m, amplitude, velocity_mps, ratio, mod_depth, mod_freq_hz,
// mod_phase. Obstacle keys: material, surface, movement, front_m, amplitude,
// mod_phase, closing_mps (the walker's own approach speed, added on top of the
// obstacle's motion). Lines before the first `segment` that add reflectors open an
// implicit segment at 0 ms.
#pragma once

#include <istream>
#include <sstream>
#include <string>
#include <string_view>

#include "uasw/datastore.hpp"
#include "uasw/radar_sim.hpp"

namespace uasw {

struct ScenarioFile {
  Scenario scenario;
  double duration_ms = 0.0;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline void apply_scene_key(Scene& scene, std::string_view key, std::string_view value) {
  if (key == "noise_std")
    scene.noise_std = parse_number<double>(value, "noise_std");
  else if (key == "leakage_tap")
    scene.leakage_tap = parse_number<int>(value, "leakage_tap");
  else if (key == "leakage_amplitude")
    scene.leakage_amplitude = parse_number<double>(value, "leakage_amplitude");
  else if (key == "rx_gain")
    scene.rx_gain_index = parse_number<int>(value, "rx_gain");
  else
    throw FormatError("scenario: unknown key '" + std::string(key) + "'");
}

/// Splits `k=v k=v ...` into pairs.
inline std::vector<std::pair<std::string_view, std::string_view>> key_values(std::string_view s) {
  std::vector<std::pair<std::string_view, std::string_view>> out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    const auto b = s.find_first_not_of(" \t", pos);
    if (b == std::string_view::npos) break;
    auto e = s.find_first_of(" \t", b);
    if (e == std::string_view::npos) e = s.size();
    const auto tok = s.substr(b, e - b);
    const auto eq = tok.find('=');
    if (eq == std::string_view::npos || eq == 0)
      throw FormatError("scenario: expected key=value, got '" + std::string(tok) + "'");
    out.emplace_back(tok.substr(0, eq), tok.substr(eq + 1));
    pos = e;
  }
  return out;
}

inline Reflector parse_reflector(std::string_view args) {
  Reflector r;
  bool have_range = false;
  for (const auto& [k, v] : key_values(args)) {
    const double x = parse_number<double>(v, "reflector value");
    if (k == "range_m") r.range_m = x, have_range = true;
    else if (k == "amplitude") r.amplitude = x;
    else if (k == "velocity_mps") r.radial_velocity_mps = x;
    else if (k == "ratio") r.signature.amplitude_ratio = x;
    else if (k == "mod_depth") r.signature.mod_depth = x;
    else if (k == "mod_freq_hz") r.signature.mod_freq_hz = x;
    else if (k == "mod_phase") r.signature.mod_phase = x;
    else throw FormatError("scenario: unknown reflector key '" + std::string(k) + "'");
  }
  if (!have_range) throw FormatError("scenario: reflector needs range_m");
  return r;
}

inline std::vector<Reflector> parse_obstacle(std::string_view args, const RadarConfig& config) {
  ObstacleLabel label;
  double front = -1.0, amplitude = 600.0, phase = 0.0, closing = 0.0;
  for (const auto& [k, v] : key_values(args)) {
    if (k == "material") label.material = parse_material(v);
    else if (k == "surface") label.surface = parse_surface(v);
    else if (k == "movement") label.movement = parse_movement(v);
    else if (k == "front_m") front = parse_number<double>(v, "front_m");
    else if (k == "amplitude") amplitude = parse_number<double>(v, "amplitude");
    else if (k == "mod_phase") phase = parse_number<double>(v, "mod_phase");
    else if (k == "closing_mps") closing = parse_number<double>(v, "closing_mps");
    else throw FormatError("scenario: unknown obstacle key '" + std::string(k) + "'");
  }
  if (front < 0) throw FormatError("scenario: obstacle needs front_m");
  auto out = obstacle_reflectors(label, front, amplitude, config, phase);
  for (auto& r : out) r.radial_velocity_mps -= closing;
  return out;
}

}  // namespace detail

inline ScenarioFile parse_scenario(std::istream& in, const RadarConfig& config = {}) {
  ScenarioFile out;
  Scene defaults;
  bool have_duration = false;
  std::string raw;
  int lineno = 0;
  auto current = [&]() -> TimedScene& {
    if (out.scenario.segments.empty()) out.scenario.segments.push_back({0.0, defaults});
    return out.scenario.segments.back();
  };
  while (std::getline(in, raw)) {
    ++lineno;
    auto line = detail::trim(raw);
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = detail::trim(line.substr(0, hash));
    if (line.empty()) continue;
    try {
      const auto word_end = line.find_first_of(" \t=");
      const auto word = line.substr(0, word_end);
      const auto rest = word_end == std::string_view::npos ? std::string_view{}
                                                           : detail::trim(line.substr(word_end));
      if (word == "segment") {
        const double start = detail::parse_number<double>(rest, "segment start");
        out.scenario.segments.push_back({start, defaults});
      } else if (word == "reflector") {
        current().scene.reflectors.push_back(detail::parse_reflector(rest));
      } else if (word == "obstacle") {
        auto rs = detail::parse_obstacle(rest, config);
        auto& refl = current().scene.reflectors;
        refl.insert(refl.end(), rs.begin(), rs.end());
      } else if (!rest.empty() && rest.front() == '=') {
        const auto value = detail::trim(rest.substr(1));
        if (word == "duration_ms") {
          out.duration_ms = detail::parse_number<double>(value, "duration_ms");
          have_duration = true;
        } else if (out.scenario.segments.empty()) {
          detail::apply_scene_key(defaults, word, value);
        } else {
          detail::apply_scene_key(out.scenario.segments.back().scene, word, value);
        }
      } else {
        throw FormatError("unrecognized line '" + std::string(line) + "'");
      }
    } catch (const FormatError& e) {
      throw FormatError("scenario line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (!have_duration) throw FormatError("scenario: missing duration_ms");
  if (out.scenario.segments.empty()) out.scenario.segments.push_back({0.0, defaults});
  validate_scenario(out.scenario, config);
  return out;
}

inline ScenarioFile parse_scenario(std::string_view text, const RadarConfig& config = {}) {
  std::istringstream in{std::string(text)};
  return parse_scenario(in, config);
}

}  // namespace uasw
