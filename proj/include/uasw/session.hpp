// Walking-session lifecycle: mode activation, radar on/off with the idle
// cut-off, alert generation and the active/idle power ledger.
//
// step() is a pure transition function. Every input carries a timestamp;
// time between inputs is booked to the active or idle ledger according to the
// radar state over that interval.
#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "uasw/datastore.hpp"
#include "uasw/detector.hpp"
#include "uasw/labels.hpp"

namespace uasw {

enum class Mode { idle, distracted_walking, assisted_walking };

enum class EventKind {
  walking_started,
  walking_stopped,
  screen_on,
  screen_off,
  assist_requested,
  assist_cancelled
};

inline constexpr std::array<std::string_view, 6> kEventNames{
    "walking_started", "walking_stopped",  "screen_on",
    "screen_off",      "assist_requested", "assist_cancelled"};
inline constexpr std::array<std::string_view, 3> kModeNames{"idle", "distracted_walking",
                                                            "assisted_walking"};

inline std::string_view to_string(EventKind k) { return kEventNames[static_cast<int>(k)]; }
inline std::string_view to_string(Mode m) { return kModeNames[static_cast<int>(m)]; }

inline EventKind parse_event_kind(std::string_view s) {
  for (std::size_t i = 0; i < kEventNames.size(); ++i)
    if (kEventNames[i] == s) return static_cast<EventKind>(i);
  throw FormatError("unknown event kind '" + std::string(s) + "'");
}

struct UserEvent {
  std::int64_t timestamp_ms = 0;
  EventKind kind = EventKind::walking_started;

  friend bool operator==(const UserEvent&, const UserEvent&) = default;
};

/// A detector verdict together with the classifier's label for it.
struct DetectionInput {
  std::int64_t timestamp_ms = 0;
  DetectionVerdict verdict;
  ObstacleLabel label;
};

struct Tick {
  std::int64_t timestamp_ms = 0;
};

using SessionInput = std::variant<UserEvent, DetectionInput, Tick>;

inline std::int64_t timestamp_of(const SessionInput& in) {
  return std::visit([](const auto& x) { return x.timestamp_ms; }, in);
}

enum class Severity { info, caution, danger };
inline constexpr std::array<std::string_view, 3> kSeverityNames{"info", "caution", "danger"};
inline std::string_view to_string(Severity s) { return kSeverityNames[static_cast<int>(s)]; }

struct Alert {
  std::int64_t timestamp_ms = 0;
  Severity severity = Severity::info;
  DetectionVerdict verdict;
  ObstacleLabel label;
  double range_cm = 0.0;

  friend bool operator==(const Alert&, const Alert&) = default;
};

struct SessionPolicy {
  std::int64_t max_active_ms = 10'000;
  std::int64_t detection_window_ms = 2'000;
  /// Static obstacles at or inside this range are dangerous (B4, the first far bin).
  double danger_range_cm = 60.0;
};

inline Severity severity_of(const DetectionVerdict& v, const ObstacleLabel& label,
                            const SessionPolicy& policy = {}) {
  if (!v.detected) return Severity::info;
  const bool close = v.range_estimate_cm && *v.range_estimate_cm <= policy.danger_range_cm;
  return label.movement == Movement::mobile || close ? Severity::danger : Severity::caution;
}

struct SessionState {
  Mode mode = Mode::idle;
  bool radar_active = false;
  std::optional<std::int64_t> radar_started_at;
  std::optional<std::int64_t> last_detection_at;
  std::int64_t accumulated_active_ms = 0;
  std::int64_t accumulated_idle_ms = 0;
  std::int64_t start_ms = 0;
  std::int64_t clock_ms = 0;
  bool walking = false;
  bool screen_on = false;

  SessionState() = default;
  explicit SessionState(std::int64_t start) : start_ms(start), clock_ms(start) {}

  [[nodiscard]] std::int64_t elapsed_ms() const { return clock_ms - start_ms; }

  friend bool operator==(const SessionState&, const SessionState&) = default;
};

enum class ActionKind { start_radar, stop_radar, alert };

struct Action {
  ActionKind kind = ActionKind::start_radar;
  std::int64_t timestamp_ms = 0;
  std::optional<Alert> alert;

  friend bool operator==(const Action&, const Action&) = default;
};

struct StepResult {
  SessionState state;
  std::vector<Action> actions;
};

/// The cut-off rule in one place: the radar has run for the full session
/// length and nothing was detected in the trailing window.
inline bool cutoff_due(const SessionState& s, std::int64_t now_ms, const SessionPolicy& policy) {
  if (!s.radar_active) return false;
  if (now_ms - *s.radar_started_at < policy.max_active_ms) return false;
  return !s.last_detection_at || now_ms - *s.last_detection_at > policy.detection_window_ms;
}

namespace detail {

inline void start_radar(SessionState& s, std::vector<Action>& out) {
  if (s.radar_active) return;
  s.radar_active = true;
  s.radar_started_at = s.clock_ms;
  s.last_detection_at.reset();
  out.push_back({ActionKind::start_radar, s.clock_ms, std::nullopt});
}

inline void stop_radar(SessionState& s, std::vector<Action>& out) {
  if (!s.radar_active) return;
  s.radar_active = false;
  out.push_back({ActionKind::stop_radar, s.clock_ms, std::nullopt});
}

inline void handle(SessionState& s, const UserEvent& e, std::vector<Action>& out) {
  switch (e.kind) {
    case EventKind::walking_started:
    case EventKind::screen_on:
      (e.kind == EventKind::walking_started ? s.walking : s.screen_on) = true;
      if (s.mode == Mode::idle && s.walking && s.screen_on) s.mode = Mode::distracted_walking;
      // Any event that (re)satisfies the active mode restarts a cut-off radar.
      if (s.mode == Mode::distracted_walking && s.walking && s.screen_on) start_radar(s, out);
      break;
    case EventKind::walking_stopped:
    case EventKind::screen_off:
      (e.kind == EventKind::walking_stopped ? s.walking : s.screen_on) = false;
      if (s.mode == Mode::distracted_walking) {
        s.mode = Mode::idle;
        stop_radar(s, out);
      }
      break;
    case EventKind::assist_requested:
      s.mode = Mode::assisted_walking;
      start_radar(s, out);
      break;
    case EventKind::assist_cancelled:
      if (s.mode != Mode::assisted_walking) break;
      if (s.walking && s.screen_on) {
        s.mode = Mode::distracted_walking;
      } else {
        s.mode = Mode::idle;
        stop_radar(s, out);
      }
      break;
  }
}

inline void handle(SessionState& s, const DetectionInput& d, std::vector<Action>& out,
                   const SessionPolicy& policy) {
  if (s.mode == Mode::idle || !s.radar_active || !d.verdict.detected) return;
  s.last_detection_at = s.clock_ms;
  const auto severity = severity_of(d.verdict, d.label, policy);
  if (severity == Severity::info) return;
  out.push_back({ActionKind::alert, s.clock_ms,
                 Alert{s.clock_ms, severity, d.verdict, d.label,
                       d.verdict.range_estimate_cm.value_or(0.0)}});
}

}  // namespace detail

inline StepResult step(SessionState state, const SessionInput& input,
                       const SessionPolicy& policy = {}) {
  const auto t = timestamp_of(input);
  if (t < state.clock_ms)
    throw InvalidArgument("session: input at " + std::to_string(t) + " ms precedes clock " +
                          std::to_string(state.clock_ms) + " ms");
  (state.radar_active ? state.accumulated_active_ms : state.accumulated_idle_ms) +=
      t - state.clock_ms;
  state.clock_ms = t;

  StepResult r{std::move(state), {}};
  if (cutoff_due(r.state, t, policy)) detail::stop_radar(r.state, r.actions);
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, UserEvent>)
          detail::handle(r.state, x, r.actions);
        else if constexpr (std::is_same_v<T, DetectionInput>)
          detail::handle(r.state, x, r.actions, policy);
      },
      input);
  return r;
}

/// Time-weighted mean current over the session.
inline double power_estimate(const SessionState& s, double active_mA, double idle_mA = 0.0) {
  const auto total = s.accumulated_active_ms + s.accumulated_idle_ms;
  if (total <= 0) throw InvalidArgument("power_estimate: zero-duration session");
  if (total != s.elapsed_ms()) throw InvalidArgument("power_estimate: inconsistent ledger");
  return (static_cast<double>(s.accumulated_active_ms) * active_mA +
          static_cast<double>(s.accumulated_idle_ms) * idle_mA) /
         static_cast<double>(total);
}

struct Trajectory {
  std::vector<SessionState> states;  // state after each input
  std::vector<Action> actions;
};

inline Trajectory replay(std::span<const SessionInput> inputs, SessionState initial = {},
                         const SessionPolicy& policy = {}) {
  Trajectory out;
  out.states.reserve(inputs.size());
  for (const auto& in : inputs) {
    auto r = step(std::move(initial), in, policy);
    out.actions.insert(out.actions.end(), r.actions.begin(), r.actions.end());
    out.states.push_back(r.state);
    initial = std::move(r.state);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Event log: `timestamp_ms,kind` per line; blank lines and '#' comments skipped.

inline std::string encode_event(const UserEvent& e) {
  return std::to_string(e.timestamp_ms) + ',' + std::string(to_string(e.kind));
}

inline UserEvent decode_event(std::string_view line) {
  const auto f = detail::split(line, ',');
  if (f.size() != 2) throw FormatError("event: expected 'timestamp_ms,kind', got '" +
                                       std::string(line) + "'");
  return {detail::parse_number<std::int64_t>(f[0], "event timestamp"), parse_event_kind(f[1])};
}

inline std::vector<UserEvent> read_events(std::istream& in) {
  std::vector<UserEvent> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    out.push_back(decode_event(line));
    if (out.size() > 1 && out.back().timestamp_ms < out[out.size() - 2].timestamp_ms)
      throw FormatError("event log: timestamps must be non-decreasing");
  }
  return out;
}

inline void write_events(std::ostream& out, std::span<const UserEvent> events) {
  for (const auto& e : events) out << encode_event(e) << '\n';
}

}  // namespace uasw
