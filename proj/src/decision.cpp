#include "drowsy/decision.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace drowsy {

int DecisionConfig::alarm_frames() const {
  // Ceiling keeps non-integer fps*seconds on the sensitive side; the small
  // epsilon stops exact products from rounding up one frame.
  return static_cast<int>(std::ceil(alarm_seconds * fps - 1e-9));
}

void DecisionConfig::validate() const {
  if (!(fps > 0.0)) throw std::invalid_argument("DecisionConfig: fps must be > 0");
  if (!(alarm_seconds > 0.0))
    throw std::invalid_argument("DecisionConfig: alarm_seconds must be > 0");
  if (!(prob_threshold > 0.0 && prob_threshold < 1.0))
    throw std::invalid_argument("DecisionConfig: prob_threshold must be in (0, 1)");
  if (alarm_frames() < 1)
    throw std::invalid_argument("DecisionConfig: alarm_frames must be >= 1");
}

const char* to_string(FrameClass c) {
  switch (c) {
    case FrameClass::Closed: return "closed";
    case FrameClass::Open: return "open";
    default: return "no_measurement";
  }
}

const char* to_string(AlarmEvent e) {
  switch (e) {
    case AlarmEvent::Raised: return "alarm_raised";
    case AlarmEvent::Cleared: return "alarm_cleared";
    default: return "none";
  }
}

namespace {

FrameVerdict finish_step(DrowsinessState& state, FrameClass cls, double p_closed,
                         const DecisionConfig& cfg) {
  ++state.frames_seen;
  const int alarm_frames = cfg.alarm_frames();
  const bool condition = state.consecutive_closed >= alarm_frames ||
                         state.consecutive_no_measurement >= alarm_frames;

  AlarmEvent event = AlarmEvent::None;
  if (!state.alarm_active && condition) {
    state.alarm_active = true;
    event = AlarmEvent::Raised;
  } else if (state.alarm_active && cls == FrameClass::Open) {
    state.alarm_active = false;
    event = AlarmEvent::Cleared;
  }

  return {cls, p_closed, event, state.consecutive_closed,
          state.consecutive_no_measurement};
}

}  // namespace

FrameVerdict step(DrowsinessState& state, double p_closed, const DecisionConfig& cfg) {
  cfg.validate();
  if (!(p_closed >= 0.0 && p_closed <= 1.0))
    throw std::invalid_argument("step: p_closed must be in [0, 1]");

  const bool closed = p_closed > cfg.prob_threshold;
  if (closed)
    ++state.consecutive_closed;
  else
    state.consecutive_closed = 0;
  state.consecutive_no_measurement = 0;

  return finish_step(state, closed ? FrameClass::Closed : FrameClass::Open, p_closed, cfg);
}

FrameVerdict step_no_measurement(DrowsinessState& state, const DecisionConfig& cfg) {
  cfg.validate();
  ++state.consecutive_no_measurement;
  return finish_step(state, FrameClass::NoMeasurement,
                     std::numeric_limits<double>::quiet_NaN(), cfg);
}

std::vector<FrameVerdict> run_stream(DrowsinessState& state,
                                     std::span<const std::optional<double>> p_closed,
                                     const DecisionConfig& cfg) {
  std::vector<FrameVerdict> verdicts;
  verdicts.reserve(p_closed.size());
  for (const std::optional<double>& p : p_closed)
    verdicts.push_back(p ? step(state, *p, cfg) : step_no_measurement(state, cfg));
  return verdicts;
}

std::vector<FrameVerdict> run_stream(std::span<const std::optional<double>> p_closed,
                                     const DecisionConfig& cfg) {
  DrowsinessState state;
  return run_stream(state, p_closed, cfg);
}

std::vector<FrameVerdict> run_stream(std::span<const double> p_closed,
                                     const DecisionConfig& cfg) {
  DrowsinessState state;
  std::vector<FrameVerdict> verdicts;
  verdicts.reserve(p_closed.size());
  for (double p : p_closed) verdicts.push_back(step(state, p, cfg));
  return verdicts;
}

}  // namespace drowsy
