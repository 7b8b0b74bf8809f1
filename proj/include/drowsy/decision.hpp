#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace drowsy {

// Consecutive-closed-frame alarm: at the default 6 fps, 2 seconds of closed
// eyes is 12 successive frames.
struct DecisionConfig {
  double fps = 6.0;
  double alarm_seconds = 2.0;
  double prob_threshold = 0.5;

  int alarm_frames() const;
  void validate() const;
};

enum class FrameClass { Closed, Open, NoMeasurement };
enum class AlarmEvent { None, Raised, Cleared };

const char* to_string(FrameClass c);
const char* to_string(AlarmEvent e);

struct DrowsinessState {
  int consecutive_closed = 0;
  int consecutive_no_measurement = 0;
  bool alarm_active = false;
  std::int64_t frames_seen = 0;

  friend bool operator==(const DrowsinessState&, const DrowsinessState&) = default;
};

struct FrameVerdict {
  FrameClass classification = FrameClass::Open;
  double p_closed = 0.0;  // NaN for NO_MEASUREMENT frames
  AlarmEvent event = AlarmEvent::None;
  int closed_run = 0;
  int no_measurement_run = 0;
};

// One measured frame. p_closed strictly above the threshold counts as closed
// and increments the run; anything else resets it. The alarm raises when the
// run reaches alarm_frames, stays latched while the eye stays closed (or
// unmeasurable), and clears on the next open frame.
FrameVerdict step(DrowsinessState& state, double p_closed, const DecisionConfig& cfg);

// A frame without a usable eye measurement. Holds the closed run (neither
// increment nor reset); as a fail-safe, alarm_frames consecutive unmeasurable
// frames also raise the alarm.
FrameVerdict step_no_measurement(DrowsinessState& state, const DecisionConfig& cfg);

// Folds step over the sequence starting from `state`. nullopt entries are
// no-measurement frames.
std::vector<FrameVerdict> run_stream(DrowsinessState& state,
                                     std::span<const std::optional<double>> p_closed,
                                     const DecisionConfig& cfg);

std::vector<FrameVerdict> run_stream(std::span<const std::optional<double>> p_closed,
                                     const DecisionConfig& cfg);
std::vector<FrameVerdict> run_stream(std::span<const double> p_closed,
                                     const DecisionConfig& cfg);

}  // namespace drowsy
