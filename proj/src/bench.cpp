#include "drowsy/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace drowsy {

namespace {

using Clock = std::chrono::steady_clock;

double ms_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

StageStats stats_of(std::vector<double> values) {
  StageStats s;
  if (values.empty()) return s;
  s.mean_ms = std::accumulate(values.begin(), values.end(), 0.0) /
              static_cast<double>(values.size());
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  s.median_ms = n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  const std::size_t p95_idx =
      std::min(n - 1, static_cast<std::size_t>(std::ceil(0.95 * n)) - 1);
  s.p95_ms = values[p95_idx];
  return s;
}

template <typename Get>
StageStats stage_stats(const std::vector<FrameTiming>& samples, Get get) {
  std::vector<double> values;
  values.reserve(samples.size());
  for (const FrameTiming& t : samples) values.push_back(get(t));
  return stats_of(std::move(values));
}

}  // namespace

StageStats LatencyReport::preprocess() const {
  return stage_stats(samples, [](const FrameTiming& t) { return t.preprocess_ms; });
}
StageStats LatencyReport::inference() const {
  return stage_stats(samples, [](const FrameTiming& t) { return t.inference_ms; });
}
StageStats LatencyReport::decision() const {
  return stage_stats(samples, [](const FrameTiming& t) { return t.decision_ms; });
}
StageStats LatencyReport::total() const {
  return stage_stats(samples, [](const FrameTiming& t) { return t.total_ms(); });
}

LatencyReport bench_latency(const FdnnModel& model, std::span<const GrayImage> frames,
                            const DecisionConfig& cfg, int warmup) {
  if (frames.size() < 100)
    throw std::invalid_argument("bench_latency: need at least 100 frames");
  if (warmup < 0) throw std::invalid_argument("bench_latency: warmup must be >= 0");
  cfg.validate();

  LatencyReport report;
  report.warmup_frames = warmup;
  report.samples.reserve(frames.size());

  DrowsinessState state;
  for (int w = 0; w < warmup; ++w) {
    const GrayImage& frame = frames[static_cast<std::size_t>(w) % frames.size()];
    const auto input = preprocess_to_input(frame);
    const Prediction pred = model.predict(input);
    step(state, pred.p_closed, cfg);
  }

  state = DrowsinessState{};
  for (const GrayImage& frame : frames) {
    const auto t0 = Clock::now();
    const auto input = preprocess_to_input(frame);
    const auto t1 = Clock::now();
    const Prediction pred = model.predict(input);
    const auto t2 = Clock::now();
    step(state, pred.p_closed, cfg);
    const auto t3 = Clock::now();
    report.samples.push_back({ms_between(t0, t1), ms_between(t1, t2), ms_between(t2, t3)});
  }
  return report;
}

std::string latency_csv(const LatencyReport& report) {
  std::ostringstream os;
  os << "frame,preprocess_ms,inference_ms,decision_ms,total_ms\n";
  for (std::size_t i = 0; i < report.samples.size(); ++i) {
    const FrameTiming& t = report.samples[i];
    os << i << "," << t.preprocess_ms << "," << t.inference_ms << "," << t.decision_ms
       << "," << t.total_ms() << "\n";
  }
  return os.str();
}

}  // namespace drowsy
