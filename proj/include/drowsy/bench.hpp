#pragma once

#include <span>
#include <string>
#include <vector>

#include "drowsy/dataset.hpp"
#include "drowsy/decision.hpp"
#include "drowsy/fdnn.hpp"
#include "drowsy/image.hpp"

namespace drowsy {

struct FrameTiming {
  double preprocess_ms = 0.0;
  double inference_ms = 0.0;
  double decision_ms = 0.0;

  double total_ms() const { return preprocess_ms + inference_ms + decision_ms; }
};

struct StageStats {
  double mean_ms = 0.0;
  double median_ms = 0.0;
  double p95_ms = 0.0;
};

struct LatencyReport {
  int warmup_frames = 0;
  std::vector<FrameTiming> samples;

  StageStats preprocess() const;
  StageStats inference() const;
  StageStats decision() const;
  StageStats total() const;
};

// Wall-clock timing of preprocess -> predict -> decision step per frame.
// The first `warmup` iterations are run but not recorded. Needs >= 100 frames.
LatencyReport bench_latency(const FdnnModel& model, std::span<const GrayImage> frames,
                            const DecisionConfig& cfg, int warmup = 10);

// "frame,preprocess_ms,inference_ms,decision_ms,total_ms" rows.
std::string latency_csv(const LatencyReport& report);

}  // namespace drowsy
