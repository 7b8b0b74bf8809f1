#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "drowsy/eye_sample.hpp"

namespace drowsy {

// Positive class is CLOSED throughout.
struct ConfusionCounts {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t tn = 0;
  std::int64_t fn = 0;

  std::int64_t total() const { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

ConfusionCounts confusion(std::span<const std::pair<EyeLabel, EyeLabel>> pred_truth);

// A metric whose denominator is zero is reported as nullopt, not 0.
struct ClassMetrics {
  std::optional<double> precision;
  std::optional<double> recall;
  std::optional<double> accuracy;
};

ClassMetrics precision_recall_accuracy(const ConfusionCounts& c);

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocResult {
  double auc = 0.0;
  std::vector<RocPoint> points;  // one per distinct score, descending threshold
};

// AUC by Mann-Whitney pair counting (ties count 1/2), which matches the
// trapezoidal area under the emitted ROC points. Throws DataError when only
// one class is present.
RocResult roc_auc(std::span<const double> scores, std::span<const EyeLabel> labels);

struct RunStats {
  std::vector<double> accuracies;  // percent
  double mean = 0.0;
  double variance = 0.0;  // population variance
  double stddev = 0.0;
};

RunStats run_stats(std::span<const double> accuracies);

}  // namespace drowsy
