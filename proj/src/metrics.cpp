#include "drowsy/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "drowsy/errors.hpp"

namespace drowsy {

ConfusionCounts confusion(std::span<const std::pair<EyeLabel, EyeLabel>> pred_truth) {
  if (pred_truth.empty()) throw std::invalid_argument("confusion: empty input");
  ConfusionCounts c;
  for (const auto& [pred, truth] : pred_truth) {
    const bool pred_pos = pred == EyeLabel::Closed;
    const bool true_pos = truth == EyeLabel::Closed;
    if (pred_pos && true_pos)
      ++c.tp;
    else if (pred_pos && !true_pos)
      ++c.fp;
    else if (!pred_pos && !true_pos)
      ++c.tn;
    else
      ++c.fn;
  }
  return c;
}

ClassMetrics precision_recall_accuracy(const ConfusionCounts& c) {
  ClassMetrics m;
  if (c.tp + c.fp > 0)
    m.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  if (c.tp + c.fn > 0)
    m.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  if (c.total() > 0)
    m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  return m;
}

RocResult roc_auc(std::span<const double> scores, std::span<const EyeLabel> labels) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("roc_auc: scores/labels size mismatch");
  if (scores.empty()) throw std::invalid_argument("roc_auc: empty input");

  std::size_t n_pos = 0;
  for (EyeLabel l : labels)
    if (l == EyeLabel::Closed) ++n_pos;
  const std::size_t n_neg = scores.size() - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw DataError("roc_auc: both classes must be present");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Mann-Whitney with average ranks for ties.
  double rank_sum_pos = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // 1-based
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]] == EyeLabel::Closed) rank_sum_pos += avg_rank;
    i = j;
  }
  const double auc =
      (rank_sum_pos - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1)) /
      (static_cast<double>(n_pos) * static_cast<double>(n_neg));

  // ROC points: classify positive at score >= threshold, one point per
  // distinct threshold, descending.
  RocResult result;
  result.auc = auc;
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = order.size(); i > 0;) {
    std::size_t j = i;  // [j, i) will be the tie group below
    const double s = scores[order[i - 1]];
    while (j > 0 && scores[order[j - 1]] == s) --j;
    for (std::size_t k = j; k < i; ++k) {
      if (labels[order[k]] == EyeLabel::Closed)
        ++tp;
      else
        ++fp;
    }
    result.points.push_back({s, static_cast<double>(fp) / static_cast<double>(n_neg),
                             static_cast<double>(tp) / static_cast<double>(n_pos)});
    i = j;
  }
  return result;
}

RunStats run_stats(std::span<const double> accuracies) {
  if (accuracies.empty()) throw std::invalid_argument("run_stats: empty input");
  RunStats s;
  s.accuracies.assign(accuracies.begin(), accuracies.end());
  s.mean = std::accumulate(accuracies.begin(), accuracies.end(), 0.0) /
           static_cast<double>(accuracies.size());
  double sq = 0.0;
  for (double a : accuracies) sq += (a - s.mean) * (a - s.mean);
  s.variance = sq / static_cast<double>(accuracies.size());
  s.stddev = std::sqrt(s.variance);
  return s;
}

}  // namespace drowsy
