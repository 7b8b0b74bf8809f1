#include "drowsy/experiments.hpp"

#include <stdexcept>

namespace drowsy {

RepeatedRunsReport repeated_runs(const Corpus& corpus, const SplitSpec& split_spec,
                                 const nn::SgdConfig& base_cfg, int k,
                                 std::uint64_t base_seed, std::uint64_t seed_stride) {
  if (k < 2) throw std::invalid_argument("repeated_runs: k must be >= 2");

  const std::vector<Corpus> parts = split(corpus, split_spec);

  RepeatedRunsReport report;
  report.runs.reserve(k);
  std::vector<double> accuracies;

  for (int i = 0; i < k; ++i) {
    RunOutcome outcome;
    outcome.run_index = i;
    outcome.seed = base_seed + static_cast<std::uint64_t>(i) * seed_stride;
    try {
      FdnnModel model(outcome.seed);
      nn::SgdConfig cfg = base_cfg;
      cfg.seed = outcome.seed;
      model.train(parts[0].samples, parts[1].samples, cfg);
      const double acc = 100.0 * model.accuracy(parts[1].samples);
      outcome.val_accuracy_percent = acc;
      accuracies.push_back(acc);
    } catch (const std::exception& e) {
      outcome.error = e.what();
    }
    report.runs.push_back(std::move(outcome));
  }

  if (!accuracies.empty()) report.stats = run_stats(accuracies);
  return report;
}

}  // namespace drowsy
