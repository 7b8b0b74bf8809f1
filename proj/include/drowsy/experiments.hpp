#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "drowsy/dataset.hpp"
#include "drowsy/fdnn.hpp"
#include "drowsy/metrics.hpp"

namespace drowsy {

struct RunOutcome {
  int run_index = 0;
  std::uint64_t seed = 0;
  std::optional<double> val_accuracy_percent;
  std::string error;  // non-empty when the run aborted
};

struct RepeatedRunsReport {
  std::vector<RunOutcome> runs;          // ordered by run index
  std::optional<RunStats> stats;         // over the completed runs
};

// Trains k independent models on the same split (the split seed comes from
// split_spec); run i uses seed base_seed + i*seed_stride for both weight
// init and training. A stride of 0 forces identical runs. Failed runs are
// reported, not rethrown.
RepeatedRunsReport repeated_runs(const Corpus& corpus, const SplitSpec& split_spec,
                                 const nn::SgdConfig& base_cfg, int k,
                                 std::uint64_t base_seed, std::uint64_t seed_stride = 1);

}  // namespace drowsy
