#pragma once

#include "leap/trace.hpp"

#include <string>
#include <vector>

namespace leap {

/// Run-level cost metrics. TFOPs is the sum of per-step forward lengths
/// (tokens processed per pass, summed over passes); TPF is tokens decoded
/// per forward pass. Fields that need information the trace file does not
/// carry (strategy label, wall time) stay unset when computed from a file.
struct MetricsReport {
  std::string strategy;
  long steps = 0;
  long decoded_tokens = 0;
  long tfops = 0;
  double tpf = 0.0;
  double wall_seconds = -1.0;    // < 0: unknown
  double norm_tfops = -1.0;      // vs. baseline trace; < 0: no baseline
  double speedup_steps = -1.0;
  double speedup_wall = -1.0;
  std::vector<long> step_forward_lens;
};

MetricsReport compute_metrics(const DecodeTrace& trace,
                              const DecodeTrace* baseline = nullptr);

/// Summary CSV: one header row plus one row. Unknown fields stay empty.
std::string metrics_to_csv(const MetricsReport& report);

/// Per-step forward-length series: `step,forward_len` rows.
std::string step_series_to_csv(const MetricsReport& report);

}  // namespace leap
