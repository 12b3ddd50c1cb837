#pragma once

#include "leap/harness/corpus.hpp"

#include <string>
#include <vector>

namespace leap {

enum class SweepParam { tau, eta, phi };

SweepParam sweep_param_from_string(const std::string& s);
std::string to_string(SweepParam p);

struct SweepRow {
  double value = 0.0;
  CorpusReport report;
};

/// Inclusive grid lo, lo+step, ..., hi (endpoints rounded onto the grid);
/// one corpus evaluation per value with the swept parameter overridden.
std::vector<SweepRow> sweep(SweepParam param, double lo, double hi,
                            double step, const MarkovSpec& spec, int n,
                            int len, double alpha, DecodeConfig cfg);

std::string sweep_to_csv(SweepParam param, const std::vector<SweepRow>& rows);

}  // namespace leap
