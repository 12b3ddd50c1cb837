#include "leap/harness/sweep.hpp"

#include "leap/error.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace leap {

SweepParam sweep_param_from_string(const std::string& s) {
  if (s == "tau") return SweepParam::tau;
  if (s == "eta") return SweepParam::eta;
  if (s == "phi") return SweepParam::phi;
  throw DataError("unknown sweep parameter: " + s);
}

std::string to_string(SweepParam p) {
  switch (p) {
    case SweepParam::tau: return "tau";
    case SweepParam::eta: return "eta";
    case SweepParam::phi: return "phi";
  }
  return "?";
}

std::vector<SweepRow> sweep(SweepParam param, double lo, double hi,
                            double step, const MarkovSpec& spec, int n,
                            int len, double alpha, DecodeConfig cfg) {
  if (!(lo <= hi)) throw DataError("sweep range: lo must be <= hi");
  if (!(step > 0.0)) throw DataError("sweep range: step must be > 0");
  const int count = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;

  std::vector<SweepRow> rows;
  rows.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    const double value = lo + static_cast<double>(i) * step;
    DecodeConfig run_cfg = cfg;
    switch (param) {
      case SweepParam::tau: run_cfg.tau = value; break;
      case SweepParam::eta: run_cfg.eta = value; break;
      case SweepParam::phi: run_cfg.phi = value; break;
    }
    rows.push_back({value, evaluate_corpus(spec, n, len, alpha, run_cfg)});
  }
  return rows;
}

std::string sweep_to_csv(SweepParam param, const std::vector<SweepRow>& rows) {
  auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return std::string(buf);
  };
  std::ostringstream out;
  out << to_string(param)
      << ",recovery,exact_match,mean_steps,mean_tpf,norm_tfops\n";
  for (const SweepRow& row : rows) {
    out << fmt(row.value) << ',' << fmt(row.report.recovery) << ','
        << fmt(row.report.exact_match) << ',' << fmt(row.report.mean_steps)
        << ',' << fmt(row.report.mean_tpf) << ','
        << fmt(row.report.norm_tfops) << '\n';
  }
  return out.str();
}

}  // namespace leap
