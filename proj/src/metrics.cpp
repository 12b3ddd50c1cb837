#include "leap/harness/metrics.hpp"

#include "leap/error.hpp"

#include <cstdio>
#include <sstream>

namespace leap {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

MetricsReport compute_metrics(const DecodeTrace& trace,
                              const DecodeTrace* baseline) {
  MetricsReport r;
  r.strategy = trace.meta.strategy;
  r.steps = static_cast<long>(trace.steps.size());
  r.decoded_tokens = trace.total_events();
  r.tfops = trace.tfops();
  r.tpf = r.steps > 0 ? static_cast<double>(r.decoded_tokens) /
                            static_cast<double>(r.steps)
                      : 0.0;
  r.wall_seconds = trace.meta.wall_seconds;
  for (const StepRecord& s : trace.steps) r.step_forward_lens.push_back(s.forward_len);

  if (baseline != nullptr) {
    if (baseline->total_events() != r.decoded_tokens)
      throw DataError("baseline trace decodes a different number of tokens");
    const long btfops = baseline->tfops();
    if (btfops > 0)
      r.norm_tfops = static_cast<double>(r.tfops) / static_cast<double>(btfops);
    const auto bsteps = static_cast<long>(baseline->steps.size());
    if (r.steps > 0)
      r.speedup_steps =
          static_cast<double>(bsteps) / static_cast<double>(r.steps);
    if (baseline->meta.wall_seconds >= 0.0 && r.wall_seconds > 0.0)
      r.speedup_wall = baseline->meta.wall_seconds / r.wall_seconds;
  }
  return r;
}

std::string metrics_to_csv(const MetricsReport& r) {
  std::ostringstream out;
  out << "strategy,steps,decoded_tokens,tpf,tfops,norm_tfops,wall_seconds,"
         "speedup_steps,speedup_wall\n";
  out << r.strategy << ',' << r.steps << ',' << r.decoded_tokens << ','
      << fmt(r.tpf) << ',' << r.tfops << ','
      << (r.norm_tfops >= 0.0 ? fmt(r.norm_tfops) : "") << ','
      << (r.wall_seconds >= 0.0 ? fmt(r.wall_seconds) : "") << ','
      << (r.speedup_steps >= 0.0 ? fmt(r.speedup_steps) : "") << ','
      << (r.speedup_wall >= 0.0 ? fmt(r.speedup_wall) : "") << '\n';
  return out.str();
}

std::string step_series_to_csv(const MetricsReport& r) {
  std::ostringstream out;
  out << "step,forward_len\n";
  for (std::size_t i = 0; i < r.step_forward_lens.size(); ++i)
    out << (i + 1) << ',' << r.step_forward_lens[i] << '\n';
  return out.str();
}

}  // namespace leap
