#pragma once

#include "leap/config.hpp"
#include "leap/types.hpp"

#include <string>
#include <vector>

namespace leap {

enum class Mechanism { threshold, consistency, fallback };

std::string to_string(Mechanism m);
Mechanism mechanism_from_string(const std::string& s);

/// One committed token.
struct DecodeEvent {
  int pos = 0;
  Token token = 0;
  double conf = 0.0;
  Mechanism mech = Mechanism::threshold;
};

/// Greedy prediction (token, confidence) for one still-masked position.
struct Snapshot {
  int pos = 0;
  Token token = 0;
  double conf = 0.0;
};

/// Per-step record. `step` is 1-based; `forward_len` is the number of rows
/// the denoiser processed this step (the superposed length for lookahead
/// steps). Snapshots cover every masked position of the active block.
struct StepRecord {
  int step = 0;
  long forward_len = 0;
  std::vector<DecodeEvent> events;      // sorted by position
  std::vector<Snapshot> snapshots;      // sorted by position
};

/// Run-level context that is not part of the trace file format.
struct TraceMeta {
  std::string strategy;  // empty when loaded from a file
  int prompt_len = 0;
  int seq_len = 0;
  int block_size = 0;
  double wall_seconds = -1.0;  // < 0 means unknown
};

struct DecodeTrace {
  TraceMeta meta;
  std::vector<StepRecord> steps;

  long total_events() const;
  long tfops() const;  // sum of per-step forward lengths
};

/// JSON-lines serialization, one object per step:
///   {"step":s,"forward_len":n,"events":[{"pos":p,"token":t,"conf":c,
///    "mech":"threshold"}],"snapshots":[{"pos":p,"token":t,"conf":c}]}
/// Byte-stable for identical traces.
std::string trace_to_jsonl(const DecodeTrace& trace);
DecodeTrace trace_from_jsonl(const std::string& text);

void save_trace(const DecodeTrace& trace, const std::string& path);
DecodeTrace load_trace(const std::string& path);

}  // namespace leap
