#include "leap/trace.hpp"

#include "leap/error.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace leap {

namespace {
using ordered_json = nlohmann::ordered_json;
}

std::string to_string(Mechanism m) {
  switch (m) {
    case Mechanism::threshold: return "threshold";
    case Mechanism::consistency: return "consistency";
    case Mechanism::fallback: return "fallback";
  }
  return "?";
}

Mechanism mechanism_from_string(const std::string& s) {
  if (s == "threshold") return Mechanism::threshold;
  if (s == "consistency") return Mechanism::consistency;
  if (s == "fallback") return Mechanism::fallback;
  throw DataError("unknown mechanism: " + s);
}

long DecodeTrace::total_events() const {
  long n = 0;
  for (const auto& s : steps) n += static_cast<long>(s.events.size());
  return n;
}

long DecodeTrace::tfops() const {
  long n = 0;
  for (const auto& s : steps) n += s.forward_len;
  return n;
}

std::string trace_to_jsonl(const DecodeTrace& trace) {
  std::ostringstream out;
  for (const auto& step : trace.steps) {
    ordered_json rec;
    rec["step"] = step.step;
    rec["forward_len"] = step.forward_len;
    ordered_json events = ordered_json::array();
    for (const auto& e : step.events) {
      ordered_json je;
      je["pos"] = e.pos;
      je["token"] = e.token;
      je["conf"] = e.conf;
      je["mech"] = to_string(e.mech);
      events.push_back(std::move(je));
    }
    rec["events"] = std::move(events);
    ordered_json snaps = ordered_json::array();
    for (const auto& s : step.snapshots) {
      ordered_json js;
      js["pos"] = s.pos;
      js["token"] = s.token;
      js["conf"] = s.conf;
      snaps.push_back(std::move(js));
    }
    rec["snapshots"] = std::move(snaps);
    out << rec.dump() << '\n';
  }
  return out.str();
}

DecodeTrace trace_from_jsonl(const std::string& text) {
  DecodeTrace trace;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    ordered_json rec;
    try {
      rec = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError("trace line " + std::to_string(lineno) + ": " +
                      e.what());
    }
    try {
      StepRecord step;
      step.step = rec.at("step").get<int>();
      step.forward_len = rec.at("forward_len").get<long>();
      for (const auto& je : rec.at("events")) {
        DecodeEvent e;
        e.pos = je.at("pos").get<int>();
        e.token = je.at("token").get<Token>();
        e.conf = je.at("conf").get<double>();
        e.mech = mechanism_from_string(je.at("mech").get<std::string>());
        step.events.push_back(e);
      }
      for (const auto& js : rec.at("snapshots")) {
        Snapshot s;
        s.pos = js.at("pos").get<int>();
        s.token = js.at("token").get<Token>();
        s.conf = js.at("conf").get<double>();
        step.snapshots.push_back(s);
      }
      if (step.events.empty())
        throw DataError("trace line " + std::to_string(lineno) +
                        ": step without events");
      trace.steps.push_back(std::move(step));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("trace line " + std::to_string(lineno) + ": " +
                      e.what());
    }
  }
  return trace;
}

void save_trace(const DecodeTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open trace file for writing: " + path);
  out << trace_to_jsonl(trace);
}

DecodeTrace load_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open trace file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return trace_from_jsonl(ss.str());
}

}  // namespace leap
