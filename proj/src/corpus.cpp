#include "leap/harness/corpus.hpp"

#include "leap/decoding.hpp"
#include "leap/error.hpp"
#include "leap/splitmix.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace leap {

std::vector<CorpusItem> sample_corpus(const MarkovSpec& spec, int n, int len,
                                      std::uint64_t seed) {
  if (n < 1) throw DataError("corpus size must be >= 1");
  std::vector<CorpusItem> corpus;
  corpus.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k)
    corpus.push_back(
        {k, sample_sequence(spec, len, derive_seed(seed, 2 * static_cast<std::uint64_t>(k)))});
  return corpus;
}

void save_corpus(const std::vector<CorpusItem>& corpus,
                 const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open corpus file for writing: " + path);
  for (const CorpusItem& item : corpus) {
    nlohmann::ordered_json j;
    j["id"] = item.id;
    j["tokens"] = item.tokens;
    out << j.dump() << '\n';
  }
}

std::vector<CorpusItem> load_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open corpus file: " + path);
  std::vector<CorpusItem> corpus;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      CorpusItem item;
      item.id = j.at("id").get<int>();
      item.tokens = j.at("tokens").get<std::vector<Token>>();
      corpus.push_back(std::move(item));
    } catch (const nlohmann::json::exception& e) {
      throw DataError("corpus line " + std::to_string(lineno) + ": " +
                      e.what());
    }
  }
  if (corpus.empty()) throw DataError("empty corpus file: " + path);
  return corpus;
}

CorpusReport evaluate_corpus(const MarkovSpec& spec, int n, int len,
                             double alpha, const DecodeConfig& cfg) {
  if (n < 1) throw DataError("corpus size must be >= 1");
  if (len < 1) throw DataError("sequence length must be >= 1");
  if (len % cfg.block_size != 0)
    throw DataError("sequence length must be a multiple of block_size");
  spec.validate();
  DecodeConfig item_cfg = cfg;
  item_cfg.gen_len = len;
  item_cfg.validate();
  const Vocab vocab = spec.decode_vocab();

  const auto t0 = std::chrono::steady_clock::now();
  CorpusReport report;
  report.items = n;
  long items_exact = 0;
  long steps_total = 0;
  long tfops_total = 0;
  long tfops_cbpd_total = 0;
  double tpf_sum = 0.0;
  int runs_counted = 0;

  for (int k = 0; k < n; ++k) {
    const auto x0 = sample_sequence(
        spec, len, derive_seed(cfg.seed, 2 * static_cast<std::uint64_t>(k)));
    const auto xt =
        corrupt(x0, alpha, vocab.mask_id,
                derive_seed(cfg.seed, 2 * static_cast<std::uint64_t>(k) + 1));

    long masked = 0;
    for (Token t : xt)
      if (t == vocab.mask_id) ++masked;
    report.masked_total += masked;
    if (masked == 0) {  // nothing to decode, trivially recovered
      ++items_exact;
      continue;
    }

    const SequenceState state =
        state_from_tokens(xt, 0, cfg.block_size, vocab);
    const DecodeRun run = run_decode(spec, state, item_cfg);
    report.strategy = run.trace.meta.strategy;

    long recovered = 0;
    for (std::size_t p = 0; p < xt.size(); ++p)
      if (xt[p] == vocab.mask_id && run.tokens[p] == x0[p]) ++recovered;
    report.recovered_total += recovered;
    if (recovered == masked) ++items_exact;

    const auto steps = static_cast<long>(run.trace.steps.size());
    steps_total += steps;
    tfops_total += run.trace.tfops();
    tpf_sum += static_cast<double>(masked) / static_cast<double>(steps);
    ++runs_counted;

    if (cfg.strategy == Strategy::cbpd) {
      tfops_cbpd_total += run.trace.tfops();
    } else {
      DecodeConfig ref_cfg = item_cfg;
      ref_cfg.strategy = Strategy::cbpd;
      tfops_cbpd_total += run_decode(spec, state, ref_cfg).trace.tfops();
    }
  }

  if (report.strategy.empty())
    report.strategy = cfg.strategy == Strategy::leap ? "leap-exact"
                                                     : to_string(cfg.strategy);
  report.recovery = report.masked_total > 0
                        ? static_cast<double>(report.recovered_total) /
                              static_cast<double>(report.masked_total)
                        : 1.0;
  report.exact_match =
      static_cast<double>(items_exact) / static_cast<double>(n);
  if (runs_counted > 0) {
    report.mean_steps =
        static_cast<double>(steps_total) / static_cast<double>(runs_counted);
    report.mean_tpf = tpf_sum / static_cast<double>(runs_counted);
    report.mean_tfops =
        static_cast<double>(tfops_total) / static_cast<double>(runs_counted);
  }
  report.norm_tfops = tfops_cbpd_total > 0
                          ? static_cast<double>(tfops_total) /
                                static_cast<double>(tfops_cbpd_total)
                          : 1.0;
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return report;
}

std::string corpus_report_to_csv(const CorpusReport& r) {
  auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return std::string(buf);
  };
  std::ostringstream out;
  out << "strategy,items,recovery,exact_match,mean_steps,mean_tpf,mean_tfops,"
         "norm_tfops,wall_seconds\n";
  out << r.strategy << ',' << r.items << ',' << fmt(r.recovery) << ','
      << fmt(r.exact_match) << ',' << fmt(r.mean_steps) << ','
      << fmt(r.mean_tpf) << ',' << fmt(r.mean_tfops) << ','
      << fmt(r.norm_tfops) << ',' << fmt(r.wall_seconds) << '\n';
  return out.str();
}

}  // namespace leap
