#pragma once

#include "leap/config.hpp"
#include "leap/markov.hpp"
#include "leap/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace leap {

struct CorpusItem {
  int id = 0;
  std::vector<Token> tokens;
};

/// n chain samples of the given length; item k draws its own seed from the
/// base seed.
std::vector<CorpusItem> sample_corpus(const MarkovSpec& spec, int n, int len,
                                      std::uint64_t seed);

/// JSON lines, one {"id":k,"tokens":[...]} object per item.
void save_corpus(const std::vector<CorpusItem>& corpus,
                 const std::string& path);
std::vector<CorpusItem> load_corpus(const std::string& path);

/// Corpus-level decode quality against the generative ground truth.
/// recovery is the fraction of initially masked positions decoded back to
/// their source token; exact_match the fraction of items fully recovered.
struct CorpusReport {
  std::string strategy;
  int items = 0;
  long masked_total = 0;
  long recovered_total = 0;
  double recovery = 1.0;
  double exact_match = 1.0;
  double mean_steps = 0.0;
  double mean_tpf = 0.0;
  double mean_tfops = 0.0;
  double norm_tfops = 1.0;  // vs. the cbpd reference on the same items
  double wall_seconds = 0.0;
};

/// Samples n sequences, corrupts each with keep-probability alpha, decodes
/// with the exact denoiser under cfg, and scores recovery. The cbpd
/// reference for norm_tfops runs on the same corrupted items.
CorpusReport evaluate_corpus(const MarkovSpec& spec, int n, int len,
                             double alpha, const DecodeConfig& cfg);

std::string corpus_report_to_csv(const CorpusReport& report);

}  // namespace leap
