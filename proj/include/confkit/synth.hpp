#ifndef CONFKIT_SYNTH_HPP
#define CONFKIT_SYNTH_HPP

// Synthetic corpus generation with known ground truth: controllable edit
// rates, features that reveal correctness to a configurable degree, and a
// planted "overconfident softmax" pathology.

#include <filesystem>
#include <vector>

#include "confkit/alignment.hpp"
#include "confkit/corpus.hpp"

namespace confkit {

struct SynthConfig {
  long num_utterances = 100;
  double mean_utt_len = 8.0;  // words per utterance (Poisson, >= 1)
  long vocab_size = 200;      // word-piece inventory
  double sub_rate = 0.1;
  double ins_rate = 0.02;
  double del_rate = 0.02;
  // Probability that an erroneous token draws softmax_p from [0.9, 1).
  double overconf_rate = 0.0;
  long feature_dim = 16;
  // Mixing weight between the correctness-revealing signal direction and
  // per-token noise in the feature vector.
  double feature_informativeness = 0.8;
  long nbest_width = 8;
  unsigned long seed = 1;
  bool lm_feature = false;  // also emit lm_logp and set the header flag
};

// Throws on out-of-range rates or non-positive sizes.
void validate(const SynthConfig& cfg);

// Reads a SynthConfig from a JSON object file; missing fields keep their
// defaults.
SynthConfig synth_config_from_file(const std::filesystem::path& path);

// Deterministic given cfg.seed. Every generated token carries its
// generation-time correctness label in oracle_correct.
Corpus generate(const SynthConfig& cfg);

// Generation-time labels, one BinaryTargets per hypothesis per utterance.
// Throws if any token lacks the oracle_correct metadata.
std::vector<std::vector<BinaryTargets>> oracle_targets(const Corpus& corpus);

}  // namespace confkit

#endif  // CONFKIT_SYNTH_HPP
