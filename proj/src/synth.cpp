// synth.cpp -- synthetic corpus generator.

#include "confkit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <json.hpp>

#include "confkit/error.hpp"

namespace confkit {

namespace {

void check_rate(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw Error(std::string("synth: ") + name + " must be in [0, 1]");
  }
}

std::string piece_name(long index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "p%04ld", index);
  return buf;
}

}  // namespace

void validate(const SynthConfig& cfg) {
  if (cfg.num_utterances < 1) throw Error("synth: num_utterances must be >= 1");
  if (!(cfg.mean_utt_len > 0.0)) throw Error("synth: mean_utt_len must be > 0");
  if (cfg.vocab_size < 2) throw Error("synth: vocab_size must be >= 2");
  check_rate(cfg.sub_rate, "sub_rate");
  check_rate(cfg.ins_rate, "ins_rate");
  check_rate(cfg.del_rate, "del_rate");
  check_rate(cfg.overconf_rate, "overconf_rate");
  check_rate(cfg.feature_informativeness, "feature_informativeness");
  if (cfg.feature_dim < 1) throw Error("synth: feature_dim must be >= 1");
  if (cfg.nbest_width < 1) throw Error("synth: nbest_width must be >= 1");
}

SynthConfig synth_config_from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open synth config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(path.string() + ": malformed JSON: " + e.what());
  }
  SynthConfig cfg;
  auto num = [&](const char* key, auto& field) {
    if (auto it = j.find(key); it != j.end()) {
      if (!it->is_number()) {
        throw Error(path.string() + ": field '" + key + "' must be a number");
      }
      field = it->template get<std::remove_reference_t<decltype(field)>>();
      j.erase(key);
    }
  };
  num("num_utterances", cfg.num_utterances);
  num("mean_utt_len", cfg.mean_utt_len);
  num("vocab_size", cfg.vocab_size);
  num("sub_rate", cfg.sub_rate);
  num("ins_rate", cfg.ins_rate);
  num("del_rate", cfg.del_rate);
  num("overconf_rate", cfg.overconf_rate);
  num("feature_dim", cfg.feature_dim);
  num("feature_informativeness", cfg.feature_informativeness);
  num("nbest_width", cfg.nbest_width);
  num("seed", cfg.seed);
  if (auto it = j.find("lm_feature"); it != j.end()) {
    if (!it->is_boolean()) {
      throw Error(path.string() + ": field 'lm_feature' must be a boolean");
    }
    cfg.lm_feature = it->get<bool>();
    j.erase("lm_feature");
  }
  if (!j.empty()) {
    throw Error(path.string() + ": unknown field '" + j.begin().key() + "'");
  }
  validate(cfg);
  return cfg;
}

Corpus generate(const SynthConfig& cfg) {
  validate(cfg);
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<long> any_piece(0, cfg.vocab_size - 1);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::poisson_distribution<long> utt_len(cfg.mean_utt_len);

  // Fixed correctness-revealing direction in feature space.
  Eigen::VectorXd signal(cfg.feature_dim);
  for (long i = 0; i < cfg.feature_dim; ++i) signal(i) = gauss(rng);
  signal.normalize();

  auto other_piece = [&](long current) {
    std::uniform_int_distribution<long> d(0, cfg.vocab_size - 2);
    const long drawn = d(rng);
    return drawn >= current ? drawn + 1 : drawn;
  };

  auto draw_softmax = [&](bool correct) {
    if (correct) return 0.70 + 0.295 * unit(rng);
    if (unit(rng) < cfg.overconf_rate) return 0.90 + 0.0999 * unit(rng);
    return 0.05 + 0.55 * unit(rng);
  };

  auto draw_lm_logp = [&](bool correct) {
    const double p = correct ? 0.50 + 0.45 * unit(rng) : 0.02 + 0.48 * unit(rng);
    return std::log(p);
  };

  Corpus corpus;
  corpus.header.feature_dim = static_cast<int>(cfg.feature_dim);
  corpus.header.has_lm_feature = cfg.lm_feature;
  corpus.header.note = "synthetic word-piece corpus";

  for (long u = 0; u < cfg.num_utterances; ++u) {
    Utterance utt;
    {
      char buf[48];
      std::snprintf(buf, sizeof(buf), "s%lu_u%06ld", cfg.seed, u);
      utt.utt_id = buf;
    }

    const long n_words = std::max<long>(1, utt_len(rng));
    std::vector<long> ref_pieces;
    std::vector<char> ref_begin;
    for (long w = 0; w < n_words; ++w) {
      const long n_pieces = 1 + (unit(rng) < 0.3 ? 1 : 0);
      for (long k = 0; k < n_pieces; ++k) {
        ref_pieces.push_back(any_piece(rng));
        ref_begin.push_back(k == 0);
      }
    }
    for (std::size_t i = 0; i < ref_pieces.size(); ++i) {
      utt.reference.push_back({piece_name(ref_pieces[i]), ref_begin[i] != 0});
    }

    for (long h = 0; h < cfg.nbest_width; ++h) {
      Hypothesis hyp;
      auto emit = [&](long piece, bool word_begin, bool correct) {
        TokenRecord tok;
        tok.piece = piece_name(piece);
        tok.word_begin = word_begin;
        tok.oracle_correct = correct;
        tok.softmax_p = draw_softmax(correct);
        if (cfg.lm_feature) tok.lm_logp = draw_lm_logp(correct);
        tok.features.resize(cfg.feature_dim);
        const double sign = correct ? 1.0 : -1.0;
        for (long d = 0; d < cfg.feature_dim; ++d) {
          tok.features[d] = cfg.feature_informativeness * sign * signal(d) +
                            (1.0 - cfg.feature_informativeness) * gauss(rng);
        }
        hyp.tokens.push_back(std::move(tok));
      };

      for (std::size_t i = 0; i < ref_pieces.size(); ++i) {
        if (unit(rng) < cfg.del_rate) {
          // deleted slot; no hypothesis token
        } else if (unit(rng) < cfg.sub_rate) {
          emit(other_piece(ref_pieces[i]), ref_begin[i] != 0, false);
        } else {
          emit(ref_pieces[i], ref_begin[i] != 0, true);
        }
        if (unit(rng) < cfg.ins_rate) {
          emit(any_piece(rng), true, false);
        }
      }
      if (hyp.tokens.empty()) {
        // Everything got deleted; hypotheses must be non-empty.
        emit(ref_pieces[0], true, true);
      }
      hyp.tokens.front().word_begin = true;

      double total = 0.0;
      for (const TokenRecord& t : hyp.tokens) total += std::log(t.softmax_p);
      hyp.total_logp = total;
      utt.nbest.push_back(std::move(hyp));
    }
    corpus.utterances.push_back(std::move(utt));
  }
  return corpus;
}

std::vector<std::vector<BinaryTargets>> oracle_targets(const Corpus& corpus) {
  std::vector<std::vector<BinaryTargets>> out;
  out.reserve(corpus.utterances.size());
  for (const Utterance& u : corpus.utterances) {
    std::vector<BinaryTargets> per_hyp;
    for (const Hypothesis& h : u.nbest) {
      BinaryTargets targets;
      targets.reserve(h.tokens.size());
      for (const TokenRecord& t : h.tokens) {
        if (!t.oracle_correct) {
          throw Error("utt '" + u.utt_id +
                      "': corpus lacks generation metadata (oracle_correct)");
        }
        targets.push_back(*t.oracle_correct ? 1 : 0);
      }
      per_hyp.push_back(std::move(targets));
    }
    out.push_back(std::move(per_hyp));
  }
  return out;
}

}  // namespace confkit
