#ifndef CONFKIT_CORPUS_HPP
#define CONFKIT_CORPUS_HPP

// Corpus artefact I/O: n-best hypothesis files with per-token features,
// reference transcripts, and delimited curve files.
//
// Corpus file layout (one JSON object per line):
//   line 1            {"feature_dim": D, "has_lm_feature": B[, "note": "..."]}
//   lines 2..         {"utt_id": ..., "reference": [{piece, word_begin}...],
//                      "nbest": [{total_logp?, tokens: [{piece, word_begin,
//                      softmax_p, lm_logp?, features: [...], cem_p?,
//                      oracle_correct?}...]}...]}

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "confkit/metrics.hpp"

namespace confkit {

struct RefToken {
  std::string piece;
  bool word_begin = true;

  bool operator==(const RefToken&) const = default;
};

struct TokenRecord {
  std::string piece;
  bool word_begin = false;
  double softmax_p = 0.0;
  std::optional<double> lm_logp;     // natural log, <= 0
  std::vector<double> features;      // length = CorpusHeader::feature_dim
  std::optional<double> cem_p;       // attached by scoring
  std::optional<bool> oracle_correct;  // generation-time label (synth only)

  bool operator==(const TokenRecord&) const = default;
};

struct Hypothesis {
  std::vector<TokenRecord> tokens;  // non-empty
  std::optional<double> total_logp;

  bool operator==(const Hypothesis&) const = default;
};

struct Utterance {
  std::string utt_id;
  std::vector<RefToken> reference;
  std::vector<Hypothesis> nbest;  // best first

  bool operator==(const Utterance&) const = default;
};

struct CorpusHeader {
  int feature_dim = 0;
  bool has_lm_feature = false;
  std::string note;

  bool operator==(const CorpusHeader&) const = default;
};

struct Corpus {
  CorpusHeader header;
  std::vector<Utterance> utterances;

  bool operator==(const Corpus&) const = default;
};

// Which per-token score a downstream consumer reads.
enum class Scorer { Softmax, Cem };

const char* scorer_name(Scorer s);

// softmax_p or cem_p of a token; throws if the requested score is absent.
double token_score(const TokenRecord& token, Scorer scorer);

// Checks every type invariant; context names the utterance and token on
// failure. Used by both the reader and the writer.
void validate(const Corpus& corpus);

Corpus read_corpus(const std::filesystem::path& path);
void write_corpus(const Corpus& corpus, const std::filesystem::path& path);

struct CurvePoint {
  double x = 0.0;
  double y = 0.0;
  long n = 0;
};

// Delimited text, header "x,y,n", one point per line, >= 9 significant
// digits. Points must be ordered by x.
void write_curve(std::span<const CurvePoint> points,
                 const std::filesystem::path& path);

// Wide P-R variant: threshold,precision,recall,tp,fp,fn.
void write_pr_curve(const PrCurve& curve, const std::filesystem::path& path);

// Shortest text for v that parses back to exactly v, with at least
// min_digits significant digits.
std::string format_double(double v, int min_digits);

// Writes via a temporary file in the same directory and renames on success,
// so failed runs never leave truncated outputs.
void atomic_write_text(const std::filesystem::path& path,
                       const std::string& content);

}  // namespace confkit

#endif  // CONFKIT_CORPUS_HPP
