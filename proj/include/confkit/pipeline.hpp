#ifndef CONFKIT_PIPELINE_HPP
#define CONFKIT_PIPELINE_HPP

// End-to-end evaluation flows: softmax-vs-CEM metric reports, P-R curve
// material, and confidence-threshold filtering curves. Only the top-1
// hypothesis of each utterance enters evaluation and filtering.

#include <span>
#include <string>

#include "confkit/aggregate.hpp"
#include "confkit/alignment.hpp"
#include "confkit/calibration.hpp"
#include "confkit/corpus.hpp"
#include "confkit/metrics.hpp"

namespace confkit {

enum class Level { Token, Word };

const char* level_name(Level level);

struct EvalCell {
  double auc = 0.0;       // before calibration
  double auc_pwlm = 0.0;  // after calibration (equal up to 1e-9)
  double nce_raw = 0.0;
  double nce_pwlm = 0.0;
  long n = 0;  // scored units
};

struct EvalReport {
  EvalCell cells[2][2];  // [scorer][level]
  WerBreakdown wer;      // pooled over top-1 hypotheses
  long num_utterances = 0;

  EvalCell& cell(Scorer s, Level l) {
    return cells[static_cast<int>(s)][static_cast<int>(l)];
  }
  const EvalCell& cell(Scorer s, Level l) const {
    return cells[static_cast<int>(s)][static_cast<int>(l)];
  }
};

// Targets and confidences over the top-1 hypotheses of the whole corpus.
ScoredSet build_scored_set(const Corpus& corpus, Scorer scorer, Level level);

// Pooled S/D/I over top-1 hypotheses against the references.
WerBreakdown corpus_wer(const Corpus& corpus);

// Fits a PWLM per scorer/level on dev, applies it to eval, and reports
// AUC / NCE before and after. Corpora must be disjoint by utt_id and carry
// cem_p scores.
EvalReport evaluate(const Corpus& eval, const Corpus& dev, int num_bins = 20);

struct FilterPoint {
  double threshold = 0.0;
  double wer = 0.0;  // pooled over the selected subset
  long count = 0;    // utterances selected
};

struct FilterCurve {
  std::vector<FilterPoint> points;
};

// For each threshold (ascending), pools WER over utterances whose
// confidence is >= the threshold. Thresholds selecting nothing emit no
// point. Utterance confidence is the token mean of the top-1 hypothesis
// (word mean when agg = Level::Word).
FilterCurve filter_curve(const Corpus& corpus, Scorer scorer,
                         std::span<const double> thresholds,
                         Level agg = Level::Token);

// Sum of positive WER increments along the curve; 0 when monotone
// non-increasing. Quantifies overconfidence spikes.
double spike_score(const FilterCurve& curve);

std::string render_report_text(const EvalReport& report);
std::string render_report_csv(const EvalReport& report);

}  // namespace confkit

#endif  // CONFKIT_PIPELINE_HPP
