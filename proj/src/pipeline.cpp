// pipeline.cpp -- evaluation and filtering flows.

#include "confkit/pipeline.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

#include "confkit/error.hpp"

namespace confkit {

namespace {

const Hypothesis& top1(const Utterance& u) {
  if (u.nbest.empty()) {
    throw Error("utt '" + u.utt_id + "': no hypotheses");
  }
  return u.nbest.front();
}

std::vector<std::string> ref_pieces(const Utterance& u) {
  if (u.reference.empty()) {
    throw Error("utt '" + u.utt_id + "': no reference");
  }
  std::vector<std::string> pieces;
  pieces.reserve(u.reference.size());
  for (const RefToken& r : u.reference) pieces.push_back(r.piece);
  return pieces;
}

std::vector<std::string> ref_words(const Utterance& u) {
  std::vector<std::string> pieces = ref_pieces(u);
  std::vector<char> begin;
  begin.reserve(u.reference.size());
  for (const RefToken& r : u.reference) begin.push_back(r.word_begin ? 1 : 0);
  return tokens_to_words(pieces, begin);
}

std::vector<std::string> hyp_words(const Hypothesis& h) {
  std::vector<std::string> pieces;
  std::vector<char> begin;
  pieces.reserve(h.tokens.size());
  begin.reserve(h.tokens.size());
  for (const TokenRecord& t : h.tokens) {
    pieces.push_back(t.piece);
    begin.push_back(t.word_begin ? 1 : 0);
  }
  return tokens_to_words(pieces, begin);
}

WerBreakdown utterance_wer(const Utterance& u) {
  return word_error_rate(ref_words(u), hyp_words(top1(u)));
}

}  // namespace

const char* level_name(Level level) {
  return level == Level::Token ? "token" : "word";
}

ScoredSet build_scored_set(const Corpus& corpus, Scorer scorer, Level level) {
  ScoredSet set;
  for (const Utterance& u : corpus.utterances) {
    const Hypothesis& hyp = top1(u);
    try {
      if (level == Level::Token) {
        std::vector<std::string> hyp_pieces;
        hyp_pieces.reserve(hyp.tokens.size());
        for (const TokenRecord& t : hyp.tokens) hyp_pieces.push_back(t.piece);
        const Alignment a = levenshtein_align(ref_pieces(u), hyp_pieces);
        const BinaryTargets targets =
            targets_from_alignment(a, hyp.tokens.size());
        for (std::size_t i = 0; i < hyp.tokens.size(); ++i) {
          set.targets.push_back(targets[i]);
          set.confidences.push_back(token_score(hyp.tokens[i], scorer));
        }
      } else {
        const std::vector<std::string> rw = ref_words(u);
        const std::vector<std::string> hw = hyp_words(hyp);
        const Alignment a = levenshtein_align(rw, hw);
        const BinaryTargets targets = word_targets(a, hw.size());
        const std::vector<WordConfidence> wc =
            word_confidences(hyp.tokens, scorer);
        if (wc.size() != targets.size()) {
          throw Error("word confidence/target count mismatch");
        }
        for (std::size_t i = 0; i < wc.size(); ++i) {
          set.targets.push_back(targets[i]);
          set.confidences.push_back(wc[i].confidence);
        }
      }
    } catch (const Error& e) {
      throw Error("utt '" + u.utt_id + "': " + e.what());
    }
  }
  return set;
}

WerBreakdown corpus_wer(const Corpus& corpus) {
  WerBreakdown pooled;
  for (const Utterance& u : corpus.utterances) {
    const WerBreakdown w = utterance_wer(u);
    pooled.substitutions += w.substitutions;
    pooled.deletions += w.deletions;
    pooled.insertions += w.insertions;
    pooled.ref_len += w.ref_len;
  }
  if (pooled.ref_len == 0) {
    throw Error("corpus_wer: empty corpus");
  }
  pooled.wer = static_cast<double>(pooled.substitutions + pooled.deletions +
                                   pooled.insertions) /
               static_cast<double>(pooled.ref_len);
  return pooled;
}

EvalReport evaluate(const Corpus& eval, const Corpus& dev, int num_bins) {
  std::unordered_set<std::string> dev_ids;
  for (const Utterance& u : dev.utterances) dev_ids.insert(u.utt_id);
  for (const Utterance& u : eval.utterances) {
    if (dev_ids.count(u.utt_id)) {
      throw Error("evaluate: utt_id '" + u.utt_id +
                  "' appears in both dev and eval corpora");
    }
  }

  EvalReport report;
  report.num_utterances = static_cast<long>(eval.utterances.size());
  report.wer = corpus_wer(eval);
  for (Scorer scorer : {Scorer::Softmax, Scorer::Cem}) {
    for (Level level : {Level::Token, Level::Word}) {
      const std::string ctx = std::string(scorer_name(scorer)) + "/" +
                              level_name(level);
      try {
        const ScoredSet dev_set = build_scored_set(dev, scorer, level);
        const ScoredSet eval_set = build_scored_set(eval, scorer, level);
        const Pwlm mapping = fit_pwlm(dev_set, num_bins);
        ScoredSet calibrated = eval_set;
        for (double& p : calibrated.confidences) p = apply_pwlm(mapping, p);

        EvalCell& cell = report.cell(scorer, level);
        cell.n = static_cast<long>(eval_set.targets.size());
        cell.auc = auc(pr_curve(eval_set));
        cell.auc_pwlm = auc(pr_curve(calibrated));
        cell.nce_raw = nce(eval_set);
        cell.nce_pwlm = nce(calibrated);
      } catch (const Error& e) {
        throw Error("evaluate (" + ctx + "): " + e.what());
      }
    }
  }
  return report;
}

FilterCurve filter_curve(const Corpus& corpus, Scorer scorer,
                         std::span<const double> thresholds, Level agg) {
  if (corpus.utterances.empty()) {
    throw Error("filter_curve: empty corpus");
  }
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    if (!(thresholds[i] > thresholds[i - 1])) {
      throw Error("filter_curve: thresholds must be strictly ascending");
    }
  }

  struct UttStat {
    double confidence;
    WerBreakdown wer;
  };
  std::vector<UttStat> stats;
  stats.reserve(corpus.utterances.size());
  for (const Utterance& u : corpus.utterances) {
    try {
      double conf;
      if (agg == Level::Token) {
        conf = utterance_confidence(top1(u).tokens, scorer);
      } else {
        const auto words = word_confidences(top1(u).tokens, scorer);
        double sum = 0.0;
        for (const WordConfidence& w : words) sum += w.confidence;
        conf = sum / static_cast<double>(words.size());
      }
      stats.push_back({conf, utterance_wer(u)});
    } catch (const Error& e) {
      throw Error("utt '" + u.utt_id + "': " + e.what());
    }
  }

  FilterCurve curve;
  for (double threshold : thresholds) {
    long errors = 0, ref_len = 0, count = 0;
    for (const UttStat& s : stats) {
      if (s.confidence >= threshold) {
        errors += s.wer.substitutions + s.wer.deletions + s.wer.insertions;
        ref_len += s.wer.ref_len;
        ++count;
      }
    }
    if (count == 0) continue;  // empty subsets emit no point
    curve.points.push_back(
        {threshold, static_cast<double>(errors) / static_cast<double>(ref_len),
         count});
  }
  return curve;
}

double spike_score(const FilterCurve& curve) {
  if (curve.points.size() < 2) {
    throw Error("spike_score: curve needs at least two points");
  }
  double spikes = 0.0;
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    spikes += std::max(0.0, curve.points[i].wer - curve.points[i - 1].wer);
  }
  return spikes;
}

std::string render_report_text(const EvalReport& report) {
  std::ostringstream out;
  out << "confkit-eval-report 1\n";
  out << "utterances " << report.num_utterances << '\n';
  out << "wer " << format_double(report.wer.wer, 9) << " (sub="
      << report.wer.substitutions << " del=" << report.wer.deletions
      << " ins=" << report.wer.insertions << " ref_len=" << report.wer.ref_len
      << ")\n";
  out << "scorer level auc auc_pwlm nce nce_pwlm n\n";
  for (Scorer scorer : {Scorer::Softmax, Scorer::Cem}) {
    for (Level level : {Level::Token, Level::Word}) {
      const EvalCell& c = report.cell(scorer, level);
      out << scorer_name(scorer) << ' ' << level_name(level) << ' '
          << format_double(c.auc, 9) << ' ' << format_double(c.auc_pwlm, 9)
          << ' ' << format_double(c.nce_raw, 9) << ' '
          << format_double(c.nce_pwlm, 9) << ' ' << c.n << '\n';
    }
  }
  return out.str();
}

std::string render_report_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "scorer,level,auc,auc_pwlm,nce,nce_pwlm,n\n";
  for (Scorer scorer : {Scorer::Softmax, Scorer::Cem}) {
    for (Level level : {Level::Token, Level::Word}) {
      const EvalCell& c = report.cell(scorer, level);
      out << scorer_name(scorer) << ',' << level_name(level) << ','
          << format_double(c.auc, 9) << ',' << format_double(c.auc_pwlm, 9)
          << ',' << format_double(c.nce_raw, 9) << ','
          << format_double(c.nce_pwlm, 9) << ',' << c.n << '\n';
    }
  }
  return out.str();
}

}  // namespace confkit
