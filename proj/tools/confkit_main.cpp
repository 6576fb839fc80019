// confkit_main.cpp -- command-line front end for the confidence toolkit.

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "confkit/aggregate.hpp"
#include "confkit/alignment.hpp"
#include "confkit/calibration.hpp"
#include "confkit/cem.hpp"
#include "confkit/corpus.hpp"
#include "confkit/error.hpp"
#include "confkit/metrics.hpp"
#include "confkit/model_io.hpp"
#include "confkit/pipeline.hpp"
#include "confkit/synth.hpp"

namespace fs = std::filesystem;
using namespace confkit;

namespace {

int g_verbosity = 0;

void log_config(const std::string& subcommand,
                const std::vector<std::pair<std::string, std::string>>& kv) {
  std::ostringstream out;
  out << "[confkit] " << subcommand;
  for (const auto& [k, v] : kv) out << ' ' << k << '=' << v;
  std::cerr << out.str() << '\n';
}

Scorer parse_scorer(const std::string& name) {
  if (name == "softmax") return Scorer::Softmax;
  if (name == "cem") return Scorer::Cem;
  throw Error("unknown scorer '" + name + "' (expected softmax|cem)");
}

Level parse_level(const std::string& name) {
  if (name == "token") return Level::Token;
  if (name == "word") return Level::Word;
  throw Error("unknown level '" + name + "' (expected token|word)");
}

std::vector<double> parse_thresholds(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw Error("bad threshold '" + item + "' in --thresholds");
    }
  }
  if (out.empty()) throw Error("--thresholds is empty");
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (!(out[i] > out[i - 1])) {
      throw Error("--thresholds must be strictly ascending");
    }
  }
  return out;
}

const char* kOpLetters = "MSID";  // Match, Substitute, Insert, Delete

int run_synth(const SynthConfig& cfg, const std::string& config_file,
              const std::string& out_path) {
  SynthConfig resolved = cfg;
  if (!config_file.empty()) resolved = synth_config_from_file(config_file);
  log_config("synth",
             {{"out", out_path},
              {"utts", std::to_string(resolved.num_utterances)},
              {"mean_len", format_double(resolved.mean_utt_len, 9)},
              {"vocab", std::to_string(resolved.vocab_size)},
              {"sub_rate", format_double(resolved.sub_rate, 9)},
              {"ins_rate", format_double(resolved.ins_rate, 9)},
              {"del_rate", format_double(resolved.del_rate, 9)},
              {"overconf_rate", format_double(resolved.overconf_rate, 9)},
              {"feature_dim", std::to_string(resolved.feature_dim)},
              {"informativeness",
               format_double(resolved.feature_informativeness, 9)},
              {"nbest", std::to_string(resolved.nbest_width)},
              {"lm_feature", resolved.lm_feature ? "true" : "false"},
              {"seed", std::to_string(resolved.seed)}});
  const Corpus corpus = generate(resolved);
  write_corpus(corpus, out_path);
  std::cout << "wrote " << corpus.utterances.size() << " utterances to "
            << out_path << '\n';
  return 0;
}

int run_align(const std::string& corpus_path, const std::string& out_path) {
  log_config("align", {{"corpus", corpus_path}, {"out", out_path}});
  const Corpus corpus = read_corpus(corpus_path);
  std::ostringstream out;
  out << "utt_id,hyp,distance,ops,targets\n";
  for (const Utterance& u : corpus.utterances) {
    std::vector<std::string> ref;
    for (const RefToken& r : u.reference) ref.push_back(r.piece);
    for (std::size_t h = 0; h < u.nbest.size(); ++h) {
      std::vector<std::string> hyp;
      for (const TokenRecord& t : u.nbest[h].tokens) hyp.push_back(t.piece);
      const Alignment a = levenshtein_align(ref, hyp);
      const BinaryTargets targets = targets_from_alignment(a, hyp.size());
      std::string ops, tgt;
      for (const AlignOp& op : a.ops) ops += kOpLetters[static_cast<int>(op.kind)];
      for (int t : targets) tgt += t ? '1' : '0';
      out << u.utt_id << ',' << h << ',' << a.distance << ',' << ops << ','
          << tgt << '\n';
    }
  }
  atomic_write_text(out_path, out.str());
  const WerBreakdown wer = corpus_wer(corpus);
  std::cout << "top-1 WER " << format_double(wer.wer, 9) << " (sub="
            << wer.substitutions << " del=" << wer.deletions << " ins="
            << wer.insertions << " ref_len=" << wer.ref_len << ")\n";
  return 0;
}

int run_train(const std::string& corpus_path, const TrainConfig& cfg,
              const std::string& out_path) {
  log_config("train-cem",
             {{"corpus", corpus_path},
              {"out", out_path},
              {"steps", std::to_string(cfg.steps)},
              {"lr", format_double(cfg.learning_rate, 9)},
              {"batch", std::to_string(cfg.batch_size)},
              {"seed", std::to_string(cfg.seed)}});
  const Corpus corpus = read_corpus(corpus_path);
  const auto examples = make_training_examples(corpus);
  const TrainResult result = train_cem(examples, cfg);
  write_cem_model(result.model, out_path);
  std::cout << "trained on " << examples.size() << " utterances; full-batch "
            << "loss " << format_double(result.initial_loss, 9) << " -> "
            << format_double(result.final_loss, 9) << '\n';
  return 0;
}

int run_score(const std::string& corpus_path, const std::string& model_path,
              const std::string& out_path) {
  log_config("score", {{"corpus", corpus_path},
                       {"cem_model", model_path},
                       {"out", out_path}});
  const CemModel model = read_cem_model(model_path);
  const Corpus scored = score_corpus(model, read_corpus(corpus_path));
  write_corpus(scored, out_path);
  std::cout << "scored " << scored.utterances.size() << " utterances\n";
  return 0;
}

int run_calibrate(const std::string& corpus_path, const std::string& scorer,
                  const std::string& level, int bins,
                  const std::string& out_path) {
  log_config("calibrate", {{"corpus", corpus_path},
                           {"scorer", scorer},
                           {"level", level},
                           {"bins", std::to_string(bins)},
                           {"out", out_path}});
  const Corpus corpus = read_corpus(corpus_path);
  const ScoredSet dev =
      build_scored_set(corpus, parse_scorer(scorer), parse_level(level));
  const Pwlm mapping = fit_pwlm(dev, bins);
  write_pwlm(mapping, out_path);
  std::cout << "fitted " << mapping.knots.size() << " knots on "
            << dev.targets.size() << ' ' << level << "s\n";
  return 0;
}

int run_eval(const std::string& corpus_path, const std::string& dev_path,
             const std::string& model_path, int bins,
             const std::string& out_dir) {
  log_config("eval", {{"corpus", corpus_path},
                      {"dev", dev_path},
                      {"cem_model", model_path.empty() ? "-" : model_path},
                      {"bins", std::to_string(bins)},
                      {"out", out_dir}});
  Corpus eval_corpus = read_corpus(corpus_path);
  Corpus dev_corpus = read_corpus(dev_path);
  if (!model_path.empty()) {
    const CemModel model = read_cem_model(model_path);
    eval_corpus = score_corpus(model, std::move(eval_corpus));
    dev_corpus = score_corpus(model, std::move(dev_corpus));
  }
  const EvalReport report = evaluate(eval_corpus, dev_corpus, bins);

  fs::create_directories(out_dir);
  atomic_write_text(fs::path(out_dir) / "report.txt",
                    render_report_text(report));
  atomic_write_text(fs::path(out_dir) / "report.csv",
                    render_report_csv(report));
  for (Scorer scorer : {Scorer::Softmax, Scorer::Cem}) {
    for (Level level : {Level::Token, Level::Word}) {
      const ScoredSet set = build_scored_set(eval_corpus, scorer, level);
      const std::string name = std::string("pr_") + scorer_name(scorer) + "_" +
                               level_name(level) + ".csv";
      write_pr_curve(pr_curve(set), fs::path(out_dir) / name);
    }
  }
  std::cout << render_report_text(report);
  return 0;
}

int run_filter_curve(const std::string& corpus_path, const std::string& scorer,
                     const std::string& level, const std::string& thresholds,
                     const std::string& out_path) {
  log_config("filter-curve", {{"corpus", corpus_path},
                              {"scorer", scorer},
                              {"level", level},
                              {"thresholds", thresholds},
                              {"out", out_path}});
  const Corpus corpus = read_corpus(corpus_path);
  const std::vector<double> ts = parse_thresholds(thresholds);
  const FilterCurve curve =
      filter_curve(corpus, parse_scorer(scorer), ts, parse_level(level));
  std::vector<CurvePoint> points;
  points.reserve(curve.points.size());
  for (const FilterPoint& p : curve.points) {
    points.push_back({p.threshold, p.wer, p.count});
  }
  write_curve(points, out_path);
  if (curve.points.size() >= 2) {
    std::cout << "spike score " << format_double(spike_score(curve), 9) << '\n';
  }
  std::cout << "wrote " << curve.points.size() << " points to " << out_path
            << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"confkit: confidence estimation and calibration toolkit for "
               "sequence recognisers"};
  app.require_subcommand(1);
  app.add_flag("-v,--verbose", g_verbosity, "increase log verbosity");

  // synth
  SynthConfig synth_cfg;
  std::string synth_config_file, synth_out;
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  synth->add_option("--out", synth_out, "output corpus file")->required();
  synth->add_option("--config", synth_config_file,
                    "JSON config file (overrides the flags below)");
  synth->add_option("--utts", synth_cfg.num_utterances, "number of utterances");
  synth->add_option("--mean-len", synth_cfg.mean_utt_len,
                    "mean utterance length in words");
  synth->add_option("--vocab", synth_cfg.vocab_size, "word-piece vocabulary size");
  synth->add_option("--sub-rate", synth_cfg.sub_rate, "substitution rate");
  synth->add_option("--ins-rate", synth_cfg.ins_rate, "insertion rate");
  synth->add_option("--del-rate", synth_cfg.del_rate, "deletion rate");
  synth->add_option("--overconf-rate", synth_cfg.overconf_rate,
                    "probability an erroneous token gets softmax_p in [0.9,1)");
  synth->add_option("--feature-dim", synth_cfg.feature_dim, "feature dimension");
  synth->add_option("--informativeness", synth_cfg.feature_informativeness,
                    "signal/noise mixing weight in [0,1]");
  synth->add_option("--nbest", synth_cfg.nbest_width, "hypotheses per utterance");
  synth->add_flag("--lm", synth_cfg.lm_feature, "emit LM log-probabilities");
  synth->add_option("--seed", synth_cfg.seed, "random seed");

  // align
  std::string align_corpus, align_out;
  auto* align = app.add_subcommand("align", "alignment/target diagnostics and WER");
  align->add_option("--corpus", align_corpus, "corpus file")->required();
  align->add_option("--out", align_out, "alignment table output")->required();

  // train-cem
  TrainConfig train_cfg;
  std::string train_corpus, train_out;
  auto* train = app.add_subcommand("train-cem", "train the confidence head");
  train->add_option("--corpus", train_corpus, "training corpus")->required();
  train->add_option("--out", train_out, "model output file")->required();
  train->add_option("--steps", train_cfg.steps, "update steps");
  train->add_option("--lr", train_cfg.learning_rate, "learning rate");
  train->add_option("--batch", train_cfg.batch_size, "utterances per step");
  train->add_option("--seed", train_cfg.seed, "random seed");

  // score
  std::string score_corpus_path, score_model, score_out;
  auto* score = app.add_subcommand("score", "attach cem_p to every token");
  score->add_option("--corpus", score_corpus_path, "corpus file")->required();
  score->add_option("--cem-model", score_model, "trained model file")->required();
  score->add_option("--out", score_out, "scored corpus output")->required();

  // calibrate
  std::string cal_corpus, cal_scorer = "cem", cal_level = "token", cal_out;
  int cal_bins = 20;
  auto* cal = app.add_subcommand("calibrate", "fit a PWLM on a dev corpus");
  cal->add_option("--corpus", cal_corpus, "dev corpus (scored)")->required();
  cal->add_option("--scorer", cal_scorer, "softmax|cem");
  cal->add_option("--level", cal_level, "token|word");
  cal->add_option("--bins", cal_bins, "equal-population bins");
  cal->add_option("--out", cal_out, "PWLM output file")->required();

  // eval
  std::string eval_corpus, eval_dev, eval_model, eval_out;
  int eval_bins = 20;
  auto* eval = app.add_subcommand("eval", "softmax-vs-CEM evaluation report");
  eval->add_option("--corpus", eval_corpus, "evaluation corpus")->required();
  eval->add_option("--dev", eval_dev, "dev corpus for PWLM fitting")->required();
  eval->add_option("--cem-model", eval_model,
                   "model file (omit if corpora are already scored)");
  eval->add_option("--bins", eval_bins, "equal-population bins");
  eval->add_option("--out", eval_out, "output directory")->required();

  // filter-curve
  std::string fc_corpus, fc_scorer = "cem", fc_level = "token", fc_thresholds,
              fc_out;
  auto* fc = app.add_subcommand("filter-curve",
                                "WER of threshold-filtered utterance subsets");
  fc->add_option("--corpus", fc_corpus, "scored corpus")->required();
  fc->add_option("--scorer", fc_scorer, "softmax|cem");
  fc->add_option("--level", fc_level,
                 "token|word utterance confidence aggregation");
  fc->add_option("--thresholds", fc_thresholds,
                 "comma-separated ascending thresholds")->required();
  fc->add_option("--out", fc_out, "curve output file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return run_synth(synth_cfg, synth_config_file, synth_out);
    if (align->parsed()) return run_align(align_corpus, align_out);
    if (train->parsed()) return run_train(train_corpus, train_cfg, train_out);
    if (score->parsed()) return run_score(score_corpus_path, score_model, score_out);
    if (cal->parsed()) {
      return run_calibrate(cal_corpus, cal_scorer, cal_level, cal_bins, cal_out);
    }
    if (eval->parsed()) {
      return run_eval(eval_corpus, eval_dev, eval_model, eval_bins, eval_out);
    }
    if (fc->parsed()) {
      return run_filter_curve(fc_corpus, fc_scorer, fc_level, fc_thresholds,
                              fc_out);
    }
  } catch (const Error& e) {
    std::cerr << "confkit: error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "confkit: unexpected error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
