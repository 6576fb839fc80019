// cem.cpp -- confidence head forward/backward, training, corpus scoring.

#include "confkit/cem.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "confkit/error.hpp"
#include "confkit/metrics.hpp"

namespace confkit {

namespace {

// Largest double below 1; keeps forward outputs strictly inside (0,1).
const double kMaxP = std::nextafter(1.0, 0.0);
const double kMinP = std::numeric_limits<double>::min();

double sigmoid(double z) {
  double p;
  if (z >= 0.0) {
    p = 1.0 / (1.0 + std::exp(-z));
  } else {
    const double e = std::exp(z);
    p = e / (1.0 + e);
  }
  return std::clamp(p, kMinP, kMaxP);
}

void check_example(const CemModel& model, const CemTrainingExample& ex) {
  for (const auto& hyp : ex.hyps) {
    if (hyp.inputs.rows() != model.input_dim()) {
      throw Error("cem: example input dimension " +
                  std::to_string(hyp.inputs.rows()) + " does not match model " +
                  std::to_string(model.input_dim()));
    }
    if (hyp.inputs.cols() != static_cast<Eigen::Index>(hyp.targets.size())) {
      throw Error("cem: hypothesis inputs/targets length mismatch");
    }
    if (hyp.targets.empty()) {
      throw Error("cem: hypothesis with no tokens");
    }
  }
}

// Flattened batch: one column per token across all utterances/hypotheses,
// with per-token loss weights 1/(T_hyp * num_utterances).
struct Packed {
  Eigen::MatrixXd inputs;
  Eigen::VectorXd targets;
  Eigen::VectorXd weights;
};

Packed pack(const CemModel& model,
            std::span<const CemTrainingExample* const> batch) {
  Eigen::Index total = 0;
  for (const CemTrainingExample* ex : batch) {
    check_example(model, *ex);
    for (const auto& hyp : ex->hyps) total += hyp.inputs.cols();
  }
  Packed p;
  p.inputs.resize(model.input_dim(), total);
  p.targets.resize(total);
  p.weights.resize(total);
  const double inv_utts = 1.0 / static_cast<double>(batch.size());
  Eigen::Index col = 0;
  for (const CemTrainingExample* ex : batch) {
    for (const auto& hyp : ex->hyps) {
      const double w = inv_utts / static_cast<double>(hyp.targets.size());
      for (Eigen::Index t = 0; t < hyp.inputs.cols(); ++t, ++col) {
        p.inputs.col(col) = hyp.inputs.col(t);
        p.targets(col) = hyp.targets[t];
        p.weights(col) = w;
      }
    }
  }
  return p;
}

std::vector<const CemTrainingExample*> to_pointers(
    std::span<const CemTrainingExample> batch) {
  std::vector<const CemTrainingExample*> ptrs;
  ptrs.reserve(batch.size());
  for (const auto& ex : batch) ptrs.push_back(&ex);
  return ptrs;
}

CemLossGrad loss_grad_packed(const CemModel& model, const Packed& packed) {
  const Eigen::Index t_total = packed.inputs.cols();

  Eigen::MatrixXd z1 = model.w1 * packed.inputs;
  z1.colwise() += model.b1;
  const Eigen::MatrixXd h = z1.cwiseMax(0.0);
  Eigen::VectorXd z2 = h.transpose() * model.w2;
  z2.array() += model.b2;

  CemLossGrad out;
  Eigen::VectorXd dz2(t_total);
  for (Eigen::Index t = 0; t < t_total; ++t) {
    const double p = sigmoid(z2(t));
    const double pc = std::clamp(p, kLogClamp, 1.0 - kLogClamp);
    const double c = packed.targets(t);
    out.loss += packed.weights(t) *
                (c > 0.5 ? -std::log(pc) : -std::log1p(-pc));
    // Derivative of the clamped loss: zero once p saturates past the clamp.
    const bool clamped = p <= kLogClamp || p >= 1.0 - kLogClamp;
    dz2(t) = clamped ? 0.0 : packed.weights(t) * (p - c);
  }

  out.grad.w2 = h * dz2;
  out.grad.b2 = dz2.sum();
  const Eigen::MatrixXd dh = model.w2 * dz2.transpose();  // hidden x T
  // relu gate (derivative taken as 0 at exactly z1 == 0)
  const Eigen::MatrixXd dz1 =
      ((z1.array() > 0.0).cast<double>() * dh.array()).matrix();
  out.grad.w1 = dz1 * packed.inputs.transpose();
  out.grad.b1 = dz1.rowwise().sum();
  return out;
}

}  // namespace

double cem_forward(const CemModel& model, const Eigen::VectorXd& input) {
  if (input.size() != model.input_dim()) {
    throw Error("cem_forward: input dimension " + std::to_string(input.size()) +
                " does not match model " + std::to_string(model.input_dim()));
  }
  const Eigen::VectorXd h = (model.w1 * input + model.b1).cwiseMax(0.0);
  return sigmoid(model.w2.dot(h) + model.b2);
}

Eigen::VectorXd cem_forward_batch(const CemModel& model,
                                  const Eigen::MatrixXd& inputs) {
  if (inputs.rows() != model.input_dim()) {
    throw Error("cem_forward_batch: input dimension mismatch");
  }
  Eigen::MatrixXd z1 = model.w1 * inputs;
  z1.colwise() += model.b1;
  Eigen::VectorXd z2 = z1.cwiseMax(0.0).transpose() * model.w2;
  z2.array() += model.b2;
  for (Eigen::Index t = 0; t < z2.size(); ++t) z2(t) = sigmoid(z2(t));
  return z2;
}

CemLossGrad cem_loss_and_grad(const CemModel& model,
                              std::span<const CemTrainingExample> batch) {
  if (batch.empty()) throw Error("cem_loss_and_grad: empty batch");
  return loss_grad_packed(model, pack(model, to_pointers(batch)));
}

TrainResult train_cem(std::span<const CemTrainingExample> data,
                      const TrainConfig& cfg) {
  if (data.empty()) throw Error("train_cem: no training examples");
  if (cfg.learning_rate <= 0.0) throw Error("train_cem: learning_rate must be > 0");
  if (cfg.steps < 0) throw Error("train_cem: negative step count");
  if (cfg.batch_size < 1) throw Error("train_cem: batch_size must be >= 1");
  const Eigen::Index input_dim = data.front().hyps.empty()
                                     ? 0
                                     : data.front().hyps.front().inputs.rows();
  if (input_dim < 1) throw Error("train_cem: first example has no tokens");

  std::mt19937_64 rng(cfg.seed);

  CemModel model;
  model.w1.resize(kCemHiddenUnits, input_dim);
  model.b1 = Eigen::VectorXd::Zero(kCemHiddenUnits);
  model.w2.resize(kCemHiddenUnits);
  model.b2 = 0.0;
  {
    const double s1 = cfg.init_scale > 0.0
                          ? cfg.init_scale
                          : 1.0 / std::sqrt(static_cast<double>(input_dim));
    std::uniform_real_distribution<double> u1(-s1, s1);
    for (Eigen::Index r = 0; r < model.w1.rows(); ++r) {
      for (Eigen::Index c = 0; c < model.w1.cols(); ++c) model.w1(r, c) = u1(rng);
    }
    const double s2 =
        cfg.init_scale > 0.0
            ? cfg.init_scale
            : 1.0 / std::sqrt(static_cast<double>(kCemHiddenUnits));
    std::uniform_real_distribution<double> u2(-s2, s2);
    for (Eigen::Index i = 0; i < model.w2.size(); ++i) model.w2(i) = u2(rng);
  }

  TrainResult result;
  result.initial_loss = cem_loss_and_grad(model, data).loss;

  // Adam state
  CemGradients m{Eigen::MatrixXd::Zero(kCemHiddenUnits, input_dim),
                 Eigen::VectorXd::Zero(kCemHiddenUnits),
                 Eigen::VectorXd::Zero(kCemHiddenUnits), 0.0};
  CemGradients v = m;

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t cursor = order.size();  // forces a shuffle on the first step

  std::vector<const CemTrainingExample*> batch;
  for (long step = 1; step <= cfg.steps; ++step) {
    batch.clear();
    for (long b = 0; b < cfg.batch_size && b < static_cast<long>(data.size());
         ++b) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        cursor = 0;
      }
      batch.push_back(&data[order[cursor++]]);
    }
    const CemLossGrad lg = loss_grad_packed(model, pack(model, batch));

    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
    auto adam = [&](auto& param, auto& m_s, auto& v_s, const auto& g) {
      m_s = cfg.beta1 * m_s + (1.0 - cfg.beta1) * g;
      v_s = cfg.beta2 * v_s + (1.0 - cfg.beta2) * g.cwiseProduct(g);
      param.array() -= cfg.learning_rate * (m_s.array() / bc1) /
                       ((v_s.array() / bc2).sqrt() + cfg.epsilon);
    };
    adam(model.w1, m.w1, v.w1, lg.grad.w1);
    adam(model.b1, m.b1, v.b1, lg.grad.b1);
    adam(model.w2, m.w2, v.w2, lg.grad.w2);
    m.b2 = cfg.beta1 * m.b2 + (1.0 - cfg.beta1) * lg.grad.b2;
    v.b2 = cfg.beta2 * v.b2 + (1.0 - cfg.beta2) * lg.grad.b2 * lg.grad.b2;
    model.b2 -= cfg.learning_rate * (m.b2 / bc1) /
                (std::sqrt(v.b2 / bc2) + cfg.epsilon);
  }

  if (!model.w1.allFinite() || !model.b1.allFinite() ||
      !model.w2.allFinite() || !std::isfinite(model.b2)) {
    throw Error("train_cem: training diverged to non-finite weights");
  }
  result.final_loss =
      cfg.steps == 0 ? result.initial_loss : cem_loss_and_grad(model, data).loss;
  result.model = std::move(model);
  return result;
}

Eigen::Index cem_input_dim(const CorpusHeader& header) {
  return header.feature_dim + (header.has_lm_feature ? 1 : 0);
}

Eigen::VectorXd assemble_input(const CorpusHeader& header,
                               const TokenRecord& token) {
  Eigen::VectorXd x(cem_input_dim(header));
  for (std::size_t i = 0; i < token.features.size(); ++i) {
    x(static_cast<Eigen::Index>(i)) = token.features[i];
  }
  if (header.has_lm_feature) {
    if (!token.lm_logp) {
      throw Error("token '" + token.piece +
                  "' lacks lm_logp required by the corpus header");
    }
    x(x.size() - 1) = std::exp(*token.lm_logp);
  }
  return x;
}

std::vector<CemTrainingExample> make_training_examples(const Corpus& corpus) {
  std::vector<CemTrainingExample> examples;
  examples.reserve(corpus.utterances.size());
  for (const Utterance& u : corpus.utterances) {
    if (u.reference.empty()) {
      throw Error("utt '" + u.utt_id + "': no reference, cannot build targets");
    }
    if (u.nbest.empty()) {
      throw Error("utt '" + u.utt_id + "': no hypotheses");
    }
    std::vector<std::string> ref_pieces;
    ref_pieces.reserve(u.reference.size());
    for (const RefToken& r : u.reference) ref_pieces.push_back(r.piece);

    CemTrainingExample ex;
    for (const Hypothesis& hyp : u.nbest) {
      std::vector<std::string> hyp_pieces;
      hyp_pieces.reserve(hyp.tokens.size());
      for (const TokenRecord& t : hyp.tokens) hyp_pieces.push_back(t.piece);
      const Alignment a = levenshtein_align(ref_pieces, hyp_pieces);

      CemTrainingExample::Hyp h;
      h.targets = targets_from_alignment(a, hyp.tokens.size());
      h.inputs.resize(cem_input_dim(corpus.header),
                      static_cast<Eigen::Index>(hyp.tokens.size()));
      for (std::size_t t = 0; t < hyp.tokens.size(); ++t) {
        h.inputs.col(static_cast<Eigen::Index>(t)) =
            assemble_input(corpus.header, hyp.tokens[t]);
      }
      ex.hyps.push_back(std::move(h));
    }
    examples.push_back(std::move(ex));
  }
  return examples;
}

Corpus score_corpus(const CemModel& model, Corpus corpus) {
  if (cem_input_dim(corpus.header) != model.input_dim()) {
    throw Error("score_corpus: corpus implies input dimension " +
                std::to_string(cem_input_dim(corpus.header)) +
                " (feature_dim " + std::to_string(corpus.header.feature_dim) +
                (corpus.header.has_lm_feature ? " + LM feature" : "") +
                ") but model expects " + std::to_string(model.input_dim()));
  }
  for (Utterance& u : corpus.utterances) {
    for (Hypothesis& hyp : u.nbest) {
      Eigen::MatrixXd inputs(model.input_dim(),
                             static_cast<Eigen::Index>(hyp.tokens.size()));
      for (std::size_t t = 0; t < hyp.tokens.size(); ++t) {
        inputs.col(static_cast<Eigen::Index>(t)) =
            assemble_input(corpus.header, hyp.tokens[t]);
      }
      const Eigen::VectorXd p = cem_forward_batch(model, inputs);
      for (std::size_t t = 0; t < hyp.tokens.size(); ++t) {
        hyp.tokens[t].cem_p = p(static_cast<Eigen::Index>(t));
      }
    }
  }
  return corpus;
}

}  // namespace confkit
