#ifndef CONFKIT_CEM_HPP
#define CONFKIT_CEM_HPP

// Confidence estimation module: a small feed-forward head mapping per-token
// feature vectors to a confidence in (0,1), trained with binary
// cross-entropy against alignment targets over n-best hypotheses.

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "confkit/alignment.hpp"
#include "confkit/corpus.hpp"

namespace confkit {

// sigmoid(w2 . relu(W1 x + b1) + b2). Hidden width is 256 for trained
// models; hand-built models may use any consistent shape.
struct CemModel {
  Eigen::MatrixXd w1;  // hidden x input
  Eigen::VectorXd b1;  // hidden
  Eigen::VectorXd w2;  // hidden
  double b2 = 0.0;

  Eigen::Index input_dim() const { return w1.cols(); }
  Eigen::Index hidden_dim() const { return w1.rows(); }
};

inline constexpr Eigen::Index kCemHiddenUnits = 256;

struct CemGradients {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::VectorXd w2;
  double b2 = 0.0;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  long steps = 2000;
  long batch_size = 32;  // utterances per step
  unsigned long seed = 1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double init_scale = 0.0;  // <= 0 means 1/sqrt(fan_in) per layer
};

// All n-best hypotheses of one utterance: per-hypothesis token inputs
// (one column per token) and matching binary targets.
struct CemTrainingExample {
  struct Hyp {
    Eigen::MatrixXd inputs;  // input_dim x T
    BinaryTargets targets;   // length T
  };
  std::vector<Hyp> hyps;
};

struct CemLossGrad {
  double loss = 0.0;
  CemGradients grad;
};

struct TrainResult {
  CemModel model;
  double initial_loss = 0.0;  // full-batch loss of the initialised model
  double final_loss = 0.0;    // full-batch loss after the last step
};

// Forward pass for a single token. Output strictly inside (0,1).
double cem_forward(const CemModel& model, const Eigen::VectorXd& input);

// Forward pass over a column-per-token matrix.
Eigen::VectorXd cem_forward_batch(const CemModel& model,
                                  const Eigen::MatrixXd& inputs);

// Loss = mean over utterances of the per-utterance total, where each
// hypothesis contributes its token-mean binary cross-entropy and the
// utterance total sums over its n-best. Gradients are the exact analytic
// derivatives of that loss.
CemLossGrad cem_loss_and_grad(const CemModel& model,
                              std::span<const CemTrainingExample> batch);

// Seeded minibatch training with adaptive-moment updates; deterministic
// given the same data and config.
TrainResult train_cem(std::span<const CemTrainingExample> data,
                      const TrainConfig& cfg);

// Feature vector (+ linear LM probability exp(lm_logp) appended when the
// header declares it) as the model input for one token.
Eigen::VectorXd assemble_input(const CorpusHeader& header,
                               const TokenRecord& token);

// Model input width implied by a corpus header.
Eigen::Index cem_input_dim(const CorpusHeader& header);

// Alignment targets and assembled inputs for every n-best hypothesis of
// every utterance. Utterances must carry a reference.
std::vector<CemTrainingExample> make_training_examples(const Corpus& corpus);

// Attaches cem_p = forward(features) to every token of every hypothesis;
// softmax_p and features are left untouched.
Corpus score_corpus(const CemModel& model, Corpus corpus);

}  // namespace confkit

#endif  // CONFKIT_CEM_HPP
