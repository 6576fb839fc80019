// aggregate.cpp -- word/utterance confidence aggregation.

#include "confkit/aggregate.hpp"

#include "confkit/error.hpp"

namespace confkit {

std::vector<WordConfidence> word_confidences(
    std::span<const TokenRecord> tokens, Scorer scorer) {
  if (tokens.empty()) {
    throw Error("word_confidences: empty token list");
  }
  if (!tokens.front().word_begin) {
    throw Error("word_confidences: first token does not begin a word");
  }
  std::vector<WordConfidence> words;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].word_begin) {
      words.push_back({tokens[i].piece, 0.0, i, i + 1});
    } else {
      words.back().word += tokens[i].piece;
      words.back().end = i + 1;
    }
  }
  for (WordConfidence& w : words) {
    double sum = 0.0;
    for (std::size_t i = w.begin; i < w.end; ++i) {
      sum += token_score(tokens[i], scorer);
    }
    w.confidence = sum / static_cast<double>(w.end - w.begin);
  }
  return words;
}

double utterance_confidence(std::span<const TokenRecord> tokens,
                            Scorer scorer) {
  if (tokens.empty()) {
    throw Error("utterance_confidence: empty hypothesis");
  }
  double sum = 0.0;
  for (const TokenRecord& t : tokens) sum += token_score(t, scorer);
  return sum / static_cast<double>(tokens.size());
}

BinaryTargets word_targets(const Alignment& word_alignment,
                           std::size_t n_words) {
  return targets_from_alignment(word_alignment, n_words);
}

}  // namespace confkit
