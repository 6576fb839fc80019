#ifndef CONFKIT_AGGREGATE_HPP
#define CONFKIT_AGGREGATE_HPP

// Token-to-word and token-to-utterance confidence aggregation.

#include <span>
#include <string>
#include <vector>

#include "confkit/alignment.hpp"
#include "confkit/corpus.hpp"

namespace confkit {

struct WordConfidence {
  std::string word;
  double confidence = 0.0;
  std::size_t begin = 0;  // token span [begin, end)
  std::size_t end = 0;
};

// Groups tokens at word_begin boundaries; each word's confidence is the
// arithmetic mean of its tokens' scores.
std::vector<WordConfidence> word_confidences(std::span<const TokenRecord> tokens,
                                             Scorer scorer);

// Arithmetic mean of the token scores.
double utterance_confidence(std::span<const TokenRecord> tokens, Scorer scorer);

// Correctness labels from a word-level alignment: 1 per correct word,
// 0 per substituted/inserted word.
BinaryTargets word_targets(const Alignment& word_alignment,
                           std::size_t n_words);

}  // namespace confkit

#endif  // CONFKIT_AGGREGATE_HPP
