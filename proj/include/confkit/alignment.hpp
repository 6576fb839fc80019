#ifndef CONFKIT_ALIGNMENT_HPP
#define CONFKIT_ALIGNMENT_HPP

// Levenshtein alignment between reference and hypothesis token sequences,
// binary confidence targets, and word-error-rate accounting.

#include <span>
#include <string>
#include <vector>

namespace confkit {

enum class EditKind { Match, Substitute, Insert, Delete };

// One step of an alignment. ref_index is set for Match/Substitute/Delete,
// hyp_index for Match/Substitute/Insert; -1 means "no token on that side".
struct AlignOp {
  EditKind kind = EditKind::Match;
  int ref_index = -1;
  int hyp_index = -1;

  bool operator==(const AlignOp&) const = default;
};

struct Alignment {
  std::vector<AlignOp> ops;
  int distance = 0;  // number of non-Match ops
};

// Per-hypothesis-token correctness labels, 1 = correct.
using BinaryTargets = std::vector<int>;

struct WerBreakdown {
  long substitutions = 0;
  long deletions = 0;
  long insertions = 0;
  long ref_len = 0;
  double wer = 0.0;
};

// Minimum unit-cost edit alignment replaying ref into hyp. Backtrace
// tie-breaking prefers Match/Substitute over Delete over Insert so that
// targets are deterministic across runs.
Alignment levenshtein_align(std::span<const std::string> ref,
                            std::span<const std::string> hyp);

// 1 per Match, 0 per Substitute/Insert; Delete ops contribute no entry.
// Throws if the alignment does not cover hyp indices 0..hyp_len-1.
BinaryTargets targets_from_alignment(const Alignment& alignment,
                                     std::size_t hyp_len);

// (S+D+I)/ref_len from a minimum-distance word alignment. Empty ref throws.
WerBreakdown word_error_rate(std::span<const std::string> ref_words,
                             std::span<const std::string> hyp_words);

// Joins word pieces into words; word_begin[i] marks the first piece of a
// word. The first flag must be true.
std::vector<std::string> tokens_to_words(std::span<const std::string> pieces,
                                         std::span<const char> word_begin);

}  // namespace confkit

#endif  // CONFKIT_ALIGNMENT_HPP
