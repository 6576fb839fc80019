// alignment.cpp -- edit-distance alignment, confidence targets, WER.

#include "confkit/alignment.hpp"

#include <algorithm>

#include "confkit/error.hpp"

namespace confkit {

Alignment levenshtein_align(std::span<const std::string> ref,
                            std::span<const std::string> hyp) {
  const std::size_t nr = ref.size();
  const std::size_t nh = hyp.size();

  // dist(i,j) = edit distance between ref[0..i) and hyp[0..j).
  std::vector<int> dist((nr + 1) * (nh + 1));
  auto at = [&](std::size_t i, std::size_t j) -> int& {
    return dist[i * (nh + 1) + j];
  };
  for (std::size_t i = 0; i <= nr; ++i) at(i, 0) = static_cast<int>(i);
  for (std::size_t j = 0; j <= nh; ++j) at(0, j) = static_cast<int>(j);
  for (std::size_t i = 1; i <= nr; ++i) {
    for (std::size_t j = 1; j <= nh; ++j) {
      const int diag = at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      const int del = at(i - 1, j) + 1;
      const int ins = at(i, j - 1) + 1;
      at(i, j) = std::min({diag, del, ins});
    }
  }

  // Backtrace. At equal cost prefer Match/Substitute, then Delete, then
  // Insert; this pins down one canonical alignment.
  Alignment out;
  out.distance = at(nr, nh);
  std::size_t i = nr, j = nh;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 &&
        at(i, j) == at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1)) {
      const bool match = ref[i - 1] == hyp[j - 1];
      out.ops.push_back({match ? EditKind::Match : EditKind::Substitute,
                         static_cast<int>(i - 1), static_cast<int>(j - 1)});
      --i;
      --j;
    } else if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      out.ops.push_back({EditKind::Delete, static_cast<int>(i - 1), -1});
      --i;
    } else {
      out.ops.push_back({EditKind::Insert, -1, static_cast<int>(j - 1)});
      --j;
    }
  }
  std::reverse(out.ops.begin(), out.ops.end());
  return out;
}

BinaryTargets targets_from_alignment(const Alignment& alignment,
                                     std::size_t hyp_len) {
  BinaryTargets targets;
  targets.reserve(hyp_len);
  int next_hyp = 0;
  for (const AlignOp& op : alignment.ops) {
    if (op.kind == EditKind::Delete) continue;
    if (op.hyp_index != next_hyp) {
      throw Error("targets_from_alignment: alignment does not walk hypothesis "
                  "positions in order (got index " +
                  std::to_string(op.hyp_index) + ", expected " +
                  std::to_string(next_hyp) + ")");
    }
    ++next_hyp;
    targets.push_back(op.kind == EditKind::Match ? 1 : 0);
  }
  if (targets.size() != hyp_len) {
    throw Error("targets_from_alignment: alignment covers " +
                std::to_string(targets.size()) + " hypothesis tokens, but " +
                std::to_string(hyp_len) + " were expected");
  }
  return targets;
}

WerBreakdown word_error_rate(std::span<const std::string> ref_words,
                             std::span<const std::string> hyp_words) {
  if (ref_words.empty()) {
    throw Error("word_error_rate: empty reference, WER undefined");
  }
  const Alignment a = levenshtein_align(ref_words, hyp_words);
  WerBreakdown w;
  w.ref_len = static_cast<long>(ref_words.size());
  for (const AlignOp& op : a.ops) {
    switch (op.kind) {
      case EditKind::Substitute: ++w.substitutions; break;
      case EditKind::Delete: ++w.deletions; break;
      case EditKind::Insert: ++w.insertions; break;
      case EditKind::Match: break;
    }
  }
  w.wer = static_cast<double>(w.substitutions + w.deletions + w.insertions) /
          static_cast<double>(w.ref_len);
  return w;
}

std::vector<std::string> tokens_to_words(std::span<const std::string> pieces,
                                         std::span<const char> word_begin) {
  if (pieces.size() != word_begin.size()) {
    throw Error("tokens_to_words: pieces/flags length mismatch");
  }
  if (pieces.empty()) return {};
  if (!word_begin[0]) {
    throw Error("tokens_to_words: first token does not begin a word");
  }
  std::vector<std::string> words;
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    if (word_begin[i]) {
      words.push_back(pieces[i]);
    } else {
      words.back() += pieces[i];
    }
  }
  return words;
}

}  // namespace confkit
