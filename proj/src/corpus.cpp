// corpus.cpp -- corpus / curve file parsing, validation and serialisation.

#include "confkit/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "confkit/error.hpp"

namespace confkit {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void fail_at(const std::string& file, std::size_t line,
                          const std::string& msg) {
  throw Error(file + ":" + std::to_string(line) + ": " + msg);
}

std::string fmt_value(double v) { return format_double(v, 9); }

// Invariant checks shared by the reader and the writer. `where` names the
// utterance / token for the error message.
void check_token(const CorpusHeader& header, const TokenRecord& t,
                 const std::string& where) {
  if (t.piece.empty()) {
    throw Error(where + ": empty piece");
  }
  if (!std::isfinite(t.softmax_p) || t.softmax_p < 0.0 || t.softmax_p > 1.0) {
    throw Error(where + ": softmax_p = " + fmt_value(t.softmax_p) +
                " outside [0, 1]");
  }
  if (t.lm_logp && (!std::isfinite(*t.lm_logp) || *t.lm_logp > 0.0)) {
    throw Error(where + ": lm_logp = " + fmt_value(*t.lm_logp) +
                " is not a log-probability (must be <= 0)");
  }
  if (header.has_lm_feature && !t.lm_logp) {
    throw Error(where + ": lm_logp missing but header has_lm_feature is true");
  }
  if (static_cast<int>(t.features.size()) != header.feature_dim) {
    throw Error(where + ": features has length " +
                std::to_string(t.features.size()) + ", header feature_dim is " +
                std::to_string(header.feature_dim));
  }
  for (double f : t.features) {
    if (!std::isfinite(f)) throw Error(where + ": non-finite feature value");
  }
  if (t.cem_p && (!std::isfinite(*t.cem_p) || *t.cem_p < 0.0 || *t.cem_p > 1.0)) {
    throw Error(where + ": cem_p = " + fmt_value(*t.cem_p) + " outside [0, 1]");
  }
}

void check_utterance(const CorpusHeader& header, const Utterance& u) {
  const std::string ctx = "utt '" + u.utt_id + "'";
  if (u.utt_id.empty()) throw Error("utterance with empty utt_id");
  if (!u.reference.empty() && !u.reference.front().word_begin) {
    throw Error(ctx + ": first reference token must have word_begin = true");
  }
  for (const RefToken& r : u.reference) {
    if (r.piece.empty()) throw Error(ctx + ": empty reference piece");
  }
  for (std::size_t h = 0; h < u.nbest.size(); ++h) {
    const Hypothesis& hyp = u.nbest[h];
    const std::string hctx = ctx + ", nbest[" + std::to_string(h) + "]";
    if (hyp.tokens.empty()) throw Error(hctx + ": empty token list");
    if (!hyp.tokens.front().word_begin) {
      throw Error(hctx + ": first token must have word_begin = true");
    }
    if (hyp.total_logp && !std::isfinite(*hyp.total_logp)) {
      throw Error(hctx + ": non-finite total_logp");
    }
    for (std::size_t t = 0; t < hyp.tokens.size(); ++t) {
      check_token(header, hyp.tokens[t],
                  hctx + ".tokens[" + std::to_string(t) + "]");
    }
  }
}

// ---- JSON shape helpers -------------------------------------------------

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* key : allowed) {
      if (item.key() == key) { ok = true; break; }
    }
    if (!ok) throw Error(where + ": unknown field '" + item.key() + "'");
  }
}

const json& need(const json& j, const char* key, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) throw Error(where + ": missing field '" + key + "'");
  return *it;
}

double as_number(const json& j, const char* key, const std::string& where) {
  if (!j.is_number()) throw Error(where + ": field '" + key + "' must be a number");
  return j.get<double>();
}

bool as_bool(const json& j, const char* key, const std::string& where) {
  if (!j.is_boolean()) throw Error(where + ": field '" + key + "' must be a boolean");
  return j.get<bool>();
}

std::string as_string(const json& j, const char* key, const std::string& where) {
  if (!j.is_string()) throw Error(where + ": field '" + key + "' must be a string");
  return j.get<std::string>();
}

TokenRecord parse_token(const json& j, const std::string& where) {
  if (!j.is_object()) throw Error(where + ": token must be an object");
  check_keys(j, {"piece", "word_begin", "softmax_p", "lm_logp", "features",
                 "cem_p", "oracle_correct"}, where);
  TokenRecord t;
  t.piece = as_string(need(j, "piece", where), "piece", where);
  t.word_begin = as_bool(need(j, "word_begin", where), "word_begin", where);
  t.softmax_p = as_number(need(j, "softmax_p", where), "softmax_p", where);
  if (auto it = j.find("lm_logp"); it != j.end()) {
    t.lm_logp = as_number(*it, "lm_logp", where);
  }
  const json& feats = need(j, "features", where);
  if (!feats.is_array()) throw Error(where + ": field 'features' must be an array");
  t.features.reserve(feats.size());
  for (const json& f : feats) {
    if (!f.is_number()) throw Error(where + ": features must all be numbers");
    t.features.push_back(f.get<double>());
  }
  if (auto it = j.find("cem_p"); it != j.end()) {
    t.cem_p = as_number(*it, "cem_p", where);
  }
  if (auto it = j.find("oracle_correct"); it != j.end()) {
    t.oracle_correct = as_bool(*it, "oracle_correct", where);
  }
  return t;
}

Utterance parse_utterance(const json& j) {
  if (!j.is_object()) throw Error("utterance line must be a JSON object");
  std::string where = "utt";
  check_keys(j, {"utt_id", "reference", "nbest"}, where);
  Utterance u;
  u.utt_id = as_string(need(j, "utt_id", where), "utt_id", where);
  where = "utt '" + u.utt_id + "'";

  const json& ref = need(j, "reference", where);
  if (!ref.is_array()) throw Error(where + ": field 'reference' must be an array");
  for (const json& r : ref) {
    if (!r.is_object()) throw Error(where + ": reference entries must be objects");
    check_keys(r, {"piece", "word_begin"}, where + ".reference");
    RefToken rt;
    rt.piece = as_string(need(r, "piece", where), "piece", where);
    rt.word_begin = as_bool(need(r, "word_begin", where), "word_begin", where);
    u.reference.push_back(std::move(rt));
  }

  const json& nbest = need(j, "nbest", where);
  if (!nbest.is_array()) throw Error(where + ": field 'nbest' must be an array");
  for (std::size_t h = 0; h < nbest.size(); ++h) {
    const json& hj = nbest[h];
    const std::string hctx = where + ", nbest[" + std::to_string(h) + "]";
    if (!hj.is_object()) throw Error(hctx + ": hypothesis must be an object");
    check_keys(hj, {"total_logp", "tokens"}, hctx);
    Hypothesis hyp;
    if (auto it = hj.find("total_logp"); it != hj.end()) {
      hyp.total_logp = as_number(*it, "total_logp", hctx);
    }
    const json& toks = need(hj, "tokens", hctx);
    if (!toks.is_array()) throw Error(hctx + ": field 'tokens' must be an array");
    for (std::size_t t = 0; t < toks.size(); ++t) {
      hyp.tokens.push_back(
          parse_token(toks[t], hctx + ".tokens[" + std::to_string(t) + "]"));
    }
    u.nbest.push_back(std::move(hyp));
  }
  return u;
}

json token_to_json(const TokenRecord& t) {
  json j;
  j["piece"] = t.piece;
  j["word_begin"] = t.word_begin;
  j["softmax_p"] = t.softmax_p;
  if (t.lm_logp) j["lm_logp"] = *t.lm_logp;
  j["features"] = t.features;
  if (t.cem_p) j["cem_p"] = *t.cem_p;
  if (t.oracle_correct) j["oracle_correct"] = *t.oracle_correct;
  return j;
}

json utterance_to_json(const Utterance& u) {
  json j;
  j["utt_id"] = u.utt_id;
  json ref = json::array();
  for (const RefToken& r : u.reference) {
    json rj;
    rj["piece"] = r.piece;
    rj["word_begin"] = r.word_begin;
    ref.push_back(std::move(rj));
  }
  j["reference"] = std::move(ref);
  json nbest = json::array();
  for (const Hypothesis& h : u.nbest) {
    json hj;
    if (h.total_logp) hj["total_logp"] = *h.total_logp;
    json toks = json::array();
    for (const TokenRecord& t : h.tokens) toks.push_back(token_to_json(t));
    hj["tokens"] = std::move(toks);
    nbest.push_back(std::move(hj));
  }
  j["nbest"] = std::move(nbest);
  return j;
}

}  // namespace

const char* scorer_name(Scorer s) {
  return s == Scorer::Softmax ? "softmax" : "cem";
}

double token_score(const TokenRecord& token, Scorer scorer) {
  if (scorer == Scorer::Softmax) return token.softmax_p;
  if (!token.cem_p) {
    throw Error("token '" + token.piece +
                "' has no cem_p score; run scoring first");
  }
  return *token.cem_p;
}

void validate(const Corpus& corpus) {
  if (corpus.header.feature_dim < 1) {
    throw Error("header: feature_dim must be >= 1");
  }
  std::vector<std::string> seen;
  for (const Utterance& u : corpus.utterances) {
    check_utterance(corpus.header, u);
    seen.push_back(u.utt_id);
  }
  std::sort(seen.begin(), seen.end());
  for (std::size_t i = 1; i < seen.size(); ++i) {
    if (seen[i] == seen[i - 1]) {
      throw Error("duplicate utt_id '" + seen[i] + "'");
    }
  }
}

Corpus read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open corpus file " + path.string());
  const std::string fname = path.string();

  Corpus corpus;
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> ids;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      fail_at(fname, lineno, std::string("malformed JSON: ") + e.what());
    }
    try {
      if (lineno == 1) {
        if (!j.is_object()) throw Error("header line must be a JSON object");
        check_keys(j, {"feature_dim", "has_lm_feature", "note"}, "header");
        const json& fd = need(j, "feature_dim", "header");
        if (!fd.is_number_integer() || fd.get<long>() < 1) {
          throw Error("header: feature_dim must be a positive integer");
        }
        corpus.header.feature_dim = fd.get<int>();
        corpus.header.has_lm_feature =
            as_bool(need(j, "has_lm_feature", "header"), "has_lm_feature",
                    "header");
        if (auto it = j.find("note"); it != j.end()) {
          corpus.header.note = as_string(*it, "note", "header");
        }
      } else {
        Utterance u = parse_utterance(j);
        check_utterance(corpus.header, u);
        ids.push_back(u.utt_id);
        corpus.utterances.push_back(std::move(u));
      }
    } catch (const Error& e) {
      fail_at(fname, lineno, e.what());
    }
  }
  if (lineno == 0) throw Error(fname + ": empty file, missing header line");

  std::sort(ids.begin(), ids.end());
  for (std::size_t i = 1; i < ids.size(); ++i) {
    if (ids[i] == ids[i - 1]) {
      throw Error(fname + ": duplicate utt_id '" + ids[i] + "'");
    }
  }
  return corpus;
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  validate(corpus);
  std::ostringstream out;
  json header;
  header["feature_dim"] = corpus.header.feature_dim;
  header["has_lm_feature"] = corpus.header.has_lm_feature;
  if (!corpus.header.note.empty()) header["note"] = corpus.header.note;
  out << header.dump() << '\n';
  for (const Utterance& u : corpus.utterances) {
    out << utterance_to_json(u).dump() << '\n';
  }
  atomic_write_text(path, out.str());
}

void write_curve(std::span<const CurvePoint> points,
                 const std::filesystem::path& path) {
  std::ostringstream out;
  out << "x,y,n\n";
  const CurvePoint* prev = nullptr;
  for (const CurvePoint& p : points) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw Error("write_curve: non-finite point");
    }
    if (prev && p.x < prev->x) {
      throw Error("write_curve: points not ordered by x");
    }
    prev = &p;
    out << format_double(p.x, 9) << ',' << format_double(p.y, 9) << ',' << p.n
        << '\n';
  }
  atomic_write_text(path, out.str());
}

void write_pr_curve(const PrCurve& curve, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "threshold,precision,recall,tp,fp,fn\n";
  for (const PrPoint& p : curve.points) {
    out << format_double(p.threshold, 9) << ',' << format_double(p.precision, 9)
        << ',' << format_double(p.recall, 9) << ',' << p.tp << ',' << p.fp
        << ',' << p.fn << '\n';
  }
  atomic_write_text(path, out.str());
}

std::string format_double(double v, int min_digits) {
  char buf[64];
  for (int digits = min_digits; digits <= 17; ++digits) {
    std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
    if (std::strtod(buf, nullptr) == v) return buf;
  }
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void atomic_write_text(const std::filesystem::path& path,
                       const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      std::filesystem::remove(tmp, ec);
      throw Error("failed while writing " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error("cannot move temporary file onto " + path.string());
  }
}

}  // namespace confkit
