// model_io.cpp -- text serialisation of CEM and PWLM models.

#include "confkit/model_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "confkit/corpus.hpp"
#include "confkit/error.hpp"

namespace confkit {

namespace {

std::string fmt(double v) { return format_double(v, 17); }

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file " + path.string());
  return in;
}

void expect_word(std::istream& in, const std::string& expected,
                 const std::filesystem::path& path) {
  std::string word;
  if (!(in >> word) || word != expected) {
    throw Error(path.string() + ": expected '" + expected + "', got '" + word +
                "'");
  }
}

long read_count(std::istream& in, const char* what,
                const std::filesystem::path& path) {
  long n = 0;
  if (!(in >> n) || n < 0) {
    throw Error(path.string() + ": bad " + std::string(what));
  }
  return n;
}

double read_value(std::istream& in, const std::filesystem::path& path) {
  double v = 0.0;
  if (!(in >> v) || !std::isfinite(v)) {
    throw Error(path.string() + ": bad or non-finite value");
  }
  return v;
}

}  // namespace

void write_cem_model(const CemModel& model,
                     const std::filesystem::path& path) {
  if (model.w1.rows() != model.b1.size() || model.w1.rows() != model.w2.size()) {
    throw Error("write_cem_model: inconsistent model dimensions");
  }
  if (!model.w1.allFinite() || !model.b1.allFinite() ||
      !model.w2.allFinite() || !std::isfinite(model.b2)) {
    throw Error("write_cem_model: non-finite weights");
  }
  std::ostringstream out;
  out << "confkit-cem 1\n";
  out << "input_dim " << model.input_dim() << '\n';
  out << "hidden " << model.hidden_dim() << '\n';
  out << "W1\n";
  for (Eigen::Index r = 0; r < model.w1.rows(); ++r) {
    for (Eigen::Index c = 0; c < model.w1.cols(); ++c) {
      out << (c ? " " : "") << fmt(model.w1(r, c));
    }
    out << '\n';
  }
  out << "b1\n";
  for (Eigen::Index i = 0; i < model.b1.size(); ++i) {
    out << (i ? " " : "") << fmt(model.b1(i));
  }
  out << "\nw2\n";
  for (Eigen::Index i = 0; i < model.w2.size(); ++i) {
    out << (i ? " " : "") << fmt(model.w2(i));
  }
  out << "\nb2\n" << fmt(model.b2) << '\n';
  atomic_write_text(path, out.str());
}

CemModel read_cem_model(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  expect_word(in, "confkit-cem", path);
  expect_word(in, "1", path);
  expect_word(in, "input_dim", path);
  const long input_dim = read_count(in, "input_dim", path);
  expect_word(in, "hidden", path);
  const long hidden = read_count(in, "hidden", path);
  if (input_dim < 1 || hidden < 1) {
    throw Error(path.string() + ": dimensions must be positive");
  }
  CemModel model;
  model.w1.resize(hidden, input_dim);
  model.b1.resize(hidden);
  model.w2.resize(hidden);
  expect_word(in, "W1", path);
  for (Eigen::Index r = 0; r < hidden; ++r) {
    for (Eigen::Index c = 0; c < input_dim; ++c) {
      model.w1(r, c) = read_value(in, path);
    }
  }
  expect_word(in, "b1", path);
  for (Eigen::Index i = 0; i < hidden; ++i) model.b1(i) = read_value(in, path);
  expect_word(in, "w2", path);
  for (Eigen::Index i = 0; i < hidden; ++i) model.w2(i) = read_value(in, path);
  expect_word(in, "b2", path);
  model.b2 = read_value(in, path);
  return model;
}

void write_pwlm(const Pwlm& mapping, const std::filesystem::path& path) {
  validate(mapping);
  std::ostringstream out;
  out << "confkit-pwlm 1\n";
  out << "knots " << mapping.knots.size() << '\n';
  for (const PwlmKnot& k : mapping.knots) {
    out << fmt(k.x) << ' ' << fmt(k.y) << '\n';
  }
  atomic_write_text(path, out.str());
}

Pwlm read_pwlm(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  expect_word(in, "confkit-pwlm", path);
  expect_word(in, "1", path);
  expect_word(in, "knots", path);
  const long count = read_count(in, "knot count", path);
  Pwlm mapping;
  mapping.knots.reserve(count);
  for (long i = 0; i < count; ++i) {
    const double x = read_value(in, path);
    const double y = read_value(in, path);
    mapping.knots.push_back({x, y});
  }
  validate(mapping);
  return mapping;
}

}  // namespace confkit
