#ifndef CONFKIT_MODEL_IO_HPP
#define CONFKIT_MODEL_IO_HPP

// Versioned structured-text files for trained models.
//
//   confkit-cem 1          confkit-pwlm 1
//   input_dim D            knots K
//   hidden H               <x> <y>        (one knot per line)
//   W1                     ...
//   <row 0: D values>
//   ...
//   b1 / w2 / b2 sections
//
// Values are written with enough digits to parse back bit-exactly.

#include <filesystem>

#include "confkit/calibration.hpp"
#include "confkit/cem.hpp"

namespace confkit {

void write_cem_model(const CemModel& model, const std::filesystem::path& path);
CemModel read_cem_model(const std::filesystem::path& path);

void write_pwlm(const Pwlm& mapping, const std::filesystem::path& path);
Pwlm read_pwlm(const std::filesystem::path& path);

}  // namespace confkit

#endif  // CONFKIT_MODEL_IO_HPP
