#pragma once

// Text formats: models, coverings, assignments, Gram states and PGM images.
//
//   graphmodel v1          regions v1          gramstate v1
//   n <count>              r <i> <j> [...]     n <count> rank <r> pairs <m>
//   v <i> <theta>                              p <i> <j>        (m lines)
//   e <i> <j> <theta>                          <r reals>        (one line per Gram index)
//
// '#' starts a comment. Reals are written with 17 significant digits.

#include <iosfwd>
#include <string>

#include "psos/model.hpp"
#include "psos/sdp.hpp"

namespace psos {

void write_model(std::ostream& out, const GraphModel& model);
GraphModel read_model(std::istream& in);

void write_covering(std::ostream& out, const RegionCovering& cov);
RegionCovering read_covering(std::istream& in);

/// One line of space-separated +1/-1 values.
void write_assignment(std::ostream& out, const Assignment& x);
Assignment read_assignment(std::istream& in);

/// Vectors only; multipliers are not stored.
void write_gram_state(std::ostream& out, const GramState& state);
GramState read_gram_state(std::istream& in);

/// P2 or P5 with maxval <= 255; gray >= 128 reads as +1.
BinaryImage read_pgm(std::istream& in);
/// Always P2, +1 as 255 and -1 as 0.
void write_pgm(std::ostream& out, const BinaryImage& image);

std::string format_real(double value);

// File wrappers; failures to open raise psos::Error.
GraphModel read_model_file(const std::string& path);
void write_model_file(const std::string& path, const GraphModel& model);
RegionCovering read_covering_file(const std::string& path);
Assignment read_assignment_file(const std::string& path);
void write_assignment_file(const std::string& path, const Assignment& x);
GramState read_gram_state_file(const std::string& path);
void write_gram_state_file(const std::string& path, const GramState& state);
BinaryImage read_pgm_file(const std::string& path);
void write_pgm_file(const std::string& path, const BinaryImage& image);

}  // namespace psos
