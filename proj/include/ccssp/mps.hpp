#pragma once

#include <iosfwd>
#include <string>

#include "ccssp/model.hpp"

namespace ccssp {

// Fixed-layout MPS with INTORG/INTEND markers for binaries and an OBJSENSE
// section; names follow the model's variable/row names and may exceed eight
// characters (whitespace-delimited fields, readable by modern solvers).
void write_mps(const ModelIR& model, std::ostream& os,
               const std::string& name = "CCSSP");
std::string to_mps(const ModelIR& model, const std::string& name = "CCSSP");

// Reads the dialect written above; the backend-conformance half of the
// round trip.
ModelIR read_mps(std::istream& is);
ModelIR mps_from_string(const std::string& text);

// Minimal CPLEX-LP-format export.
void write_lp_format(const ModelIR& model, std::ostream& os);

}  // namespace ccssp
