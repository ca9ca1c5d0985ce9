#pragma once

#include <string>

#include "affam/machine.hpp"
#include "affam/tm.hpp"

namespace affam {

// JSON round-trips for the file formats. All rationals serialize as exact
// fraction strings, never as floats.

std::string verifier_to_json(const VerifierSpec& spec, int indent = 2);
VerifierSpec verifier_from_json(const std::string& text);

std::string machine_to_json(const TuringMachineSpec& m, int indent = 2);
TuringMachineSpec machine_from_json(const std::string& text);

}  // namespace affam
