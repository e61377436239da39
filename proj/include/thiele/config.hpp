#pragma once

#include <string>

#include "thiele/model.hpp"

namespace thiele {

// Loads a contract from its JSON document.  Rate and payment tables are
// piecewise constant (or piecewise polynomial) on user-given breakpoints,
// evaluated right-continuously, with an optional duration factor for
// semi-Markov entries; see README for the schema.  Schema violations raise
// ParseError naming the offending key; negative rates or a non-positive
// horizon raise ValidationError.
ContractSpec load_contract(const std::string& config_text);

ContractSpec load_contract_file(const std::string& path);

} // namespace thiele
