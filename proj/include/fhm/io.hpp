#pragma once

// JSON documents: multiplex, state, scenario. Parsing reports the field path
// of the first missing or mistyped entry (ParseError); range and shape rules
// raise ValidationError naming the field.

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "fhm/multiplex.hpp"
#include "fhm/scenario.hpp"

namespace fhm::io {

using json = nlohmann::ordered_json;

json to_json(const Matrix& m);
json to_json(const Multiplex& m);
json to_json(const MultiplexState& s);
json to_json(const Scenario& s);

Multiplex multiplex_from_json(const json& j, const std::string& path = "multiplex");
MultiplexState state_from_json(const json& j, const std::string& path = "state");
Scenario scenario_from_json(const json& j);

/// Parse text; syntax errors become ParseError with line and column.
json parse(std::string_view text, const std::string& source);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

/// Canonical text form of a document (two-space indent, trailing newline).
std::string dump(const json& j);

}  // namespace fhm::io
