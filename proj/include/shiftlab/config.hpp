#pragma once

#include <json.hpp>
#include <string>

#include "shiftlab/joint.hpp"
#include "shiftlab/mc_lab.hpp"
#include "shiftlab/shift.hpp"

namespace shiftlab {

using Json = nlohmann::json;

inline constexpr const char* kSchemaVersion = "1";

// Required-field access with config-level error reporting.
const Json& require_field(const Json& j, const std::string& key);

double require_number(const Json& j, const std::string& key);
std::uint64_t require_seed(const Json& j);

// Joints serialize to an explicit px/table schema; parsing also accepts
// {"fixture": "<name>"} shorthands, which resolve to the explicit form.
Json joint_to_json(const ConditionalJoint& joint);
ConditionalJoint joint_from_json(const Json& j);

Json spec_to_json(const ShiftSpec& spec);
ShiftSpec spec_from_json(const Json& j);

// Reads a config file, checking schema_version.
Json load_config_file(const std::string& path);

void write_sidecar(const std::string& out_path, const Json& resolved);

std::string sidecar_path(const std::string& out_path);

}  // namespace shiftlab
