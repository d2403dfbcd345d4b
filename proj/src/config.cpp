#include "shiftlab/config.hpp"

#include <fstream>

#include "shiftlab/errors.hpp"
#include "shiftlab/fixtures.hpp"

namespace shiftlab {

const Json& require_field(const Json& j, const std::string& key) {
    auto it = j.find(key);
    if (it == j.end()) {
        throw validation_error("SchemaViolation", "config is missing '" + key + "'");
    }
    return *it;
}

double require_number(const Json& j, const std::string& key) {
    const Json& v = require_field(j, key);
    if (!v.is_number()) {
        throw validation_error("SchemaViolation", "'" + key + "' must be a number");
    }
    return v.get<double>();
}

std::uint64_t require_seed(const Json& j) {
    const Json& v = require_field(j, "seed");
    if (!v.is_number_unsigned() && !v.is_number_integer()) {
        throw validation_error("SchemaViolation", "'seed' must be an integer (no clock default)");
    }
    return v.get<std::uint64_t>();
}

namespace {

std::vector<OutcomeLevel> levels_from_json(const Json& j, const std::string& key) {
    std::vector<OutcomeLevel> out;
    for (const Json& item : j) {
        if (item.is_number()) {
            const double v = item.get<double>();
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            out.push_back({buf, v});
        } else if (item.is_object()) {
            out.push_back({require_field(item, "label").get<std::string>(),
                           require_number(item, "value")});
        } else {
            throw validation_error("SchemaViolation",
                                   "'" + key + "' entries must be numbers or {label,value}");
        }
    }
    return out;
}

Json levels_to_json(const std::vector<OutcomeLevel>& levels) {
    Json out = Json::array();
    for (const auto& lvl : levels) out.push_back({{"label", lvl.label}, {"value", lvl.value}});
    return out;
}

}  // namespace

Json joint_to_json(const ConditionalJoint& joint) {
    const Alphabet& a = joint.alphabet();
    Json table = Json::array();
    for (std::size_t xi = 0; xi < a.n_x(); ++xi) {
        Json rows = Json::array();
        for (std::size_t i1 = 0; i1 < a.n_y1(); ++i1) {
            Json row = Json::array();
            for (std::size_t i2 = 0; i2 < a.n_y2(); ++i2) row.push_back(joint.prob(xi, i1, i2));
            rows.push_back(std::move(row));
        }
        table.push_back(std::move(rows));
    }
    return Json{{"x_labels", a.x_labels()},
                {"y1_levels", levels_to_json(a.y1_levels())},
                {"y2_levels", levels_to_json(a.y2_levels())},
                {"px", joint.px_vector()},
                {"table", std::move(table)}};
}

ConditionalJoint joint_from_json(const Json& j) {
    if (!j.is_object()) {
        throw validation_error("SchemaViolation", "joint must be an object");
    }
    if (j.contains("fixture")) {
        return fixture_by_name(j["fixture"].get<std::string>());
    }
    std::vector<std::string> x_labels;
    for (const Json& item : require_field(j, "x_labels")) {
        x_labels.push_back(item.is_string() ? item.get<std::string>() : item.dump());
    }
    Alphabet alphabet(std::move(x_labels), levels_from_json(require_field(j, "y1_levels"), "y1_levels"),
                      levels_from_json(require_field(j, "y2_levels"), "y2_levels"));
    std::vector<double> px;
    for (const Json& item : require_field(j, "px")) px.push_back(item.get<double>());

    const Json& table = require_field(j, "table");
    std::vector<double> cells;
    cells.reserve(alphabet.n_x() * alphabet.n_cells());
    if (table.size() != alphabet.n_x()) {
        throw validation_error("SchemaViolation", "table must have one block per x label");
    }
    for (const Json& block : table) {
        if (block.size() != alphabet.n_y1()) {
            throw validation_error("SchemaViolation", "table block must have one row per y1");
        }
        for (const Json& row : block) {
            if (row.size() != alphabet.n_y2()) {
                throw validation_error("SchemaViolation", "table row must have one cell per y2");
            }
            for (const Json& cell : row) cells.push_back(cell.get<double>());
        }
    }
    return ConditionalJoint::create(std::move(alphabet), std::move(px), std::move(cells));
}

Json spec_to_json(const ShiftSpec& spec) {
    Json out{{"kind", to_string(spec.kind)}, {"cross_x_mode", to_string(spec.cross_x)}};
    switch (spec.kind) {
        case ShiftKind::symmetric_dirichlet: out["kappa"] = spec.strength; break;
        case ShiftKind::asymmetric_marginal: out["scale"] = spec.strength; break;
        case ShiftKind::paired_perturbation: out["magnitude"] = spec.strength; break;
    }
    return out;
}

ShiftSpec spec_from_json(const Json& j) {
    ShiftSpec spec;
    spec.kind = shift_kind_from_string(require_field(j, "kind").get<std::string>());
    if (j.contains("cross_x_mode")) {
        spec.cross_x = cross_x_mode_from_string(j["cross_x_mode"].get<std::string>());
    }
    for (const char* key : {"kappa", "scale", "magnitude", "strength"}) {
        if (j.contains(key)) {
            spec.strength = j[key].get<double>();
            validate_spec(spec);
            return spec;
        }
    }
    throw validation_error("SchemaViolation", "shift spec is missing its strength parameter");
}

Json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw validation_error("ParseError", "cannot open config '" + path + "'");
    }
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw validation_error("ParseError", "config '" + path + "': " + e.what());
    }
    if (!j.is_object()) {
        throw validation_error("SchemaViolation", "config must be a JSON object");
    }
    const std::string version =
        j.contains("schema_version") ? j["schema_version"].get<std::string>() : "";
    if (version != kSchemaVersion) {
        throw validation_error("SchemaViolation",
                               "unrecognized schema_version '" + version + "'");
    }
    return j;
}

std::string sidecar_path(const std::string& out_path) { return out_path + ".config.json"; }

void write_sidecar(const std::string& out_path, const Json& resolved) {
    std::ofstream out(sidecar_path(out_path), std::ios::binary);
    if (!out) {
        throw validation_error("ParseError", "cannot write sidecar for '" + out_path + "'");
    }
    out << resolved.dump(2) << '\n';
}

}  // namespace shiftlab
