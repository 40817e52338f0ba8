#include "mickit/density.hpp"
#include "mickit/errors.hpp"

#include <json.hpp>

#include <set>
#include <string>

namespace mickit {
namespace {

using nlohmann::json;

void allow_only(const json& object, const std::set<std::string>& keys, const std::string& where)
{
    for (const auto& [key, value] : object.items()) {
        if (!keys.contains(key)) {
            throw InputError("unknown key '" + key + "' in " + where);
        }
    }
}

const json& require(const json& object, const std::string& key, const std::string& where)
{
    if (!object.contains(key)) {
        throw InputError("missing key '" + key + "' in " + where);
    }
    return object.at(key);
}

double number(const json& v, const std::string& what)
{
    if (!v.is_number()) {
        throw InputError(what + " must be a number");
    }
    return v.get<double>();
}

std::pair<double, double> range(const json& v, const std::string& what)
{
    if (!v.is_array() || v.size() != 2) {
        throw InputError(what + " must be a two-element array");
    }
    return {number(v[0], what), number(v[1], what)};
}

DensityComponent parse_component(const json& c, std::size_t index)
{
    const std::string where = "component " + std::to_string(index);
    if (!c.is_object()) {
        throw InputError(where + " must be an object");
    }
    allow_only(c, {"kind", "weight", "params"}, where);
    const auto& kind_value = require(c, "kind", where);
    if (!kind_value.is_string()) {
        throw InputError(where + " kind must be a string");
    }
    const std::string kind = kind_value.get<std::string>();
    DensityComponent out;
    out.weight = number(require(c, "weight", where), where + " weight");
    const json params = c.contains("params") ? c.at("params") : json::object();
    if (!params.is_object()) {
        throw InputError(where + " params must be an object");
    }

    if (kind == "uniform_box") {
        allow_only(params, {"x", "y"}, where);
        UniformBox box;
        if (params.contains("x")) {
            std::tie(box.x_lo, box.x_hi) = range(params.at("x"), where + " x");
        }
        if (params.contains("y")) {
            std::tie(box.y_lo, box.y_hi) = range(params.at("y"), where + " y");
        }
        out.shape = box;
    } else if (kind == "function_band") {
        allow_only(params, {"function", "frequency", "x_law", "b", "a"}, where);
        const auto& name = require(params, "function", where);
        if (!name.is_string()) {
            throw InputError(where + " function must be a string");
        }
        FunctionSpec f = FunctionSpec::parse(name.get<std::string>());
        if (params.contains("frequency")) {
            f = FunctionSpec(f.kind(), number(params.at("frequency"), where + " frequency"));
        }
        FunctionBand band{f, XLaw::uniform, number(require(params, "b", where), where + " b"), 0.0};
        if (params.contains("a")) {
            band.a = number(params.at("a"), where + " a");
        }
        if (params.contains("x_law")) {
            if (!params.at("x_law").is_string()) {
                throw InputError(where + " x_law must be a string");
            }
            band.x_law = parse_x_law(params.at("x_law").get<std::string>());
        }
        out.shape = band;
    } else if (kind == "grid_histogram") {
        allow_only(params, {"rows", "cols", "masses"}, where);
        GridHistogram h;
        auto count = [&](const char* key) {
            const auto& v = require(params, key, where);
            if (!v.is_number_unsigned() || v.get<std::size_t>() == 0) {
                throw InputError(where + " " + key + " must be a positive integer");
            }
            return v.get<std::size_t>();
        };
        h.rows = count("rows");
        h.cols = count("cols");
        const auto& masses = require(params, "masses", where);
        if (!masses.is_array()) {
            throw InputError(where + " masses must be an array");
        }
        h.masses.clear();
        for (const auto& row : masses) {
            if (row.is_array()) {
                if (row.size() != h.cols) {
                    throw InputError(where + " masses rows must have cols entries");
                }
                for (const auto& m : row) {
                    h.masses.push_back(number(m, where + " mass"));
                }
            } else {
                h.masses.push_back(number(row, where + " mass"));
            }
        }
        out.shape = std::move(h);
    } else {
        throw InputError(where + " has unknown kind '" + kind + "'");
    }
    return out;
}

} // namespace

DensitySpec density_spec_from_json(const std::string& text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("density spec is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw InputError("density spec must be a JSON object");
    }
    allow_only(doc, {"schema_version", "components"}, "density spec");
    const auto& version = require(doc, "schema_version", "density spec");
    if (!version.is_number_integer() || version.get<int>() != 1) {
        throw InputError("unsupported density spec schema_version; expected 1");
    }
    const auto& components = require(doc, "components", "density spec");
    if (!components.is_array()) {
        throw InputError("density spec components must be an array");
    }
    std::vector<DensityComponent> out;
    for (std::size_t i = 0; i < components.size(); ++i) {
        out.push_back(parse_component(components[i], i));
    }
    return DensitySpec(std::move(out));
}

std::string density_spec_to_json(const DensitySpec& density)
{
    json components = json::array();
    for (const auto& c : density.components()) {
        json entry{{"weight", c.weight}};
        if (const auto* box = std::get_if<UniformBox>(&c.shape)) {
            entry["kind"] = "uniform_box";
            entry["params"] = {{"x", {box->x_lo, box->x_hi}}, {"y", {box->y_lo, box->y_hi}}};
        } else if (const auto* band = std::get_if<FunctionBand>(&c.shape)) {
            entry["kind"] = "function_band";
            json params{{"x_law", std::string(to_string(band->x_law))}, {"b", band->b}, {"a", band->a}};
            if (band->function.kind() == FunctionKind::sinusoidal) {
                params["function"] = "sinusoidal";
                params["frequency"] = band->function.frequency();
            } else {
                params["function"] = band->function.name();
            }
            entry["params"] = params;
        } else {
            const auto& h = std::get<GridHistogram>(c.shape);
            entry["kind"] = "grid_histogram";
            entry["params"] = {{"rows", h.rows}, {"cols", h.cols}, {"masses", h.masses}};
        }
        components.push_back(entry);
    }
    return json{{"schema_version", 1}, {"components", components}}.dump();
}

} // namespace mickit
