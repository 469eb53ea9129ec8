#include "perspeed/config.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "perspeed/errors.hpp"

namespace perspeed {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

double require_number(const json& j, const std::string& field) {
    if (!j.is_number()) throw ConfigError(field, "expected a number");
    return j.get<double>();
}

std::vector<double> number_list(const json& j, const std::string& field) {
    if (!j.is_array()) throw ConfigError(field, "expected an array of numbers");
    std::vector<double> v;
    for (const auto& e : j) {
        if (!e.is_number()) throw ConfigError(field, "expected an array of numbers");
        v.push_back(e.get<double>());
    }
    return v;
}

const json& require_key(const json& j, const std::string& key, const std::string& path) {
    if (!j.is_object() || !j.contains(key))
        throw ConfigError(path.empty() ? key : path + "." + key, "missing field");
    return j.at(key);
}

}  // namespace

PeriodicCoefficient coefficient_from_json(const json& j, const std::string& field) {
    if (j.is_number())  // shorthand for constants
        return PeriodicCoefficient::constant(j.get<double>());
    if (!j.is_object()) throw ConfigError(field, "expected a coefficient object");
    const std::string kind = require_key(j, "kind", field).is_string()
                                 ? j.at("kind").get<std::string>()
                                 : throw ConfigError(field + ".kind", "expected a string");
    if (kind == "constant")
        return PeriodicCoefficient::constant(
            require_number(require_key(j, "value", field), field + ".value"));
    if (kind == "fourier") {
        const double a0 = require_number(require_key(j, "a0", field), field + ".a0");
        std::vector<double> cosc, sinc;
        if (j.contains("cos")) cosc = number_list(j.at("cos"), field + ".cos");
        if (j.contains("sin")) sinc = number_list(j.at("sin"), field + ".sin");
        return PeriodicCoefficient::fourier(a0, std::move(cosc), std::move(sinc));
    }
    if (kind == "piecewise")
        return PeriodicCoefficient::piecewise(
            number_list(require_key(j, "breaks", field), field + ".breaks"),
            number_list(require_key(j, "values", field), field + ".values"));
    if (kind == "samples")
        return PeriodicCoefficient::samples(
            number_list(require_key(j, "values", field), field + ".values"));
    throw ConfigError(field + ".kind",
                      "unknown kind '" + kind + "' (constant|fourier|piecewise|samples)");
}

ordered_json coefficient_to_json(const PeriodicCoefficient& coeff) {
    ordered_json j;
    if (const auto* c = std::get_if<PeriodicCoefficient::Constant>(&coeff.form())) {
        j["kind"] = "constant";
        j["value"] = c->value;
    } else if (const auto* f = std::get_if<PeriodicCoefficient::Fourier>(&coeff.form())) {
        j["kind"] = "fourier";
        j["a0"] = f->a0;
        j["cos"] = f->cos_coeffs;
        j["sin"] = f->sin_coeffs;
    } else if (const auto* p =
                   std::get_if<PeriodicCoefficient::PiecewiseConstant>(&coeff.form())) {
        j["kind"] = "piecewise";
        j["breaks"] = p->breakpoints;
        j["values"] = p->values;
    } else {
        const auto& s = std::get<PeriodicCoefficient::Samples>(coeff.form());
        j["kind"] = "samples";
        j["values"] = s.values;
    }
    return j;
}

CompetitionModel model_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config", "expected a JSON object");
    CompetitionModel m;
    m.L = require_number(require_key(j, "L", ""), "L");
    if (!(m.L > 0.0)) throw ConfigError("L", "period must be positive");
    if (j.contains("n")) {
        if (!j.at("n").is_number_integer()) throw ConfigError("n", "expected an integer");
        m.n = j.at("n").get<int>();
        if (m.n < 8) throw ConfigError("n", "need at least 8 nodes per period");
    }
    const auto species = [&](const std::string& name, PeriodicCoefficient& d,
                             PeriodicCoefficient& g, PeriodicCoefficient& b) {
        const json& s = require_key(j, name, "");
        d = coefficient_from_json(require_key(s, "d", name), name + ".d");
        b = coefficient_from_json(require_key(s, "b", name), name + ".b");
        g = s.contains("g") ? coefficient_from_json(s.at("g"), name + ".g")
                            : PeriodicCoefficient::constant(0.0);
        d.validate(m.L, name + ".d");
        g.validate(m.L, name + ".g");
        b.validate(m.L, name + ".b");
    };
    species("species1", m.d1, m.g1, m.b1);
    species("species2", m.d2, m.g2, m.b2);

    const json& comp = require_key(j, "competition", "");
    const auto comp_coeff = [&](const char* key) {
        auto c = coefficient_from_json(require_key(comp, key, "competition"),
                                       std::string("competition.") + key);
        c.validate(m.L, std::string("competition.") + key);
        return c;
    };
    m.a11 = comp_coeff("a11");
    m.a12 = comp_coeff("a12");
    m.a21 = comp_coeff("a21");
    m.a22 = comp_coeff("a22");
    return m;
}

ordered_json model_to_json(const CompetitionModel& m) {
    ordered_json j;
    j["L"] = m.L;
    j["n"] = m.n;
    j["species1"] = {{"d", coefficient_to_json(m.d1)},
                     {"g", coefficient_to_json(m.g1)},
                     {"b", coefficient_to_json(m.b1)}};
    j["species2"] = {{"d", coefficient_to_json(m.d2)},
                     {"g", coefficient_to_json(m.g2)},
                     {"b", coefficient_to_json(m.b2)}};
    j["competition"] = {{"a11", coefficient_to_json(m.a11)},
                        {"a12", coefficient_to_json(m.a12)},
                        {"a21", coefficient_to_json(m.a21)},
                        {"a22", coefficient_to_json(m.a22)}};
    return j;
}

CompetitionModel load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("config", std::string("JSON parse error: ") + e.what());
    }
    return model_from_json(j);
}

}  // namespace perspeed
