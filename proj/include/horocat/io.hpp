#pragma once

#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "horocat/forms.hpp"
#include "horocat/groups.hpp"
#include "horocat/models.hpp"
#include "horocat/presets.hpp"

namespace horocat {

using Json = nlohmann::ordered_json;

// Exact numbers
// ~~~~~~~~~~~~~
/// Integers that fit in 64 bits are written as JSON numbers, everything else as a
/// decimal string or "p/q".
inline Json to_json(const Integer& x) {
    if (x.fits_slong_p()) return Json(x.get_si());
    return Json(x.get_str());
}

inline Json to_json(const Rational& value) {
    Rational x = value;
    x.canonicalize();
    if (x.get_den() == 1) return to_json(Integer(x.get_num()));
    return Json(x.get_str());
}

inline Rational rational_from_json(const Json& j) {
    if (j.is_number_integer()) return Rational(Integer(std::to_string(j.get<long long>())));
    if (j.is_number_unsigned()) return Rational(Integer(std::to_string(j.get<unsigned long long>())));
    if (j.is_string()) return parse_rational(j.get<std::string>());
    fail(ErrorKind::ConfigError, "expected an integer or a \"p/q\" string, got " + j.dump());
}

inline Integer integer_from_json(const Json& j) {
    const Rational r = rational_from_json(j);
    if (r.get_den() != 1) fail(ErrorKind::ConfigError, "expected an integer, got " + j.dump());
    return r.get_num();
}

inline Json to_json(const IntVector& v) {
    Json out = Json::array();
    for (const auto& x : v) out.push_back(to_json(x));
    return out;
}

inline Json to_json(const RatVector& v) {
    Json out = Json::array();
    for (const auto& x : v) out.push_back(to_json(x));
    return out;
}

inline Json to_json(const IntMatrix& m) {
    Json out = Json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) row.push_back(to_json(m(i, j)));
        out.push_back(std::move(row));
    }
    return out;
}

inline Json to_json(const Eigen::VectorXd& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
    return out;
}

inline const Json& require_array(const Json& j, const std::string& what) {
    if (!j.is_array()) fail(ErrorKind::ConfigError, what + " must be an array");
    return j;
}

inline RatVector rational_vector_from_json(const Json& j, const std::string& what) {
    RatVector out;
    for (const auto& x : require_array(j, what)) out.push_back(rational_from_json(x));
    return out;
}

inline IntVector integer_vector_from_json(const Json& j, const std::string& what) {
    IntVector out;
    for (const auto& x : require_array(j, what)) out.push_back(integer_from_json(x));
    return out;
}

inline RatMatrix rational_matrix_from_json(const Json& j, const std::string& what) {
    require_array(j, what);
    const std::size_t rows = j.size();
    if (rows == 0) fail(ErrorKind::ConfigError, what + " is empty");
    RatMatrix out(rows, require_array(j[0], what).size());
    for (std::size_t i = 0; i < rows; ++i) {
        const RatVector row = rational_vector_from_json(j[i], what);
        if (row.size() != out.cols()) fail(ErrorKind::ConfigError, what + " has ragged rows");
        for (std::size_t k = 0; k < row.size(); ++k) out(i, k) = row[k];
    }
    return out;
}

inline IntMatrix integer_matrix_from_json(const Json& j, const std::string& what) {
    const RatMatrix m = rational_matrix_from_json(j, what);
    if (!is_integral(m)) fail(ErrorKind::ConfigError, what + " must have integer entries");
    return to_integer(m);
}

// Group specifications
// ~~~~~~~~~~~~~~~~~~~~
/// Exact group data as ingested: Gram matrix, generators, cone and optional extras.
struct GroupSpec {
    std::string name;
    IntMatrix gram;
    std::optional<RatVector> witness;
    std::vector<IntMatrix> generators;
    std::vector<std::string> names;
    RationalCone cone;
    std::optional<IntVector> basepoint;

    friend bool operator==(const GroupSpec& a, const GroupSpec& b) {
        return a.name == b.name && a.gram == b.gram && a.witness == b.witness && a.generators == b.generators &&
               a.names == b.names && a.cone.full_positive == b.cone.full_positive &&
               a.cone.halfspaces == b.cone.halfspaces && a.basepoint == b.basepoint;
    }
};

/// Reads {"gram", "generators", "cone"} plus the optional keys "name", "names",
/// "witness" and "basepoint". A rational Gram matrix is scaled by the least common
/// denominator, which leaves the isometry group unchanged.
inline GroupSpec group_spec_from_json(const Json& j) {
    if (!j.is_object()) fail(ErrorKind::ConfigError, "group description must be a JSON object");
    for (const char* key : {"gram", "generators"})
        if (!j.contains(key)) fail(ErrorKind::ConfigError, std::string("missing key \"") + key + "\"");
    GroupSpec s;
    if (j.contains("name")) s.name = j.at("name").get<std::string>();
    const RatMatrix gram = rational_matrix_from_json(j.at("gram"), "gram");
    Integer lcm = 1;
    for (std::size_t i = 0; i < gram.rows(); ++i)
        for (std::size_t k = 0; k < gram.cols(); ++k) mpz_lcm(lcm.get_mpz_t(), lcm.get_mpz_t(), gram(i, k).get_den_mpz_t());
    s.gram = to_integer(Rational(lcm) * gram);
    for (const auto& g : require_array(j.at("generators"), "generators"))
        s.generators.push_back(integer_matrix_from_json(g, "generator"));
    if (j.contains("names"))
        for (const auto& n : require_array(j.at("names"), "names")) s.names.push_back(n.get<std::string>());
    if (j.contains("witness")) s.witness = rational_vector_from_json(j.at("witness"), "witness");
    if (j.contains("basepoint")) s.basepoint = integer_vector_from_json(j.at("basepoint"), "basepoint");
    s.cone = RationalCone::full();
    if (j.contains("cone")) {
        const Json& c = j.at("cone");
        if (c.is_string() && c.get<std::string>() == "full_positive") {
            s.cone = RationalCone::full();
        } else if (c.is_object() && c.contains("halfspaces")) {
            std::vector<RatVector> rows;
            for (const auto& l : require_array(c.at("halfspaces"), "halfspaces"))
                rows.push_back(rational_vector_from_json(l, "halfspace"));
            s.cone = RationalCone::from_functionals(rows);
        } else {
            fail(ErrorKind::ConfigError, "cone must be \"full_positive\" or {\"halfspaces\": [...]}");
        }
    }
    return s;
}

inline Json to_json(const GroupSpec& s) {
    Json j;
    if (!s.name.empty()) j["name"] = s.name;
    j["gram"] = to_json(s.gram);
    Json gens = Json::array();
    for (const auto& g : s.generators) gens.push_back(to_json(g));
    j["generators"] = std::move(gens);
    if (!s.names.empty()) j["names"] = s.names;
    if (s.cone.full_positive) {
        j["cone"] = "full_positive";
    } else {
        Json hs = Json::array();
        for (const auto& l : s.cone.halfspaces) hs.push_back(to_json(l));
        j["cone"] = Json{{"halfspaces", std::move(hs)}};
    }
    if (s.witness) j["witness"] = to_json(*s.witness);
    if (s.basepoint) j["basepoint"] = to_json(*s.basepoint);
    return j;
}

inline GroupSpec group_spec(const Preset& p) {
    GroupSpec s;
    s.name = p.name;
    s.gram = p.group.form().gram();
    s.witness = p.group.form().witness();
    s.generators = p.group.generators();
    s.names = p.group.names();
    s.cone = RationalCone::full();
    s.basepoint = p.basepoint;
    return s;
}

inline GeneratedGroup make_group(const GroupSpec& s) {
    QuadraticForm form(s.gram, s.witness);
    return GeneratedGroup(std::move(form), s.generators, s.names);
}

// Files
// ~~~~~
inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::IoError, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline Json parse_json_text(const std::string& text, const std::string& origin) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        fail(ErrorKind::ConfigError, "malformed JSON in " + origin + ": " + e.what());
    }
}

inline Json load_json_file(const std::string& path) { return parse_json_text(read_text_file(path), "'" + path + "'"); }

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::IoError, "cannot write '" + path + "'");
    out << text;
    if (!out) fail(ErrorKind::IoError, "write to '" + path + "' failed");
}

// Points
// ~~~~~~
inline Eigen::VectorXd parse_coordinates(const std::string& text) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(item, &used));
            if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            fail(ErrorKind::ConfigError, "malformed coordinate list '" + text + "'");
        }
    }
    if (values.empty()) fail(ErrorKind::ConfigError, "empty coordinate list");
    return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

inline Json to_json(const ModelPoint& p) { return Json{{"model", to_string(p.model)}, {"coords", to_json(p.coords)}}; }

inline ModelPoint point_from_json(const Json& j, Model fallback = Model::Hyperboloid) {
    ModelPoint p;
    p.model = fallback;
    const Json* coords = &j;
    if (j.is_object()) {
        if (j.contains("model")) p.model = parse_model(j.at("model").get<std::string>());
        if (!j.contains("coords")) fail(ErrorKind::ConfigError, "point object needs \"coords\"");
        coords = &j.at("coords");
    }
    require_array(*coords, "coords");
    p.coords.resize(static_cast<Eigen::Index>(coords->size()));
    for (std::size_t i = 0; i < coords->size(); ++i) {
        if (!(*coords)[i].is_number()) fail(ErrorKind::ConfigError, "coordinates must be numbers");
        p.coords(static_cast<Eigen::Index>(i)) = (*coords)[i].get<double>();
    }
    validate(p);
    return p;
}

inline Json to_json(const BoundaryPoint& b) {
    Json j{{"sphere", to_json(b.sphere())}};
    if (auto h = b.halfspace()) j["halfspace"] = to_json(*h);
    else j["halfspace"] = "infinity";
    if (b.exact) j["exact"] = to_json(*b.exact);
    return j;
}

} // namespace horocat
