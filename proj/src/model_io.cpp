#include "mmtail/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "mmtail/errors.hpp"

namespace mmtail {

using nlohmann::json;

namespace {

double number(const json& j, const char* key) {
    if (!j.contains(key)) throw ValidationError(std::string("missing key '") + key + "'");
    const json& v = j.at(key);
    if (!v.is_number()) throw ValidationError(std::string("key '") + key + "' must be a number");
    return v.get<double>();
}

double number_or(const json& j, const char* key, double fallback) {
    return j.contains(key) ? number(j, key) : fallback;
}

RealVector vector_of(const json& j, const char* key) {
    if (!j.contains(key)) throw ValidationError(std::string("missing key '") + key + "'");
    const json& v = j.at(key);
    if (!v.is_array()) throw ValidationError(std::string("key '") + key + "' must be an array");
    RealVector out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_number()) throw ValidationError(std::string("key '") + key + "' must hold numbers");
        out(static_cast<Eigen::Index>(i)) = v[i].get<double>();
    }
    return out;
}

RealMatrix matrix_of(const json& j, const char* key, int n) {
    if (!j.contains(key)) throw ValidationError(std::string("missing key '") + key + "'");
    const json& v = j.at(key);
    if (!v.is_array()) throw ValidationError(std::string("key '") + key + "' must be an array");
    RealMatrix out(n, n);
    if (!v.empty() && v[0].is_array()) {
        if (static_cast<int>(v.size()) != n) throw ValidationError("generator must have one row per state");
        for (int i = 0; i < n; ++i) {
            if (!v[i].is_array() || static_cast<int>(v[i].size()) != n)
                throw ValidationError("generator rows must have one entry per state");
            for (int k = 0; k < n; ++k) {
                if (!v[i][k].is_number()) throw ValidationError("generator entries must be numbers");
                out(i, k) = v[i][k].get<double>();
            }
        }
    } else {
        if (static_cast<int>(v.size()) != n * n) throw ValidationError("flat generator must have N*N entries");
        for (int i = 0; i < n * n; ++i) {
            if (!v[i].is_number()) throw ValidationError("generator entries must be numbers");
            out(i / n, i % n) = v[i].get<double>();
        }
    }
    return out;
}

std::vector<Atom> atoms_of(const json& j) {
    if (!j.contains("atoms") || !j.at("atoms").is_array()) throw ValidationError("atoms must be an array");
    std::vector<Atom> out;
    for (const auto& a : j.at("atoms")) {
        if (a.is_array() && a.size() == 2 && a[0].is_number() && a[1].is_number()) {
            out.push_back({a[0].get<double>(), a[1].get<double>()});
        } else if (a.is_object()) {
            out.push_back({number(a, "value"), number(a, "prob")});
        } else {
            throw ValidationError("each atom must be [value, prob] or {value, prob}");
        }
    }
    return out;
}

json atoms_to_json(const std::vector<Atom>& atoms) {
    json arr = json::array();
    for (const auto& a : atoms) arr.push_back({{"value", a.value}, {"prob", a.prob}});
    return arr;
}

std::string type_of(const json& j) {
    if (!j.is_object() || !j.contains("type") || !j.at("type").is_string())
        throw ValidationError("component needs a string 'type'");
    return j.at("type").get<std::string>();
}

LevyExponent exponent_from_json(const json& j) {
    const std::string t = type_of(j);
    if (t == "brownian") return BrownianDrift{number_or(j, "mu", 0.0), number_or(j, "sigma2", 0.0)};
    if (t == "linear") return LinearDrift{number(j, "mu")};
    if (t == "poisson") return PoissonJump{number(j, "gamma"), number_or(j, "h", 1.0)};
    if (t == "compound_poisson") return CompoundPoissonDiscrete{number(j, "gamma"), atoms_of(j)};
    if (t == "truncated_pareto_exp") return TruncatedParetoExpJump{number(j, "c")};
    if (t == "cauchy") return CauchyStub{};
    throw ValidationError("unknown exponent type '" + t + "'");
}

JumpMgf jump_from_json(const json& j) {
    const std::string t = type_of(j);
    if (t == "zero") return DegenerateZero{};
    if (t == "point") return DegeneratePoint{number(j, "a")};
    if (t == "atoms") return DiscreteAtoms{atoms_of(j)};
    if (t == "gaussian") return GaussianJump{number(j, "mean"), number(j, "variance")};
    throw ValidationError("unknown jump type '" + t + "'");
}

json matrix_to_json(const RealMatrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
        rows.push_back(row);
    }
    return rows;
}

json vector_to_json(const RealVector& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

std::string fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace

json exponent_to_json(const LevyExponent& e) {
    return std::visit(
        [](const auto& x) -> json {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, BrownianDrift>)
                return {{"type", "brownian"}, {"mu", x.mu}, {"sigma2", x.sigma2}};
            else if constexpr (std::is_same_v<T, LinearDrift>)
                return {{"type", "linear"}, {"mu", x.mu}};
            else if constexpr (std::is_same_v<T, PoissonJump>)
                return {{"type", "poisson"}, {"gamma", x.gamma}, {"h", x.h}};
            else if constexpr (std::is_same_v<T, CompoundPoissonDiscrete>)
                return {{"type", "compound_poisson"}, {"gamma", x.gamma}, {"atoms", atoms_to_json(x.atoms)}};
            else if constexpr (std::is_same_v<T, TruncatedParetoExpJump>)
                return {{"type", "truncated_pareto_exp"}, {"c", x.c}};
            else
                return {{"type", "cauchy"}};
        },
        e);
}

json jump_to_json(const JumpMgf& m) {
    return std::visit(
        [](const auto& x) -> json {
            using T = std::decay_t<decltype(x)>;
            if constexpr (std::is_same_v<T, DegenerateZero>)
                return {{"type", "zero"}};
            else if constexpr (std::is_same_v<T, DegeneratePoint>)
                return {{"type", "point"}, {"a", x.a}};
            else if constexpr (std::is_same_v<T, DiscreteAtoms>)
                return {{"type", "atoms"}, {"atoms", atoms_to_json(x.atoms)}};
            else
                return {{"type", "gaussian"}, {"mean", x.mean}, {"variance", x.variance}};
        },
        m);
}

ModelSpec spec_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("spec must be a JSON object");
    if (!j.contains("states") || !j.at("states").is_array() || j.at("states").empty())
        throw ValidationError("spec needs a nonempty 'states' array");
    ModelSpec spec;
    for (const auto& s : j.at("states")) spec.exponents.push_back(exponent_from_json(s));
    const int n = spec.n();
    spec.generator.entries = j.contains("generator") ? matrix_of(j, "generator", n) : RealMatrix::Zero(n, n);
    spec.phi = vector_of(j, "phi");
    spec.varpi = j.contains("varpi") ? vector_of(j, "varpi") : RealVector::Constant(n, 1.0 / n);
    spec.jumps.assign(n, std::vector<JumpMgf>(n, DegenerateZero{}));
    if (j.contains("jumps")) {
        if (!j.at("jumps").is_array()) throw ValidationError("'jumps' must be an array");
        for (const auto& e : j.at("jumps")) {
            if (!e.is_object() || !e.contains("from") || !e.contains("to") || !e.contains("mgf") ||
                !e.at("from").is_number_integer() || !e.at("to").is_number_integer())
                throw ValidationError("each jump needs integer 'from', 'to' and an 'mgf' object");
            const int from = e.at("from").get<int>();
            const int to = e.at("to").get<int>();
            if (from < 0 || from >= n || to < 0 || to >= n) throw ValidationError("jump index out of range");
            spec.jumps[from][to] = jump_from_json(e.at("mgf"));
        }
    }
    return spec;
}

json spec_to_json(const ModelSpec& spec) {
    json j;
    json states = json::array();
    for (const auto& e : spec.exponents) states.push_back(exponent_to_json(e));
    j["states"] = states;
    j["generator"] = matrix_to_json(spec.generator.entries);
    j["phi"] = vector_to_json(spec.phi);
    j["varpi"] = vector_to_json(spec.varpi);
    json jumps = json::array();
    for (int a = 0; a < static_cast<int>(spec.jumps.size()); ++a)
        for (int b = 0; b < static_cast<int>(spec.jumps[a].size()); ++b)
            if (!std::holds_alternative<DegenerateZero>(spec.jumps[a][b]))
                jumps.push_back({{"from", a}, {"to", b}, {"mgf", jump_to_json(spec.jumps[a][b])}});
    j["jumps"] = jumps;
    return j;
}

WealthModel wealth_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("wealth model must be a JSON object");
    WealthModel m;
    m.y = vector_of(j, "y");
    if (m.y.size() == 0) throw ValidationError("'y' must be nonempty");
    m.generator.entries = matrix_of(j, "generator", m.n());
    m.gamma = number(j, "gamma");
    m.rho_tilde = number(j, "rho_tilde");
    m.phi = number(j, "phi");
    return m;
}

json wealth_to_json(const WealthModel& model) {
    return {{"y", vector_to_json(model.y)},
            {"generator", matrix_to_json(model.generator.entries)},
            {"gamma", model.gamma},
            {"rho_tilde", model.rho_tilde},
            {"phi", model.phi}};
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("'" + path + "' is not valid JSON: " + e.what());
    }
}

ModelSpec load_spec(const std::string& path) { return spec_from_json(read_json_file(path)); }

WealthModel load_wealth(const std::string& path) { return wealth_from_json(read_json_file(path)); }

std::string spec_hash(const ModelSpec& spec) { return fnv1a(spec_to_json(spec).dump()); }

std::string wealth_hash(const WealthModel& model) { return fnv1a(wealth_to_json(model).dump()); }

}  // namespace mmtail
