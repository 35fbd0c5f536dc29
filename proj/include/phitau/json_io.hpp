#pragma once

// JSON forms of scalars, elements, matrices and period bundles. Every stored
// field (precisions, x_prec, floor) is written, so read(write(a)) == a exactly
// and write(read(j)) reproduces j byte for byte.

#include <nlohmann/json.hpp>

#include <algorithm>
#include <string>

#include "matrix.hpp"
#include "period_elements.hpp"

namespace phitau {

using Json = nlohmann::ordered_json;

namespace detail {

inline const Json& require(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw Error(ErrorCode::Precondition, std::string("missing JSON field '") + key + "'");
    return j.at(key);
}

template <class T>
T get(const Json& j, const char* key) {
    try {
        return require(j, key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Precondition, std::string("bad JSON field '") + key + "': " + e.what());
    }
}

inline mpz_class parse_decimal(const std::string& s) {
    mpz_class u;
    if (s.empty() || u.set_str(s, 10) != 0) throw Error(ErrorCode::Precondition, "bad decimal string '" + s + "'");
    return u;
}

// (v, u, relative precision) -> scalar, rejecting non-canonical encodings.
inline PadicNumber scalar_from_parts(long p, long v, const mpz_class& u, long prec) {
    if (prec == 0) {
        if (u != 0) throw Error(ErrorCode::Precondition, "a zero scalar has u = 0");
        return PadicNumber::zero(p, v);
    }
    if (prec < 0 || u <= 0 || u >= ppow(p, prec) || mpz_divisible_ui_p(u.get_mpz_t(), static_cast<unsigned long>(p)))
        throw Error(ErrorCode::Precondition, "scalar is not in canonical form");
    return PadicNumber::make(p, v, u, v + prec);
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline Json to_json(const PadicNumber& a) {
    return Json{{"p", a.prime()}, {"v", a.valuation()}, {"u", a.unit().get_str()}, {"N", a.relative_precision()}};
}

inline PadicNumber scalar_from_json(const Json& j) {
    return detail::scalar_from_parts(detail::get<long>(j, "p"), detail::get<long>(j, "v"),
                                     detail::parse_decimal(detail::get<std::string>(j, "u")), detail::get<long>(j, "N"));
}

inline Json to_json(const Truncation& t) {
    return Json{{"x_lo", t.x_lo},
                {"x_hi", t.x_hi},
                {"y_hi", t.y_hi},
                {"N", t.N},
                {"upper", t.upper == UpperCut::x_adic ? "x_adic" : "p_adic"}};
}

inline Truncation truncation_from_json(long p, const Json& j) {
    Truncation t;
    t.p = p;
    t.x_lo = detail::get<int>(j, "x_lo");
    t.x_hi = detail::get<int>(j, "x_hi");
    t.y_hi = detail::get<int>(j, "y_hi");
    t.N = detail::get<long>(j, "N");
    if (j.contains("upper")) {
        auto u = detail::get<std::string>(j, "upper");
        if (u == "p_adic") t.upper = UpperCut::p_adic;
        else if (u != "x_adic") throw Error(ErrorCode::Precondition, "unknown upper cut '" + u + "'");
    }
    t.validate();
    return t;
}

// Single-variable windows (y_hi = 1) omit the y field.
inline Json to_json(const ModelElement& a) {
    const Truncation& t = a.truncation();
    Json terms = Json::array();
    for (const auto& s : a.terms()) {
        Json term{{"x", s.x}};
        if (t.y_hi > 1) term["y"] = s.y;
        term["v"] = s.c.valuation();
        term["u"] = s.c.unit().get_str();
        term["prec"] = s.c.relative_precision();
        terms.push_back(std::move(term));
    }
    Json j{{"p", t.p}, {"trunc", to_json(t)}};
    j["x_prec"] = a.x_prec() == ModelElement::kExact ? Json(nullptr) : Json(a.x_prec());
    j["floor"] = a.floor() == ModelElement::kNoFloor ? Json(nullptr) : Json(a.floor());
    j["terms"] = std::move(terms);
    return j;
}

inline ModelElement element_from_json(const Json& j) {
    long p = detail::get<long>(j, "p");
    auto t = truncation_from_json(p, detail::require(j, "trunc"));
    int x_prec = ModelElement::kExact;
    long floor = ModelElement::kNoFloor;
    if (j.contains("x_prec") && !j["x_prec"].is_null()) x_prec = detail::get<int>(j, "x_prec");
    if (j.contains("floor") && !j["floor"].is_null()) floor = detail::get<long>(j, "floor");
    std::vector<Term> terms;
    const auto& arr = detail::require(j, "terms");
    if (!arr.is_array()) throw Error(ErrorCode::Precondition, "'terms' must be an array");
    for (const auto& term : arr) {
        int x = detail::get<int>(term, "x");
        int y = term.contains("y") ? detail::get<int>(term, "y") : 0;
        if (x < t.x_lo || x >= t.x_hi || y < 0 || y >= t.y_hi) throw Error(ErrorCode::Precondition, "term outside window");
        if (!terms.empty() && std::pair(terms.back().x, terms.back().y) >= std::pair(x, y))
            throw Error(ErrorCode::Precondition, "terms must be sorted by (x, y) without repeats");
        terms.push_back({x, y,
                         detail::scalar_from_parts(p, detail::get<long>(term, "v"),
                                                   detail::parse_decimal(detail::get<std::string>(term, "u")),
                                                   detail::get<long>(term, "prec"))});
    }
    return ModelElement::from_terms(t, std::move(terms), x_prec, floor);
}

inline Json to_json(const ElementMatrix& m) {
    Json rows = Json::array();
    for (size_t i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (size_t j = 0; j < m.cols(); ++j) row.push_back(to_json(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline ElementMatrix matrix_from_json(const Json& j) {
    if (!j.is_array() || j.empty() || !j[0].is_array() || j[0].empty())
        throw Error(ErrorCode::Precondition, "a matrix is a nonempty array of nonempty rows");
    size_t r = j.size(), c = j[0].size();
    ElementMatrix m(r, c, element_from_json(j[0][0]));
    for (size_t i = 0; i < r; ++i) {
        if (!j[i].is_array() || j[i].size() != c) throw Error(ErrorCode::Precondition, "ragged matrix");
        for (size_t k = 0; k < c; ++k) m(i, k) = element_from_json(j[i][k]);
    }
    for (const auto& e : m.entries())
        if (!(e.truncation() == m(0, 0).truncation())) throw Error(ErrorCode::TruncationMismatch, "matrix entries differ in window");
    return m;
}

inline Json to_json(const PeriodBundle& pb) {
    return Json{{"convention", convention_name(pb.convention)},
                {"lambda", to_json(pb.lambda)},
                {"lambda_prime", to_json(pb.lambda_prime)},
                {"t", to_json(pb.t)},
                {"b", to_json(pb.b)},
                {"alpha", to_json(pb.alpha)},
                {"b_inv", Json{{"numerator", to_json(pb.b_inv.numerator)}, {"y_pole", pb.b_inv.y_pole}}}};
}

inline PeriodBundle bundle_from_json(const Json& j) {
    PeriodBundle pb;
    pb.convention = parse_convention(detail::get<std::string>(j, "convention"));
    pb.lambda = element_from_json(detail::require(j, "lambda"));
    pb.trunc = pb.lambda.truncation();
    pb.lambda_prime = element_from_json(detail::require(j, "lambda_prime"));
    pb.t = element_from_json(detail::require(j, "t"));
    pb.b = element_from_json(detail::require(j, "b"));
    pb.alpha = element_from_json(detail::require(j, "alpha"));
    const auto& bi = detail::require(j, "b_inv");
    pb.b_inv = {element_from_json(detail::require(bi, "numerator")), detail::get<int>(bi, "y_pole")};
    return pb;
}

// Serialized text of an artifact; the canonical byte form used for comparisons.
inline std::string dump(const Json& j) { return j.dump(); }

// Every element, scalar and bundle inside an artifact re-serializes to the same
// bytes after parsing.
inline bool artifact_round_trips(const Json& j) {
    if (j.is_array()) return std::all_of(j.begin(), j.end(), [](const Json& e) { return artifact_round_trips(e); });
    if (!j.is_object()) return true;
    if (j.contains("terms") && j.contains("trunc")) return dump(to_json(element_from_json(j))) == dump(j);
    if (j.contains("u") && j.contains("v") && j.contains("N") && j.size() == 4)
        return dump(to_json(scalar_from_json(j))) == dump(j);
    if (j.contains("lambda") && j.contains("b_inv") && dump(to_json(bundle_from_json(j))) != dump(j)) return false;
    for (const auto& [k, v] : j.items())
        if (!artifact_round_trips(v)) return false;
    return true;
}

}  // namespace phitau
