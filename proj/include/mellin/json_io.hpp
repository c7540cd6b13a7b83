#pragma once

#include <json.hpp>

#include <string>

#include "mellin/errors.hpp"
#include "mellin/objects.hpp"
#include "mellin/series.hpp"

namespace mellin {

using Json = nlohmann::json;

template <class K>
Json series_to_json(const Series<K>& s) {
    Json terms = Json::array();
    for (auto& [k, c] : s.terms) terms.push_back(Json::array({k, field_traits<K>::format(c)}));
    Json out{{"var", var_name(s.var)}, {"ram", s.ram}, {"terms", std::move(terms)}};
    out["trunc"] = s.trunc ? Json(*s.trunc) : Json(nullptr);
    return out;
}

template <class K>
Series<K> series_from_json(const Json& j) {
    if (!j.is_object()) throw SyntaxError("series JSON must be an object", 0);
    std::string vname = j.at("var").get<std::string>();
    std::optional<Var> v;
    for (Var cand : {Var::Z, Var::Zx, Var::Zeta, Var::Theta})
        if (vname == var_name(cand)) v = cand;
    if (!v) throw SyntaxError("unknown variable name '" + vname + "'", 0);
    long long ram = j.at("ram").get<long long>();
    if (ram < 1) throw SyntaxError("ramification must be positive", 0);
    Series<K> s(*v, ram);
    if (j.contains("trunc") && !j.at("trunc").is_null()) s.trunc = j.at("trunc").get<long long>();
    for (const auto& t : j.at("terms")) {
        if (!t.is_array() || t.size() != 2) throw SyntaxError("series term must be [k, coef]", 0);
        long long k = t.at(0).get<long long>();
        K c = field_traits<K>::parse(t.at(1).get<std::string>());
        if (s.trunc && k >= *s.trunc)
            throw SyntaxError("term exponent breaches the declared bound", 0);
        s.add_term(k, c);
    }
    return s;
}

namespace detail {

template <class K>
Json components_to_json(const std::vector<Component<K>>& comps) {
    Json arr = Json::array();
    for (const auto& c : comps)
        arr.push_back(Json{{"series", series_to_json(c.f)}, {"jordan", c.m}});
    return arr;
}

template <class K>
std::vector<Component<K>> components_from_json(const Json& arr) {
    if (!arr.is_array()) throw SyntaxError("components must be an array", 0);
    std::vector<Component<K>> out;
    for (const auto& item : arr) {
        Component<K> c;
        c.f = series_from_json<K>(item.at("series"));
        c.m = item.value("jordan", 1LL);
        if (c.m < 1) throw SyntaxError("jordan size must be positive", 0);
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace detail

template <class K>
Json object_to_json(const ConnectionObject<K>& e) {
    Json out{{"kind", "connection"}, {"components", detail::components_to_json(e.components)}};
    if (e.point == Point::Finite) {
        std::string coef = e.x ? field_traits<K>::format(*e.x) : std::string("0");
        out["point"] = "x:" + coef;
    } else {
        out["point"] = point_name(e.point);
    }
    return out;
}

template <class K>
Json object_to_json(const DiffOpObject<K>& d) {
    return Json{{"kind", "diffop"}, {"components", detail::components_to_json(d.components)}};
}

template <class K>
ConnectionObject<K> connection_from_json(const Json& j) {
    if (j.value("kind", "") != "connection")
        throw KindMismatch("expected a connection object");
    ConnectionObject<K> e;
    std::string point = j.at("point").get<std::string>();
    if (point == "zero") {
        e.point = Point::Zero;
    } else if (point == "infinity") {
        e.point = Point::Infinity;
    } else if (point.rfind("x:", 0) == 0) {
        e.point = Point::Finite;
        e.x = field_traits<K>::parse(point.substr(2));
    } else {
        throw SyntaxError("unknown point tag '" + point + "'", 0);
    }
    e.components = detail::components_from_json<K>(j.at("components"));
    return e;
}

template <class K>
DiffOpObject<K> diffop_from_json(const Json& j) {
    if (j.value("kind", "") != "diffop")
        throw KindMismatch("expected an operator object");
    DiffOpObject<K> d;
    d.components = detail::components_from_json<K>(j.at("components"));
    return d;
}

}  // namespace mellin
