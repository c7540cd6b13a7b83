#include "mellin/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mellin/errors.hpp"
#include "mellin/field.hpp"
#include "mellin/json_io.hpp"
#include "mellin/objects.hpp"
#include "mellin/oracle.hpp"
#include "mellin/parser.hpp"
#include "mellin/transform.hpp"
#include "mellin/weyl.hpp"

namespace mellin {
namespace {

struct CliOptions {
    // Global configuration (CliConfig): scalar field, numeric knobs, output.
    std::string field = "qq";
    unsigned precision_bits = 192;
    double tolerance = 1e-20;
    std::string format = "text";
    long long margin = 2;
    long long branch = 0;

    // Per-subcommand inputs.
    std::string sub;          // selected subcommand
    std::string point_tag;    // --from / --to
    std::string series_text;  // --f single-component shortcut
    std::string in_path;      // --in object JSON file
    std::string x_text;       // --x expansion point for zx shortcuts
    std::string expr;         // --expr (ord / global / parse)
    std::string eps_text;     // --eps norm base
    std::string check;        // --check oracle selector
    long long n = 1;          // derivation exponent for oracle checks
    long long m = 2;          // binomial power
    long long p = 2;          // root index
    std::string file_a, file_b;  // equiv positionals
};

// Restores the global field configuration when a CLI invocation ends, so
// embedding callers (tests) are not affected by --field/--tol switches.
struct ConfigRestore {
    FieldConfig saved = current_config();
    ~ConfigRestore() { saved.activate(); }
};

void emit_error(std::ostream& err, const CliOptions& o, const std::string& code,
                const std::string& message) {
    if (o.format == "json") {
        err << Json{{"error", {{"code", code}, {"message", message}}}}.dump() << "\n";
    } else {
        err << "error: " << message << "\n";
    }
}

Json load_json_file(const std::string& path) {
    std::ifstream fin(path);
    if (!fin) throw SyntaxError("cannot open input file '" + path + "'", 0);
    try {
        return Json::parse(fin);
    } catch (const Json::exception& e) {
        throw SyntaxError(std::string("invalid JSON in '") + path + "': " + e.what(), 0);
    }
}

struct PointSpec {
    Point point = Point::Zero;
    std::string coef;  // Finite only
};

PointSpec parse_point_tag(const std::string& tag) {
    if (tag == "0") return {Point::Zero, {}};
    if (tag == "inf") return {Point::Infinity, {}};
    if (tag.rfind("x=", 0) == 0 && tag.size() > 2) return {Point::Finite, tag.substr(2)};
    throw SyntaxError("expansion point must be one of 0, inf, x=<coef>", 0);
}

Var connection_var(Point p) {
    switch (p) {
        case Point::Zero: return Var::Z;
        case Point::Finite: return Var::Zx;
        case Point::Infinity: return Var::Zeta;
    }
    return Var::Z;
}

template <class K>
ConnectionObject<K> connection_input(const CliOptions& o, const PointSpec& at) {
    if (!o.in_path.empty()) return connection_from_json<K>(load_json_file(o.in_path));
    if (o.series_text.empty())
        throw SyntaxError("provide the object via --in <file> or --f <series>", 0);
    ConnectionObject<K> e;
    e.point = at.point;
    if (at.point == Point::Finite) e.x = field_traits<K>::parse(at.coef);
    Series<K> f = parse_series<K>(o.series_text);
    // A bare constant mentions no variable and parses with the default one;
    // retarget it to the variable the expansion point expects.
    bool constant = true;
    for (auto& [k, c] : f.terms) constant = constant && k == 0;
    if (constant) f.var = connection_var(at.point);
    e.components.push_back({std::move(f), 1});
    return e;
}

template <class K>
DiffOpObject<K> diffop_input(const CliOptions& o) {
    if (!o.in_path.empty()) return diffop_from_json<K>(load_json_file(o.in_path));
    if (o.series_text.empty())
        throw SyntaxError("provide the object via --in <file> or --f <series>", 0);
    DiffOpObject<K> d;
    d.components.push_back({parse_series<K>(o.series_text), 1});
    return d;
}

template <class K>
void print_components(std::ostream& out, const std::vector<Component<K>>& comps) {
    for (const auto& c : comps) {
        out << format_series(c.f);
        if (c.m != 1) out << "  [jordan " << c.m << "]";
        out << "\n";
    }
}

template <class K>
void emit_object(std::ostream& out, const CliOptions& o, const ConnectionObject<K>& e) {
    if (o.format == "json")
        out << object_to_json(e).dump() << "\n";
    else
        print_components(out, e.components);
}

template <class K>
void emit_object(std::ostream& out, const CliOptions& o, const DiffOpObject<K>& d) {
    if (o.format == "json")
        out << object_to_json(d).dump() << "\n";
    else
        print_components(out, d.components);
}

std::optional<Rational> parse_eps(const std::string& text) {
    if (text.empty()) return std::nullopt;
    return field_traits<Rational>::parse(text);
}

std::string rational_text(const Rational& r) { return field_traits<Rational>::format(r); }

Json report_to_json(const OracleReport& rep) {
    Json params = Json::object();
    for (const auto& [key, value] : rep.params) params[key] = value;
    Json out{{"check", rep.check}, {"params", std::move(params)}};
    out["certified_order"] = rep.certified_order ? Json(rational_text(*rep.certified_order))
                                                 : Json(nullptr);
    out["required_order"] = rep.required_order ? Json(rational_text(*rep.required_order))
                                               : Json(nullptr);
    out["pass"] = rep.pass;
    return out;
}

// Component pairing identical to the equivalence test, but collecting the
// unit-power witness for each matched pair.
template <class K>
std::optional<std::vector<long long>> match_witnesses(const std::vector<Component<K>>& lhs,
                                                      const std::vector<Component<K>>& rhs) {
    if (lhs.size() != rhs.size()) return std::nullopt;
    std::vector<bool> used(rhs.size(), false);
    std::vector<long long> out;
    for (const auto& a : lhs) {
        bool found = false;
        for (std::size_t i = 0; i < rhs.size() && !found; ++i) {
            if (used[i]) continue;
            const auto& b = rhs[i];
            if (a.m != b.m || a.ram() != b.ram()) continue;
            if (auto j = galois_witness(a.f, b.f, a.ram())) {
                used[i] = true;
                found = true;
                out.push_back(*j);
            }
        }
        if (!found) return std::nullopt;
    }
    return out;
}

template <class K>
void emit_equivalence(std::ostream& out, const CliOptions& o,
                      const std::optional<std::vector<long long>>& witness) {
    if (o.format == "json") {
        Json j{{"equivalent", witness.has_value()}};
        j["witness"] = witness ? Json(*witness) : Json(nullptr);
        out << j.dump() << "\n";
        return;
    }
    out << (witness ? "true" : "false") << "\n";
    if (witness) {
        out << "witness:";
        for (long long w : *witness) out << " " << w;
        out << "\n";
    }
}

void emit_order_report(std::ostream& out, const CliOptions& o, const OrderReport& rep) {
    if (o.format == "json") {
        Json entries = Json::array();
        for (const auto& e : rep.entries) {
            Json item{{"order", rational_text(e.order)}};
            if (e.norm) {
                Json norm{{"epsilon", rational_text(e.norm->epsilon)},
                          {"exponent", rational_text(e.norm->exponent)}};
                norm["value"] = e.norm->value ? Json(rational_text(*e.norm->value)) : Json(nullptr);
                item["norm"] = std::move(norm);
            } else {
                item["norm"] = nullptr;
            }
            entries.push_back(std::move(item));
        }
        out << Json{{"entries", std::move(entries)}}.dump() << "\n";
        return;
    }
    for (const auto& e : rep.entries) {
        out << "order " << rational_text(e.order);
        if (e.norm) {
            out << "  norm " << rational_text(e.norm->epsilon) << "^("
                << rational_text(e.norm->exponent) << ")";
            if (e.norm->value) out << " = " << rational_text(*e.norm->value);
        }
        out << "\n";
    }
}

OperatorExpr parse_operator_expr(const std::string& token) {
    for (OperatorExpr e : {OperatorExpr::Nabla, OperatorExpr::ZNabla, OperatorExpr::ZNablaInverse,
                           OperatorExpr::Phi, OperatorExpr::ThetaPhiInverse})
        if (token == operator_expr_name(e)) return e;
    throw SyntaxError("unknown operator expression '" + token + "'", 0);
}

// For canon/ord the object kind is taken from the JSON, or inferred from the
// shortcut series' variable: theta names an operator symbol, the others name a
// connection at the matching point (zx requires --x).
template <class K, class ConnFn, class DiffFn>
int dispatch_object(const CliOptions& o, ConnFn&& on_connection, DiffFn&& on_diffop) {
    if (!o.in_path.empty()) {
        Json j = load_json_file(o.in_path);
        std::string kind = j.value("kind", "");
        if (kind == "connection") return on_connection(connection_from_json<K>(j));
        if (kind == "diffop") return on_diffop(diffop_from_json<K>(j));
        throw SyntaxError("object kind must be 'connection' or 'diffop'", 0);
    }
    if (o.series_text.empty())
        throw SyntaxError("provide the object via --in <file> or --f <series>", 0);
    Series<K> s = parse_series<K>(o.series_text);
    if (s.var == Var::Theta) {
        DiffOpObject<K> d;
        d.components.push_back({std::move(s), 1});
        return on_diffop(d);
    }
    ConnectionObject<K> e;
    switch (s.var) {
        case Var::Z: e.point = Point::Zero; break;
        case Var::Zeta: e.point = Point::Infinity; break;
        default:
            e.point = Point::Finite;
            if (o.x_text.empty())
                throw SyntaxError("series in zx needs --x <coef> for the expansion point", 0);
            e.x = field_traits<K>::parse(o.x_text);
            break;
    }
    e.components.push_back({std::move(s), 1});
    return on_connection(e);
}

template <class K>
OracleReport run_oracle_check(const CliOptions& o) {
    if (o.check == "roundtrip") {
        PointSpec at = parse_point_tag(o.point_tag.empty() ? "0" : o.point_tag);
        ConnectionObject<K> e = connection_input<K>(o, at);
        TransformOptions topt{o.margin, o.branch};
        OracleReport rep;
        rep.check = "roundtrip";
        rep.params = {{"point", at.point == Point::Finite ? "x=" + at.coef
                                                          : (at.point == Point::Zero ? "0" : "inf")}};
        if (!o.series_text.empty()) rep.params.emplace_back("f", o.series_text);
        switch (at.point) {
            case Point::Zero:
                rep.pass = iso_equivalent(inverse_mellin_0_inf(mellin_0_inf(e, topt), topt), e);
                break;
            case Point::Finite: {
                K x = *e.x;
                rep.pass = iso_equivalent(inverse_mellin_x_inf(mellin_x_inf(e, topt), x, topt), e);
                break;
            }
            case Point::Infinity:
                rep.pass = iso_equivalent(inverse_mellin_inf_inf(mellin_inf_inf(e, topt), topt), e);
                break;
        }
        return rep;
    }

    if (o.series_text.empty()) throw SyntaxError("oracle checks need --f <series>", 0);
    Series<K> f = parse_series<K>(o.series_text);
    OracleReport rep;
    if (o.check == "lemma51") {
        rep = check_binomial_expansion(f, o.n, o.m);
    } else if (o.check == "lemma51-root") {
        rep = check_operator_root(f, o.n, o.p);
    } else if (o.check == "commutation") {
        rep = check_commutation(f);
    } else if (o.check == "exp103") {
        rep = check_inverse_expansion(f);
    } else {
        throw SyntaxError("unknown oracle check '" + o.check + "'", 0);
    }
    rep.check = o.check;  // report under the requested name
    return rep;
}

template <class K>
int run_typed(const CliOptions& o, std::ostream& out, std::ostream& err) {
    TransformOptions topt{o.margin, o.branch};

    if (o.sub == "parse") {
        Series<K> s = parse_series<K>(o.expr);
        if (o.format == "json")
            out << series_to_json(s).dump() << "\n";
        else
            out << format_series(s) << "\n";
        return 0;
    }

    if (o.sub == "transform") {
        PointSpec at = parse_point_tag(o.point_tag);
        ConnectionObject<K> e = connection_input<K>(o, at);
        DiffOpObject<K> d;
        switch (at.point) {
            case Point::Zero: d = mellin_0_inf(e, topt); break;
            case Point::Finite: d = mellin_x_inf(e, topt); break;
            case Point::Infinity: d = mellin_inf_inf(e, topt); break;
        }
        emit_object(out, o, d);
        return 0;
    }

    if (o.sub == "inverse") {
        PointSpec at = parse_point_tag(o.point_tag);
        DiffOpObject<K> d = diffop_input<K>(o);
        ConnectionObject<K> e;
        switch (at.point) {
            case Point::Zero: e = inverse_mellin_0_inf(d, topt); break;
            case Point::Finite:
                e = inverse_mellin_x_inf(d, field_traits<K>::parse(at.coef), topt);
                break;
            case Point::Infinity: e = inverse_mellin_inf_inf(d, topt); break;
        }
        emit_object(out, o, e);
        return 0;
    }

    if (o.sub == "canon") {
        return dispatch_object<K>(
            o,
            [&](const ConnectionObject<K>& e) {
                emit_object(out, o, canonicalize(e));
                return 0;
            },
            [&](const DiffOpObject<K>& d) {
                emit_object(out, o, canonicalize(d));
                return 0;
            });
    }

    if (o.sub == "equiv") {
        Json ja = load_json_file(o.file_a);
        Json jb = load_json_file(o.file_b);
        std::string kind = ja.value("kind", "");
        if (kind != jb.value("kind", ""))
            throw KindMismatch("cannot compare objects of different kinds");
        std::optional<std::vector<long long>> witness;
        if (kind == "connection") {
            ConnectionObject<K> a = connection_from_json<K>(ja);
            ConnectionObject<K> b = connection_from_json<K>(jb);
            if (a.point != b.point) throw KindMismatch("objects expand at different points");
            if (a.point == Point::Finite &&
                (!a.x || !b.x || !field_traits<K>::equal(*a.x, *b.x)))
                throw KindMismatch("objects expand at different finite points");
            witness = match_witnesses(canonicalize(a).components, canonicalize(b).components);
        } else if (kind == "diffop") {
            DiffOpObject<K> a = diffop_from_json<K>(ja);
            DiffOpObject<K> b = diffop_from_json<K>(jb);
            witness = match_witnesses(canonicalize(a).components, canonicalize(b).components);
        } else {
            throw SyntaxError("object kind must be 'connection' or 'diffop'", 0);
        }
        emit_equivalence<K>(out, o, witness);
        return 0;
    }

    if (o.sub == "ord") {
        OperatorExpr expr = parse_operator_expr(o.expr);
        std::optional<Rational> eps = parse_eps(o.eps_text);
        return dispatch_object<K>(
            o,
            [&](const ConnectionObject<K>& e) {
                emit_order_report(out, o, order_report(e, expr, eps));
                return 0;
            },
            [&](const DiffOpObject<K>& d) {
                emit_order_report(out, o, order_report(d, expr, eps));
                return 0;
            });
    }

    if (o.sub == "global") {
        TargetElement<K> image = global_mellin(parse_weyl<K>(o.expr));
        if (o.format == "json")
            out << Json{{"result", format_weyl(image)}}.dump() << "\n";
        else
            out << format_weyl(image) << "\n";
        return 0;
    }

    if (o.sub == "oracle") {
        OracleReport rep = run_oracle_check<K>(o);
        Json j = report_to_json(rep);
        if (o.format == "json") {
            out << j.dump() << "\n";
        } else {
            out << (rep.pass ? "PASS" : "FAIL") << "\n" << j.dump() << "\n";
        }
        return rep.pass ? 0 : 1;
    }

    err << "error: no subcommand selected\n";
    return 2;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CliOptions o;
    CLI::App app{"Local formal Mellin transforms for exponential-type series connections"};
    app.fallthrough();
    app.require_subcommand(1);
    app.add_option("--field", o.field, "scalar field: qq (exact rationals) or cc (numeric)")
        ->envname("MELLIN_FIELD")
        ->check(CLI::IsMember({"qq", "cc"}));
    app.add_option("--precision-bits", o.precision_bits, "working precision in numeric mode");
    app.add_option("--tol", o.tolerance, "comparison tolerance in numeric mode");
    app.add_option("--format", o.format, "output format")->check(CLI::IsMember({"text", "json"}));
    app.add_option("--margin", o.margin, "extra certified exponent units for transforms");
    app.add_option("--branch", o.branch, "root branch selector for fractional powers");

    auto add_object_inputs = [&](CLI::App* cmd) {
        cmd->add_option("--f", o.series_text, "single-component series shortcut (jordan size 1)");
        cmd->add_option("--in", o.in_path, "object JSON file");
    };

    CLI::App* t = app.add_subcommand("transform", "forward transform of a connection object");
    t->add_option("--from", o.point_tag, "expansion point: 0, inf, or x=<coef>")->required();
    add_object_inputs(t);

    CLI::App* inv = app.add_subcommand("inverse", "inverse transform of an operator object");
    inv->add_option("--to", o.point_tag, "target expansion point: 0, inf, or x=<coef>")
        ->required();
    add_object_inputs(inv);

    CLI::App* canon = app.add_subcommand("canon", "canonical form of an object");
    add_object_inputs(canon);
    canon->add_option("--x", o.x_text, "expansion point for a zx series shortcut");

    CLI::App* equiv = app.add_subcommand("equiv", "isomorphism test between two object files");
    equiv->add_option("a", o.file_a, "first object JSON file")->required();
    equiv->add_option("b", o.file_b, "second object JSON file")->required();

    CLI::App* ord = app.add_subcommand("ord", "spectral order report for an object");
    ord->add_option("--expr", o.expr,
                    "operator expression: nabla, znabla, znabla-inv, phi, thetaphi-inv")
        ->required();
    ord->add_option("--eps", o.eps_text, "norm base in (0,1), e.g. 1/2");
    add_object_inputs(ord);
    ord->add_option("--x", o.x_text, "expansion point for a zx series shortcut");

    CLI::App* glob = app.add_subcommand("global", "image of a Weyl-algebra element");
    glob->add_option("--expr", o.expr, "expression in z and D, e.g. \"z*z*D\"")->required();

    CLI::App* orc = app.add_subcommand("oracle", "independent matrix-window verification");
    orc->add_option("--check", o.check,
                    "one of lemma51, lemma51-root, commutation, exp103, roundtrip")
        ->required();
    orc->add_option("--f", o.series_text, "series parameter for the check");
    orc->add_option("--from", o.point_tag, "expansion point for roundtrip (default 0)");
    orc->add_option("--n", o.n, "derivation exponent (default 1)");
    orc->add_option("--m", o.m, "expansion power (default 2)");
    orc->add_option("--p", o.p, "root index (default 2)");

    CLI::App* parse = app.add_subcommand("parse", "parse and reprint a series expression");
    parse->add_option("--expr", o.expr, "series text")->required();

    for (CLI::App* cmd : {t, inv, canon, equiv, ord, glob, orc, parse})
        cmd->callback([&o, cmd] { o.sub = cmd->get_name(); });

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("mellin");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        emit_error(err, o, "UsageError", e.what());
        return 2;
    }

    ConfigRestore restore;
    try {
        FieldConfig cfg;
        cfg.mode = o.field == "cc" ? FieldMode::Approx : FieldMode::Exact;
        cfg.precision_bits = o.precision_bits;
        cfg.tolerance = o.tolerance;
        cfg.activate();
        if (o.field == "cc") return run_typed<Complex>(o, out, err);
        return run_typed<Rational>(o, out, err);
    } catch (const ParseError& e) {
        emit_error(err, o, e.code(), e.what());
        return 2;
    } catch (const DomainError& e) {
        emit_error(err, o, e.code(), e.what());
        return 1;
    } catch (const Error& e) {
        emit_error(err, o, e.code(), e.what());
        return 1;
    } catch (const std::invalid_argument& e) {
        emit_error(err, o, "InvalidArgument", e.what());
        return 2;
    }
}

int cli_main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(args, std::cout, std::cerr);
}

}  // namespace mellin
