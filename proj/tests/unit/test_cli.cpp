#include <doctest.h>

#include <array>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mellin/cli.hpp"
#include "mellin/json_io.hpp"
#include "mellin/objects.hpp"
#include "mellin/parser.hpp"
#include "test_support.hpp"

using namespace mellin;
using mellin::testing::rand_int;
using mellin::testing::rand_series;

namespace {

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

std::filesystem::path temp_file(const std::string& name, const std::string& contents) {
    auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream fout(path);
    fout << contents;
    return path;
}

}  // namespace

TEST_SUITE("cli") {
    TEST_CASE("forward transform prints the canonical class") {
        CliResult r = cli({"transform", "--from", "0", "--f", "-1/1*z^(-1)"});
        CHECK(r.code == 0);
        CHECK(r.out == "theta\n");

        // Linear coefficients reduce into the canonical window: class of
        // -a*theta + a*theta^2 collapses to -a*theta for integral shifts.
        CliResult r2 = cli({"transform", "--from", "0", "--f", "-2*z^(-1)"});
        CHECK(r2.code == 0);
        CHECK(r2.out == "2*theta\n");

        CliResult r3 = cli({"transform", "--from", "0", "--f", "-1/1*z^(-2)"});
        CHECK(r3.code == 0);
        CHECK(r3.out == "theta^(1/2) + 1/4*theta^(3/2)\n");
    }

    TEST_CASE("finite-point transform accepts bare constants") {
        CliResult r = cli({"transform", "--from", "x=2", "--f", "1/3"});
        CHECK(r.code == 0);
        CHECK(r.out == "2 + 4/3*theta\n");
    }

    TEST_CASE("global mellin image of a weyl expression") {
        CliResult r = cli({"global", "--expr", "z*z*D"});
        CHECK(r.code == 0);
        CHECK(r.out == "-n*P - P\n");

        CliResult r2 = cli({"global", "--expr", "z*D - D*z"});
        CHECK(r2.code == 0);
        CHECK(r2.out == "-1\n");
    }

    TEST_CASE("inverse transform undoes the forward example") {
        CliResult r = cli({"inverse", "--to", "0", "--f", "theta"});
        CHECK(r.code == 0);
        CHECK(r.out == format_series(parse_series<Rational>("-1/1*z^(-1)")) + "\n");
    }

    TEST_CASE("canonicalization trims to the class representative") {
        CliResult r = cli({"canon", "--f", "-1/1*z^(-1) - 2*z + 3"});
        CHECK(r.code == 0);
        CHECK(r.out == "-z^(-1)\n");

        CliResult r2 = cli({"canon", "--f", "theta - theta^(2)"});
        CHECK(r2.code == 0);
        CHECK(r2.out == "theta\n");
    }

    TEST_CASE("order reports with and without the norm") {
        CliResult r = cli({"ord", "--expr", "phi", "--f", "theta", "--eps", "1/2"});
        CHECK(r.code == 0);
        CHECK(r.out == "order 1  norm 1/2^(1) = 1/2\n");

        CliResult r2 = cli({"ord", "--expr", "nabla", "--f", "-1/1*z^(-2)", "--eps", "1/2"});
        CHECK(r2.code == 0);
        CHECK(r2.out == "order -3  norm 1/2^(-3) = 8\n");

        CliResult r3 = cli({"ord", "--expr", "thetaphi-inv", "--f", "theta"});
        CHECK(r3.code == 0);
        CHECK(r3.out == "order -2\n");

        // Connection expressions reject operator objects (and vice versa).
        CliResult bad = cli({"ord", "--expr", "phi", "--f", "-1/1*z^(-1)"});
        CHECK(bad.code == 1);
    }

    TEST_CASE("oracle checks report pass and map failures to exit codes") {
        CliResult r = cli({"oracle", "--check", "commutation", "--f", "-z^(-1)"});
        CHECK(r.code == 0);
        REQUIRE(r.out.rfind("PASS\n", 0) == 0);
        Json rep = Json::parse(r.out.substr(5));
        CHECK(rep.at("check") == "commutation");
        CHECK(rep.at("pass") == true);
        CHECK(rep.contains("certified_order"));
        CHECK(rep.contains("required_order"));
        CHECK(rep.at("params").contains("f"));

        CliResult root = cli({"oracle", "--check", "lemma51-root", "--f", "z^(-2)", "--p", "2",
                              "--format", "json"});
        CHECK(root.code == 0);
        CHECK(Json::parse(root.out).at("check") == "lemma51-root");

        CliResult trip = cli({"oracle", "--check", "roundtrip", "--from", "inf", "--f",
                              "-1/1*zeta^(-2)", "--format", "json"});
        CHECK(trip.code == 0);
        CHECK(Json::parse(trip.out).at("pass") == true);

        // Hypothesis violations are domain errors.
        CliResult bad = cli({"oracle", "--check", "lemma51", "--f", "z"});
        CHECK(bad.code == 1);
    }

    TEST_CASE("parse reprints canonically and roundtrips a generated corpus") {
        CliResult r = cli({"parse", "--expr", "-z^(-2) + 3/2*z^(-1/2)"});
        CHECK(r.code == 0);
        CHECK(r.out == "-z^(-2) + 3/2*z^(-1/2)\n");

        std::mt19937_64 gen(20260823);
        int rounds = 0;
        while (rounds < 50) {
            Var v = std::array{Var::Z, Var::Zx, Var::Zeta, Var::Theta}[rand_int(gen, 0, 3)];
            Series<Rational> s =
                rand_series<Rational>(gen, v, rand_int(gen, 1, 3), -6, 6, 5, true);
            std::string text = format_series(s);
            CliResult round = cli({"parse", "--expr", text});
            REQUIRE(round.code == 0);
            CHECK(round.out == text + "\n");  // format after parse is the identity here
            ++rounds;
        }
    }

    TEST_CASE("object json output reloads bit-identically") {
        CliResult made =
            cli({"transform", "--from", "0", "--f", "-1/1*z^(-2)", "--format", "json"});
        REQUIRE(made.code == 0);
        auto path = temp_file("cli_roundtrip.json", made.out);

        CliResult once = cli({"canon", "--in", path.string(), "--format", "json"});
        REQUIRE(once.code == 0);
        auto path2 = temp_file("cli_roundtrip2.json", once.out);
        CliResult twice = cli({"canon", "--in", path2.string(), "--format", "json"});
        REQUIRE(twice.code == 0);
        CHECK(once.out == twice.out);

        DiffOpObject<Rational> d = diffop_from_json<Rational>(Json::parse(twice.out));
        REQUIRE(d.components.size() == 1);
        CHECK(format_series(d.components[0].f) == "theta^(1/2) + 1/4*theta^(3/2)");
    }

    TEST_CASE("equivalence prints the unit-power witness") {
        CliResult made =
            cli({"transform", "--from", "0", "--f", "-1/1*z^(-2)", "--format", "json"});
        REQUIRE(made.code == 0);
        DiffOpObject<Rational> d = diffop_from_json<Rational>(Json::parse(made.out));
        REQUIRE(d.components.size() == 1);

        // The degree-2 unit action negates both window coefficients.
        DiffOpObject<Rational> acted = d;
        auto img = galois_act(d.components[0].f, 1, 2);
        REQUIRE(img.has_value());
        acted.components[0].f = *img;

        auto pa = temp_file("cli_equiv_a.json", made.out);
        auto pb = temp_file("cli_equiv_b.json", object_to_json(acted).dump());
        CliResult eq = cli({"equiv", pa.string(), pb.string()});
        CHECK(eq.code == 0);
        CHECK(eq.out == "true\nwitness: 1\n");

        CliResult eqj = cli({"equiv", pa.string(), pb.string(), "--format", "json"});
        CHECK(Json::parse(eqj.out).at("witness") == Json::array({1}));

        DiffOpObject<Rational> other;
        other.components.push_back({parse_series<Rational>("theta"), 1});
        auto pc = temp_file("cli_equiv_c.json", object_to_json(other).dump());
        CliResult ne = cli({"equiv", pa.string(), pc.string()});
        CHECK(ne.code == 0);
        CHECK(ne.out == "false\n");
    }

    TEST_CASE("numeric field mode via flag and environment") {
        CliResult r = cli({"--field", "cc", "transform", "--from", "0", "--f", "-2*z^(-2)"});
        CHECK(r.code == 0);
        CHECK(r.out.find("theta^(1/2)") != std::string::npos);
        CHECK(r.out.find("1.4142135623730950488") != std::string::npos);  // sqrt(2)
        CHECK(current_config().mode == FieldMode::Exact);  // restored afterwards

        ::setenv("MELLIN_FIELD", "cc", 1);
        CliResult env = cli({"parse", "--expr", "1/2*z"});
        ::unsetenv("MELLIN_FIELD");
        CHECK(env.code == 0);
        CHECK(env.out.find("0.5") != std::string::npos);
    }

    TEST_CASE("exit codes distinguish usage and domain failures") {
        CHECK(cli({"transform", "--from", "0", "--f", "z + theta"}).code == 2);  // mixed vars
        CHECK(cli({"transform", "--from", "0", "--f", "2*z"}).code == 1);   // wrong slope
        CHECK(cli({"transform", "--from", "7", "--f", "-1/1*z^(-1)"}).code == 2);  // bad point
        CHECK(cli({"transform"}).code == 2);                  // missing required --from
        CHECK(cli({"frobnicate"}).code == 2);                 // unknown subcommand
        CHECK(cli({}).code == 2);                             // no subcommand
        CHECK(cli({"ord", "--expr", "wat", "--f", "theta"}).code == 2);
        CHECK(cli({"equiv", "/nonexistent/a.json", "/nonexistent/b.json"}).code == 2);

        CliResult help = cli({"--help"});
        CHECK(help.code == 0);
        CHECK(help.out.find("SUBCOMMAND") != std::string::npos);

        // Errors are machine-readable under --format json.
        CliResult jerr = cli({"transform", "--from", "0", "--f", "2*z", "--format", "json"});
        CHECK(jerr.code == 1);
        Json parsed = Json::parse(jerr.err);
        CHECK(parsed.at("error").at("code") == "SlopeNotPositive");
    }
}
