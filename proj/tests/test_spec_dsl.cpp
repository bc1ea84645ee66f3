#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <string>

#include "levyhjmm/spec_dsl.hpp"

using namespace levyhjmm;

namespace {

const std::string kMinimal = R"(
levy { kind = brownian  b = 0  c = 1 }
volatility {
  term {
    phi = constant(1)
    lambda = exp_poly(rho=0.1, theta=1)
  }
}
space { beta = 0.5  beta_prime = 1 }
)";

ModelSpec parse_ok(const std::string& text) {
    auto result = parse(text);
    if (auto* err = std::get_if<ParseError>(&result))
        FAIL("unexpected parse error: " << err->to_string());
    return std::get<ModelSpec>(result);
}

ParseError parse_err(const std::string& text) {
    auto result = parse(text);
    REQUIRE(std::holds_alternative<ParseError>(result));
    return std::get<ParseError>(result);
}

const char* corpus[] = {"vasicek.spec",  "cp_pointmass.spec", "cp_exponential.spec",
                        "merton.spec",   "gamma.spec",        "xexp.spec",
                        "sigmoid_cpexp.spec", "shortrate_lowdecay.spec", "tabulated.spec"};

} // namespace

TEST_CASE("minimal spec parses", "[dsl]") {
    const auto spec = parse_ok(kMinimal);
    REQUIRE(spec.levy.kind == LevyKind::brownian);
    REQUIRE(spec.levy.c == 1.0);
    REQUIRE(spec.volatility.size() == 1);
    REQUIRE(spec.volatility.front().phi.is_constant());
    REQUIRE(spec.volatility.front().lambda == ExpPoly::term(0.1, 1.0));
    REQUIRE(spec.space.beta == 0.5);
    REQUIRE(spec.k_lo == -0.5);  // defaults
    REQUIRE(spec.k_hi == 0.5);
    REQUIRE(spec.initial_curve.type == InitialCurve::Type::flat);
}

TEST_CASE("corpus files parse, print and re-parse identically", "[dsl]") {
    for (const char* name : corpus) {
        INFO(name);
        auto result = parse_file(std::string(SPECS_DIR) + "/" + name);
        REQUIRE(std::holds_alternative<ModelSpec>(result));
        const auto& spec = std::get<ModelSpec>(result);
        const std::string printed = print(spec);
        const auto reparsed = parse_ok(printed);
        REQUIRE(reparsed == spec);
        // print is a fixed point
        REQUIRE(print(reparsed) == printed);
    }
}

TEST_CASE("positioned errors", "[dsl]") {
    SECTION("non-numeric parameter value") {
        const std::string text = "levy { kind = brownian\n  b = 0\n  c = \"abc\" }\n"
                                 "volatility { term { phi = constant(1) "
                                 "lambda = exp_poly(rho=1, theta=1) } }\nspace { }";
        const auto err = parse_err(text);
        REQUIRE(err.line == 3);
        REQUIRE(err.col == 7);
        REQUIRE(err.message.find("must be a number") != std::string::npos);
    }
    SECTION("unexpected character") {
        const auto err = parse_err("levy { kind = brownian ; }");
        REQUIRE(err.line == 1);
        REQUIRE(err.col == 24);
    }
    SECTION("unterminated block") {
        const auto err = parse_err("levy { kind = brownian");
        REQUIRE(err.expected == std::vector<std::string>{"'}'"});
    }
    SECTION("unterminated string") {
        const auto err = parse_err("levy { kind = \"oops");
        REQUIRE(err.message.find("unterminated string") != std::string::npos);
    }
    SECTION("missing required block") {
        const auto err = parse_err("levy { kind = brownian c = 1 }");
        REQUIRE(err.message.find("volatility") != std::string::npos);
    }
    SECTION("unknown keys are rejected with their position") {
        const auto err = parse_err("levy { kind = brownian  c = 1  typo = 3 }\n"
                                   "volatility { term { phi = constant(1) "
                                   "lambda = exp_poly(rho=1, theta=1) } }\nspace { }");
        REQUIRE(err.message.find("unknown key 'typo'") != std::string::npos);
        REQUIRE(err.line == 1);
    }
    SECTION("duplicate keys are rejected") {
        const auto err = parse_err("levy { kind = brownian c = 1 c = 2 }\n"
                                   "volatility { term { phi = constant(1) "
                                   "lambda = exp_poly(rho=1, theta=1) } }\nspace { }");
        REQUIRE(err.message.find("duplicate key 'c'") != std::string::npos);
    }
    SECTION("version gate") {
        const auto err = parse_err("version = 2\n" + kMinimal);
        REQUIRE(err.message.find("version") != std::string::npos);
    }
    SECTION("deep nesting fails gracefully") {
        std::string text = "levy { kind = f";
        for (int i = 0; i < 400; ++i) text += "(g";
        const auto err = parse_err(text);
        REQUIRE(err.line >= 1);
    }
}

TEST_CASE("parser totality fuzz", "[dsl][fuzz]") {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> length(0, 256);
    std::uniform_int_distribution<int> byte(0, 255);
    // Also bias toward grammar-ish fragments so deeper parser paths run.
    const std::string tokens = "{}()=+,\"#ab_ 1.5e-\n";
    std::uniform_int_distribution<size_t> tok(0, tokens.size() - 1);
    std::bernoulli_distribution grammarish(0.5);

    for (int i = 0; i < 10000; ++i) {
        std::string text;
        const int n = length(rng);
        if (grammarish(rng))
            for (int j = 0; j < n; ++j) text.push_back(tokens[tok(rng)]);
        else
            for (int j = 0; j < n; ++j) text.push_back(static_cast<char>(byte(rng)));
        const auto result = parse(text);
        if (const auto* err = std::get_if<ParseError>(&result)) {
            REQUIRE(err->line >= 1);
            REQUIRE(err->col >= 1);
        }
    }
    SUCCEED("no crash on 10k fuzz inputs");
}

TEST_CASE("validate", "[dsl]") {
    SECTION("well-formed Vasicek spec has no diagnostics") {
        const auto spec = parse_ok(kMinimal);
        const auto diags = validate(spec);
        REQUIRE(diags.empty());
    }
    SECTION("beta ordering violation is an error") {
        auto spec = parse_ok(kMinimal);
        spec.space.beta_prime = 0.4;
        REQUIRE(has_errors(validate(spec)));
    }
    SECTION("K touching the domain boundary is an error") {
        const std::string text = R"(
levy { kind = compound_poisson  intensity = 1  jumps = exponential(rate=2) }
volatility { term { phi = constant(0.05) lambda = exp_poly(rho=1, theta=1) } }
space { }
k_interval { lo = -2  hi = 2 }
)";
        const auto diags = validate(parse_ok(text));
        REQUIRE(has_errors(diags));
        bool found = false;
        for (const auto& d : diags)
            if (d.message.find("D(Psi)") != std::string::npos) found = true;
        REQUIRE(found);
    }
    SECTION("K must contain 0 in its interior") {
        auto spec = parse_ok(kMinimal);
        spec.k_lo = 0.0;
        REQUIRE(has_errors(validate(spec)));
    }
    SECTION("worst-case integrated volatility must stay in K") {
        auto spec = parse_ok(kMinimal);
        spec.volatility.front().lambda = ExpPoly::term(2.0, 1.0);  // bound 2 > 0.5
        const auto diags = validate(spec);
        REQUIRE(has_errors(diags));
    }
    SECTION("slow decay in a direction is an error") {
        auto result = parse_file(std::string(SPECS_DIR) + "/shortrate_lowdecay.spec");
        const auto diags = validate(std::get<ModelSpec>(result));
        REQUIRE(has_errors(diags));
        bool found = false;
        for (const auto& d : diags)
            if (d.message.find("H^0") != std::string::npos) found = true;
        REQUIRE(found);
    }
    SECTION("degenerate model is an error") {
        auto spec = parse_ok(kMinimal);
        spec.levy.c = 0.0;  // c + F(R) = 0
        REQUIRE(has_errors(validate(spec)));
    }
    SECTION("undecayed bound at the horizon is a warning, not an error") {
        auto spec = parse_ok(kMinimal);
        spec.volatility.front().lambda = ExpPoly::term(0.1, 0.55);  // in H^0 but slow
        const auto diags = validate(spec);
        REQUIRE_FALSE(has_errors(diags));
        REQUIRE_FALSE(diags.empty());
        REQUIRE(diags.front().severity == Diagnostic::Severity::warning);
    }
    SECTION("tabulated direction is loaded and checked") {
        auto result = parse_file(std::string(SPECS_DIR) + "/tabulated.spec");
        REQUIRE(std::holds_alternative<ModelSpec>(result));
        REQUIRE_FALSE(has_errors(validate(std::get<ModelSpec>(result))));
    }
    SECTION("missing tabulated file is an error") {
        auto result = parse_file(std::string(SPECS_DIR) + "/tabulated.spec");
        auto spec = std::get<ModelSpec>(result);
        spec.volatility.front().tabulated_path = "curves/missing.csv";
        REQUIRE(has_errors(validate(spec)));
    }
    SECTION("validate is deterministic") {
        const auto spec = parse_ok(kMinimal);
        const auto a = validate(spec);
        const auto b = validate(spec);
        REQUIRE(a.size() == b.size());
    }
}

TEST_CASE("initial curve forms", "[dsl]") {
    SECTION("poly initial curve") {
        std::string text = kMinimal;
        text += "\ninitial_curve { poly = exp_poly(rho=0.02, theta=0.8) + "
                "exp_poly(rho=0.03, theta=2) }\n";
        const auto spec = parse_ok(text);
        REQUIRE(spec.initial_curve.type == InitialCurve::Type::exp_poly);
        REQUIRE(spec.initial_curve.poly.terms().size() == 2);
    }
    SECTION("exactly one of flat, poly, file") {
        std::string text = kMinimal;
        text += "\ninitial_curve { flat = 0.03 file = \"x.csv\" }\n";
        const auto err = parse_err(text);
        REQUIRE(err.message.find("exactly one") != std::string::npos);
    }
}
