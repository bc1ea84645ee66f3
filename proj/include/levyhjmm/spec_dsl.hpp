#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "levyhjmm/model_spec.hpp"

namespace levyhjmm {

// =============================================================================
// Model specification files
//
// Line-oriented key-value blocks with nested sections:
//
//     version = 1
//     levy       { kind = compound_poisson  b = 0  c = 0
//                  intensity = 5  jumps = exponential(rate=5) }
//     volatility { term { phi = constant(1)
//                         lambda = exp_poly(rho=0.1, theta=1) } }
//     space      { beta = 0.5  beta_prime = 1  x_max = 20  n_grid = 512 }
//     k_interval { lo = -0.5  hi = 0.5 }          # optional
//     initial_curve { flat = 0.03 }               # optional
//
// `#` starts a comment. Values are numbers, quoted strings, identifiers,
// calls `name(arg, key=arg, ...)`, and `+`-sums of calls (for exp_poly).
// The parser is total: every byte string yields a ModelSpec or a positioned
// ParseError.
// =============================================================================

struct ParseError {
    std::string message;
    int line = 0;  // 1-based
    int col = 0;   // 1-based
    std::vector<std::string> expected;

    std::string to_string() const;
};

using ParseResult = std::variant<ModelSpec, ParseError>;

ParseResult parse(std::string_view text);

/// Parse a file; on success the spec's base_dir is set to the file's
/// directory so relative curve references resolve.
ParseResult parse_file(const std::string& path);

/// Canonical textual form; parse(print(spec)) reproduces the spec exactly.
std::string print(const ModelSpec& spec);

struct Diagnostic {
    enum class Severity { error, warning };
    Severity severity = Severity::error;
    std::string message;
};

/// Semantic checks on a parsed spec:
///   - the curve-space constants satisfy 0 < beta < beta_prime,
///   - the Levy model invariants hold,
///   - K has 0 in its interior and K is contained in D(Psi),
///   - each volatility direction lies in H^0_{beta'},
///   - the worst-case integrated volatility bound stays inside K
///     (sound over-approximation of "for all h in H_beta" via the Phi bounds).
/// Violations are errors; grid-horizon caveats are warnings.
std::vector<Diagnostic> validate(const ModelSpec& spec);

bool has_errors(const std::vector<Diagnostic>& diagnostics);

} // namespace levyhjmm
