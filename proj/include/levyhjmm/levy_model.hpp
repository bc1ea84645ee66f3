#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

namespace levyhjmm {

// =============================================================================
// Square-integrable parametric Levy models
//
// The driving process X has drift b, Gaussian variance rate c >= 0 and a
// parametric jump measure F. Its cumulant generating function is
//
//     Psi(z) = b z + (c/2) z^2 + integral (e^{zx} - 1 - z x) F(dx)
//
// on D(Psi) = { z : integral_{|x|>1} e^{zx} F(dx) < infinity }. All kinds
// below have closed forms for Psi, Psi', the moments of F and D(Psi).
// =============================================================================

enum class JumpKind { point_mass, exponential, normal };

/// Jump size distribution of a compound Poisson part (a probability measure).
struct JumpDistribution {
    JumpKind kind = JumpKind::point_mass;
    double x0 = 1.0;     // point_mass: jump size
    double rate = 1.0;   // exponential: rate gamma > 0, density gamma e^{-gamma x} on x > 0
    double mean = 0.0;   // normal: mean
    double sd = 1.0;     // normal: standard deviation

    static JumpDistribution point_mass(double x0);
    static JumpDistribution exponential(double rate);
    static JumpDistribution normal(double mean, double sd);

    double mgf(double z) const;             // E[e^{zJ}]
    double mgf_derivative(double z) const;  // E[J e^{zJ}]
    double mean_value() const;              // E[J]
    double moment(int n) const;             // E[J^n]
    double moment_magnitude(int n) const;   // scale for zero tests, >= |moment(n)|

    bool operator==(const JumpDistribution&) const = default;
};

enum class LevyKind { brownian, compound_poisson, merton, gamma, bilateral_gamma };

struct LevyModel {
    LevyKind kind = LevyKind::brownian;
    double b = 0.0;  // drift per unit time (under the pricing measure)
    double c = 0.0;  // Gaussian variance rate, >= 0

    // compound_poisson / merton
    double intensity = 0.0;
    JumpDistribution jumps;

    // gamma subordinator part: F(dx) = shape x^{-1} e^{-rate x} dx on x > 0
    double shape = 0.0;
    double rate = 1.0;
    // bilateral_gamma: independent upward/downward gamma parts
    double shape_pos = 0.0, rate_pos = 1.0;
    double shape_neg = 0.0, rate_neg = 1.0;

    static LevyModel brownian(double b, double c);
    static LevyModel compound_poisson(double b, double c, double intensity,
                                      JumpDistribution jumps);
    static LevyModel merton(double b, double c, double intensity, double jump_mean,
                            double jump_sd);
    static LevyModel gamma_process(double b, double c, double shape, double rate);
    static LevyModel bilateral_gamma(double b, double c, double shape_pos, double rate_pos,
                                     double shape_neg, double rate_neg);

    /// Model invariant violations (empty when the model is admissible).
    std::vector<std::string> check() const;

    /// Total jump mass F(R); +infinity for the infinite-activity kinds.
    double total_jump_mass() const;

    std::string kind_name() const;

    bool operator==(const LevyModel&) const = default;
};

/// Open interval D(Psi); bounds are -inf/+inf where the domain is unbounded.
struct CumulantDomain {
    double lo;
    double hi;
};

CumulantDomain cumulant_domain(const LevyModel& model);

/// [z_lo, z_hi] subset of D(Psi)?
bool domain_contains(const LevyModel& model, double z_lo, double z_hi);

/// Psi(z). Throws DomainError for z outside D(Psi).
double cumulant(const LevyModel& model, double z);

/// Psi'(z) = b + c z + integral x (e^{zx} - 1) F(dx). Throws DomainError.
double cumulant_derivative(const LevyModel& model, double z);

/// n-th moment of the jump measure, integral x^n F(dx), n >= 1.
double levy_moment(const LevyModel& model, int n);

/// Magnitude scale for levy_moment zero tests (sum of absolute contributions).
double levy_moment_magnitude(const LevyModel& model, int n);

// =============================================================================
// Taylor expansion of Psi at 0:  Psi(z) = sum a_n z^n,
//   a_0 = 0, a_1 = b, a_2 = (c + integral x^2 F)/2, a_n = (1/n!) integral x^n F.
// =============================================================================

struct CumulantSeries {
    std::vector<double> coefficients;  // a_0 .. a_N
    double radius_hint;                // series converges for |z| < radius_hint

    /// Partial sum up to the stored order.
    double evaluate(double z) const;
};

/// Throws MomentError if a required moment overflows. N >= 2.
CumulantSeries taylor_coefficients(const LevyModel& model, int N);

/// Least n0 such that integral x^n F != 0 for all n in [n0, n_max], verified
/// up to n_max only. nullopt when the zero pattern persists into the window
/// tail (e.g. symmetric F, whose odd moments vanish for every n), since no
/// meaningful run of nonzero moments closes the window.
std::optional<int> moment_nonvanishing_index(const LevyModel& model, int n_max);

/// Exact sample of X_{t+dt} - X_t. The jump part is compensated so that the
/// increment has mean Psi'(0) dt = b dt and variance Psi''(0) dt.
double sample_increment(const LevyModel& model, double dt, std::mt19937_64& rng);

} // namespace levyhjmm
