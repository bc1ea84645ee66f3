#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "levyhjmm/curve_space.hpp"

namespace levyhjmm {

// =============================================================================
// Exact algebra of exponential-polynomial-trigonometric functions
//
//     f(x) = sum_i rho_i x^{k_i} e^{-theta_i x} trig(omega_i x)
//
// This class is closed under d/dx and is exactly the classical
// characterization of quasi-exponential functions (iterated derivatives span
// a finite-dimensional space). Volatility directions and realization bases
// are represented in this form, so span dimensions and invariance are decided
// in coefficient space instead of on the grid.
// =============================================================================

struct ExpPolyTerm {
    double coeff = 0.0;   // rho
    double theta = 0.0;   // decay rate of e^{-theta x}
    int degree = 0;       // k >= 0
    double omega = 0.0;   // trig frequency (0 means no trig factor)
    bool is_sin = false;  // cos when false
};

class ExpPoly {
public:
    ExpPoly() = default;  // zero function
    explicit ExpPoly(std::vector<ExpPolyTerm> terms);

    /// Single-term convenience: rho x^degree e^{-theta x} {cos,sin}(omega x).
    static ExpPoly term(double rho, double theta, int degree = 0, double omega = 0.0,
                        bool is_sin = false);

    const std::vector<ExpPolyTerm>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    double evaluate(double x) const;
    /// f(0), exact from the coefficients (only degree-0 cosine terms contribute).
    double value_at_zero() const;

    ExpPoly operator+(const ExpPoly& other) const;
    ExpPoly operator-(const ExpPoly& other) const;
    ExpPoly operator*(double scalar) const;

    /// DSL textual form, `exp_poly(...)` terms joined by ` + `.
    std::string to_string() const;

    bool operator==(const ExpPoly& other) const;

private:
    std::vector<ExpPolyTerm> terms_;  // canonical: merged keys, zeros removed, sorted
};

/// Exact symbolic d/dx.
ExpPoly derivative(const ExpPoly& f);

/// Basis of span{ f, f', f'', ... }. The returned elements are the iterated
/// derivatives that were linearly independent (decided by Gram-Schmidt in
/// coefficient space, tolerance 1e-10). Size equals the degree of f's minimal
/// linear-ODE annihilator.
std::vector<ExpPoly> derivative_span(const ExpPoly& f);

/// Basis of V = sum_i span{ (d/dx)^n lam_i }, the realization space generated
/// by the volatility directions.
std::vector<ExpPoly> realization_space(const std::vector<ExpPoly>& lams);

/// Matrix of d/dx restricted to span(basis): derivative(basis[j]) =
/// sum_i D(i,j) basis[i], solved exactly in coefficient space.
/// Throws NotInvariant if a derivative leaves the span (residual > 1e-10).
Eigen::MatrixXd shift_matrix(const std::vector<ExpPoly>& basis);

/// Coordinates of f in span(basis), coefficient-space least squares.
/// Throws NotInvariant when f is not in the span.
std::vector<double> coordinates_in_span(const ExpPoly& f, const std::vector<ExpPoly>& basis);

/// Closed-form membership in H^0_{beta'}: every decay rate must exceed
/// beta'/2. (Polynomial and trig factors do not affect the criterion.)
bool decay_check(const ExpPoly& f, double beta_prime);

ForwardCurve evaluate_on_grid(const ExpPoly& f, ConfigPtr config);

} // namespace levyhjmm
