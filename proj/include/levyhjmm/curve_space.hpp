#pragma once

#include <memory>
#include <string>
#include <vector>

namespace levyhjmm {

// =============================================================================
// Discretized forward-curve space H_beta
//
// Curves live on a uniform grid over [0, x_max] in time-to-maturity. The
// weighted norm
//
//     ||h||_beta = ( |h(0)|^2 + integral_0^{x_max} |h'(x)|^2 e^{beta x} dx )^{1/2}
//
// uses centered finite differences for h' and trapezoid quadrature. The grid
// truncation at x_max stands in for x -> infinity; decay of admissible curves
// keeps the weighted integral meaningful.
// =============================================================================

struct CurveSpaceConfig {
    double beta = 0.5;
    double beta_prime = 1.0;
    double x_max = 20.0;
    int n_grid = 512;

    double dx() const { return x_max / (n_grid - 1); }
    double x_at(int i) const { return i * dx(); }

    std::vector<std::string> check() const;
    bool same_grid(const CurveSpaceConfig& other) const;

    bool operator==(const CurveSpaceConfig&) const = default;
};

using ConfigPtr = std::shared_ptr<const CurveSpaceConfig>;

ConfigPtr make_config(CurveSpaceConfig cfg);

/// Grid sampling of a forward curve h in H_beta. Immutable by convention:
/// all operations return new curves.
class ForwardCurve {
public:
    ForwardCurve() = default;
    ForwardCurve(ConfigPtr config, std::vector<double> values);

    /// Constant curve h == value.
    static ForwardCurve flat(ConfigPtr config, double value);
    /// Zero curve.
    static ForwardCurve zero(ConfigPtr config);

    const CurveSpaceConfig& config() const { return *config_; }
    const ConfigPtr& config_ptr() const { return config_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& mutable_values() { return values_; }
    int size() const { return static_cast<int>(values_.size()); }

    double operator[](int i) const { return values_[static_cast<size_t>(i)]; }

    /// Linear interpolation at arbitrary x in [0, x_max]; flat beyond the end.
    double at(double x) const;

    bool all_finite() const;

    ForwardCurve operator+(const ForwardCurve& other) const;
    ForwardCurve operator-(const ForwardCurve& other) const;
    ForwardCurve operator*(double scalar) const;

private:
    ConfigPtr config_;
    std::vector<double> values_;
};

/// Centered-difference derivative values on the grid (second-order one-sided
/// at both ends).
std::vector<double> grid_derivative(const ForwardCurve& curve);

/// ||h||_beta under the given weight exponent.
double norm_beta(const ForwardCurve& curve, double beta);

/// Polarization of the norm: <f,g> = f(0) g(0) + integral f' g' e^{beta x} dx.
double inner_product_beta(const ForwardCurve& f, const ForwardCurve& g, double beta);

/// Membership test for the decaying subspace H^0_{beta'}: the beta'-norm must
/// stay below the overflow guard and |h| on the last decile of the grid below
/// the tail tolerance (the grid rendering of lim_{x->inf} h(x) = 0).
bool in_H0(const ForwardCurve& curve);

/// Shift semigroup (S_t h)(x) = h(x + t), linear interpolation on the grid and
/// flat extrapolation past x_max. Exact for grid-aligned t.
ForwardCurve shift(const ForwardCurve& curve, double t);

/// d/dx on the grid.
ForwardCurve differentiate(const ForwardCurve& curve);

/// Integral operator (T lambda)(x) = -integral_0^x lambda(eta) d eta
/// (cumulative trapezoid, value 0 at x = 0).
ForwardCurve integral_operator(const ForwardCurve& lam);

/// Evaluation at the short end, l(h) = h(0).
double short_rate(const ForwardCurve& curve);

struct Projection {
    std::vector<double> coordinates;
    double residual_norm;
};

/// Least-squares projection onto span(basis) in the beta inner product.
/// Throws DegenerateBasis when the Gram matrix condition number exceeds 1e12.
Projection project_onto(const ForwardCurve& curve, const std::vector<ForwardCurve>& basis);

/// Restrict a curve to the grid prefix with x <= x_cut (used to exclude the
/// flat-extrapolation boundary layer from residual metrics).
ForwardCurve truncate_to(const ForwardCurve& curve, double x_cut);

/// Read a two-column `x,value` CSV (header required) and resample onto the
/// configured grid by linear interpolation.
ForwardCurve read_curve_csv(const std::string& path, ConfigPtr config);

void write_curve_csv(const std::string& path, const ForwardCurve& curve);

/// Curve values above this magnitude are treated as numerical blow-up.
constexpr double kOverflowGuard = 1e8;

/// |h| bound on the last decile for the "limit zero" test of H^0.
constexpr double kTailTolerance = 1e-8;

} // namespace levyhjmm
