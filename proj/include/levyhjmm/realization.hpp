#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "levyhjmm/exp_poly.hpp"
#include "levyhjmm/hjmm_engine.hpp"
#include "levyhjmm/model_spec.hpp"

namespace levyhjmm {

// =============================================================================
// Existence analysis for affine realizations
//
// The forward-curve dynamics admit a finite-dimensional affine realization
// r_t in psi(t) + V exactly when the volatility directions are
// quasi-exponential (V is then the span of their iterated derivatives) and
// the loadings Phi_i are constant on each leaf h0 + V. With a jump-driven
// model, non-constant loadings force the span of Psi(Sigma(h0 + v)) over
// v in V to blow up in dimension; the probes below demonstrate both the
// Vandermonde rank engine behind that obstruction and the blow-up itself.
// =============================================================================

struct RealizationReport {
    bool exists = false;
    int dimension = 0;
    /// Realization basis when exists; candidate basis (span of direction
    /// derivatives) when existence fails only through the loadings.
    std::vector<ExpPoly> basis;
    std::string reason;

    // Condition flags.
    bool quasi_exponential = false;     // every direction is exp-poly
    bool phi_constant_on_leaves = false;
    std::vector<bool> decay_flags;      // per direction: in H^0_{beta'}
    std::optional<int> moment_n0;       // moment non-vanishing index probe
    bool kappa_condition = false;       // no basis element vanishes near 0
};

/// Sufficiency check: exists iff all directions are exp-poly and every
/// loading is constant on the leaves h0 + V. A sigmoid loading qualifies
/// only if every basis element of V vanishes at x = 0 (decided exactly from
/// the coefficients), since it reads the short rate.
RealizationReport check_sufficient(const ModelSpec& spec);

struct NecessaryConditionsReport {
    std::optional<int> moment_n0;  // least n0 with all F-moments n0..n_max nonzero
    int n_max = 0;
    std::vector<bool> kappa_ok;    // per basis element: no vanishing initial interval
    bool applicable = false;       // both hypotheses verified => conclusions bind
};

/// Probes the hypotheses of the necessary-condition theorems so the caller
/// knows whether their conclusions bind for this model and basis.
NecessaryConditionsReport check_necessary(const ModelSpec& spec,
                                          const std::vector<ExpPoly>& basis, int n_max = 12);

struct Foliation {
    std::vector<double> times;
    std::vector<ForwardCurve> psi;  // leaf parametrization psi(t)
    std::vector<ExpPoly> basis;     // D-invariant basis of V
};

/// Noiseless splitting integration of d psi/dt = (d/dx) psi + alpha(psi)
/// from h0; the leaves are M_t = psi(t) + V. Throws NoRealization when the
/// sufficiency check fails.
Foliation build_foliation(const ModelSpec& spec, const ForwardCurve& h0, double horizon,
                          int n_steps);

/// Distance of each simulated curve from its leaf: the beta-norm residual of
/// projecting r_t - psi(t) onto V. Curves are truncated to
/// x <= x_max - horizon first, excluding the flat-extrapolation boundary
/// layer of the shift.
std::vector<double> foliation_residual(const SimulationResult& sim, const Foliation& fol);

/// Numerical rank of M_ij = Psi(theta_i Lambda(x_j) [+ Lambda2(x_j)])
/// (singular values >= 1e-8 of the largest). Full rank m for jump models
/// with distinct |theta_i|; collapses to <= 2 for a purely Gaussian driver
/// whose Psi is quadratic.
int vandermonde_rank_probe(const LevyModel& model, const ForwardCurve& Lambda,
                           const std::vector<double>& thetas,
                           const std::vector<double>& sample_xs,
                           const ForwardCurve* Lambda2 = nullptr);

/// Numerical dimension of span{ Psi(Sigma(h0 + v)) : v in V } from m random
/// leaf points (coordinates uniform in a box of the given radius). Constant
/// loadings give rank 1; short-rate-dependent loadings with jumps make the
/// rank grow with m. Throws DomainError when a sample drives the integrated
/// volatility out of K.
int vpsi_dimension_estimate(const ModelSpec& spec, const ForwardCurve& h0, int m,
                            std::uint64_t seed, double box_radius = 1.0);

/// Stable-field JSON rendering of a report.
std::string realization_report_json(const RealizationReport& report, int indent = 2);

} // namespace levyhjmm
