#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "levyhjmm/curve_space.hpp"
#include "levyhjmm/exp_poly.hpp"
#include "levyhjmm/model_spec.hpp"

namespace levyhjmm {

// =============================================================================
// Arbitrage-free forward curve dynamics
//
//     dr_t = (d/dx r_t + alpha_HJM(r_t)) dt + sigma(r_{t-}) dX_t
//
// integrated with a semigroup-splitting Euler step: the reaction part
// (drift + noise) is applied on the grid, then the exact shift semigroup
// advances the curve by dt. The drift is pinned to the volatility by
//
//     alpha_HJM(h) = -sigma(h) Psi'(-int_0^. sigma(h))
//                  = (d/dx) Psi(-int_0^. sigma(h)),
//
// which makes discounted bond prices (local) martingales.
// =============================================================================

/// sigma(h) = sum_i Phi_i(h) lambda_i with the direction curves cached on
/// the grid.
class VolatilityStructure {
public:
    VolatilityStructure(const ModelSpec& spec, ConfigPtr config);

    ForwardCurve evaluate(const ForwardCurve& h) const;
    std::vector<double> phi_values(const ForwardCurve& h) const;

    /// True when every loading is constant(.), i.e. sigma does not depend on h.
    bool is_constant() const { return constant_; }
    const std::vector<ForwardCurve>& lambda_grids() const { return lambda_grids_; }
    const std::vector<PhiKind>& phis() const { return phis_; }

private:
    std::vector<PhiKind> phis_;
    std::vector<ForwardCurve> lambda_grids_;
    bool constant_;
};

/// alpha_HJM for the given evaluated volatility curve (product form).
/// Throws DomainError when the integrated volatility exits D(Psi).
ForwardCurve hjm_drift(const ForwardCurve& sigma_h, const LevyModel& model);

/// The equivalent divergence form (d/dx) Psi(-int sigma), by grid
/// differentiation; agrees with hjm_drift to O(dx^2).
ForwardCurve hjm_drift_divergence_form(const ForwardCurve& sigma_h, const LevyModel& model);

struct SimOptions {
    double horizon = 1.0;
    int n_steps = 100;
    bool store_curves = true;  // keep the whole curve path (memory heavy)
    bool zero_drift = false;   // negative control: drop alpha_HJM entirely
};

struct SimulationResult {
    std::vector<double> times;                    // 0 = t_0 < ... < t_n
    std::vector<ForwardCurve> curves;             // full (or reconstructed) curves per time
    std::vector<double> short_rates;              // r_t(0) per time
    std::vector<double> increments;               // driving dX per step (n_steps entries)
    std::vector<ForwardCurve> psi_path;           // reduced mode: leaf parametrization
    std::vector<std::vector<double>> state_path;  // reduced mode: Z_t in R^d
    std::uint64_t seed = 0;
    std::uint64_t path_index = 0;

    const ForwardCurve& terminal_curve() const { return curves.back(); }
};

/// Draw the n_steps driving increments for one (seed, path) stream. Feeding
/// the same vector to the full and reduced simulators realizes the
/// common-random-numbers contract.
std::vector<double> draw_increments(const LevyModel& model, double horizon, int n_steps,
                                    std::uint64_t seed, std::uint64_t path_index);

SimulationResult simulate_full(const ModelSpec& spec, const ForwardCurve& h0,
                               const SimOptions& options, std::uint64_t seed,
                               std::uint64_t path_index = 0);

SimulationResult simulate_full_with_increments(const ModelSpec& spec, const ForwardCurve& h0,
                                               const SimOptions& options,
                                               const std::vector<double>& increments);

/// Reduced simulation on a precomputed D-invariant realization basis:
/// psi integrated without noise, the state by dZ = D Z dt + s dX with
/// D = shift_matrix(basis) and s the coordinates of sigma in the basis.
/// Curves are reconstructed as psi(t) + sum_j Z_j(t) v_j.
SimulationResult simulate_reduced_with_increments(const ModelSpec& spec, const ForwardCurve& h0,
                                                  const SimOptions& options,
                                                  const std::vector<ExpPoly>& basis,
                                                  const std::vector<double>& increments);

/// Convenience: runs the sufficiency check first and throws NoRealization
/// when the spec has no affine realization.
SimulationResult simulate_reduced(const ModelSpec& spec, const ForwardCurve& h0,
                                  const SimOptions& options, std::uint64_t seed,
                                  std::uint64_t path_index = 0);

/// P(t, t + tau) = exp(-int_0^tau r_t(x) dx), trapezoid on the grid.
/// Throws RangeError when tau is outside [0, x_max].
double bond_price(const ForwardCurve& curve, double tau);

/// B(t) = exp(int_0^t r_s(0) ds) from a sampled short-rate path.
double bank_account(const std::vector<double>& short_rates, const std::vector<double>& times);

struct MartingaleReport {
    double mean;       // Monte Carlo estimate of E[P(t,T)/B(t)], t = T/2
    double stderr_;    // standard error of the estimate
    double reference;  // P(0,T)
    double z_score;    // (mean - reference) / stderr
    int n_paths;
};

/// Monte Carlo no-arbitrage check: discounted bond prices must be
/// martingales, so E[P(T/2,T)/B(T/2)] = P(0,T). Paths run in parallel with
/// deterministic per-path streams.
MartingaleReport martingale_test(const ModelSpec& spec, double maturity, int n_paths,
                                 std::uint64_t seed, int n_steps = 200,
                                 bool zero_drift = false);

/// Worker threads for path-parallel loops: LEVY_HJMM_THREADS when set,
/// otherwise the hardware concurrency.
int engine_thread_count();

/// Run fn(path_index) for every path, partitioned over worker threads.
/// Results must be written to per-path slots; exceptions are rethrown.
void parallel_for_paths(int n_paths, const std::function<void(int)>& fn);

/// CSV emitters (stable schemas: full `path,t,x,value`; reduced
/// `path,t,z_1..z_d`).
void write_full_csv(std::ostream& os, const std::vector<SimulationResult>& paths);
void write_reduced_csv(std::ostream& os, const std::vector<SimulationResult>& paths);

} // namespace levyhjmm
