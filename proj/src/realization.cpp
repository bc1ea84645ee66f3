#include "levyhjmm/realization.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <json.hpp>

#include "levyhjmm/errors.hpp"
#include "levyhjmm/rng.hpp"

namespace levyhjmm {

namespace {

constexpr double kSingularValueRelTol = 1e-8;

int numerical_rank(const Eigen::MatrixXd& m) {
    if (m.rows() == 0 || m.cols() == 0) return 0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    if (sv(0) <= 0.0) return 0;
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) >= kSingularValueRelTol * sv(0)) ++rank;
    return rank;
}

/// First grid index where |v| rises above noise; condition (vanishing on no
/// initial interval) holds when that happens by the second node.
bool no_vanishing_prefix(const ForwardCurve& v) {
    double scale = 0.0;
    for (int i = 0; i < v.size(); ++i) scale = std::max(scale, std::abs(v[i]));
    if (scale == 0.0) return false;
    for (int i = 0; i < v.size(); ++i)
        if (std::abs(v[i]) > 1e-12 * scale) return i <= 1;
    return false;
}

} // namespace

// ---------------------------------------------------------------------------
// Sufficient conditions
// ---------------------------------------------------------------------------

RealizationReport check_sufficient(const ModelSpec& spec) {
    RealizationReport report;
    report.moment_n0 = moment_nonvanishing_index(spec.levy, 12);

    report.quasi_exponential = true;
    std::vector<ExpPoly> lams;
    for (const auto& term : spec.volatility) {
        if (term.is_tabulated) {
            report.quasi_exponential = false;
            continue;
        }
        lams.push_back(term.lambda);
        report.decay_flags.push_back(decay_check(term.lambda, spec.space.beta_prime));
    }

    if (!report.quasi_exponential) {
        report.reason = "sigma not quasi-exponential";
        return report;
    }

    report.basis = realization_space(lams);
    report.dimension = static_cast<int>(report.basis.size());

    ConfigPtr config;
    report.kappa_condition = true;
    for (const auto& v : report.basis) {
        if (!config) config = make_config(spec.space);
        if (!no_vanishing_prefix(evaluate_on_grid(v, config))) report.kappa_condition = false;
    }

    // A loading that reads the short rate is constant on h0 + V only when
    // every element of V vanishes at 0. Decided from the coefficients, not
    // from grid values.
    report.phi_constant_on_leaves = true;
    for (const auto& term : spec.volatility) {
        if (term.phi.is_constant()) continue;
        for (const auto& v : report.basis)
            if (v.value_at_zero() != 0.0) report.phi_constant_on_leaves = false;
    }

    if (!report.phi_constant_on_leaves) {
        report.reason = "phi not constant on h0 + V";
        return report;
    }
    report.exists = true;
    report.reason = "quasi-exponential directions with leaf-constant loadings";
    return report;
}

// ---------------------------------------------------------------------------
// Necessary-condition hypotheses
// ---------------------------------------------------------------------------

NecessaryConditionsReport check_necessary(const ModelSpec& spec,
                                          const std::vector<ExpPoly>& basis, int n_max) {
    if (basis.empty()) throw std::invalid_argument("check_necessary: basis must be nonempty");
    NecessaryConditionsReport report;
    report.n_max = n_max;
    report.moment_n0 = moment_nonvanishing_index(spec.levy, n_max);
    ConfigPtr config = make_config(spec.space);
    for (const auto& v : basis)
        report.kappa_ok.push_back(no_vanishing_prefix(evaluate_on_grid(v, config)));
    report.applicable = report.moment_n0.has_value() &&
                        std::all_of(report.kappa_ok.begin(), report.kappa_ok.end(),
                                    [](bool ok) { return ok; });
    return report;
}

// ---------------------------------------------------------------------------
// Foliation construction and residuals
// ---------------------------------------------------------------------------

Foliation build_foliation(const ModelSpec& spec, const ForwardCurve& h0, double horizon,
                          int n_steps) {
    const RealizationReport report = check_sufficient(spec);
    if (!report.exists)
        throw NoRealization("build_foliation: no affine realization (" + report.reason + ")");
    SimOptions options;
    options.horizon = horizon;
    options.n_steps = n_steps;
    options.store_curves = true;
    const std::vector<double> no_noise(static_cast<size_t>(n_steps), 0.0);
    SimulationResult sim = simulate_full_with_increments(spec, h0, options, no_noise);
    Foliation fol;
    fol.times = std::move(sim.times);
    fol.psi = std::move(sim.curves);
    fol.basis = report.basis;
    return fol;
}

std::vector<double> foliation_residual(const SimulationResult& sim, const Foliation& fol) {
    if (sim.curves.size() != fol.psi.size())
        throw std::invalid_argument("foliation_residual: paths are not aligned");
    for (size_t k = 0; k < sim.times.size(); ++k)
        if (std::abs(sim.times[k] - fol.times[k]) > 1e-12)
            throw std::invalid_argument("foliation_residual: time grids differ");

    const auto& cfg = sim.curves.front().config();
    const double x_cut = cfg.x_max - fol.times.back();
    const ForwardCurve probe = truncate_to(sim.curves.front(), x_cut);
    ConfigPtr sub_config = probe.config_ptr();

    std::vector<ForwardCurve> basis_grids;
    basis_grids.reserve(fol.basis.size());
    for (const auto& v : fol.basis) basis_grids.push_back(evaluate_on_grid(v, sub_config));

    std::vector<double> residuals(sim.curves.size());
    for (size_t k = 0; k < sim.curves.size(); ++k) {
        const ForwardCurve diff = truncate_to(sim.curves[k] - fol.psi[k], x_cut);
        residuals[k] = project_onto(diff, basis_grids).residual_norm;
    }
    return residuals;
}

// ---------------------------------------------------------------------------
// Rank probes
// ---------------------------------------------------------------------------

int vandermonde_rank_probe(const LevyModel& model, const ForwardCurve& Lambda,
                           const std::vector<double>& thetas,
                           const std::vector<double>& sample_xs,
                           const ForwardCurve* Lambda2) {
    const auto m = static_cast<Eigen::Index>(thetas.size());
    const auto nx = static_cast<Eigen::Index>(sample_xs.size());
    Eigen::MatrixXd probe(m, nx);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < nx; ++j) {
            const double x = sample_xs[static_cast<size_t>(j)];
            double z = thetas[static_cast<size_t>(i)] * Lambda.at(x);
            if (Lambda2) z += Lambda2->at(x);
            probe(i, j) = cumulant(model, z);
        }
    }
    return numerical_rank(probe);
}

int vpsi_dimension_estimate(const ModelSpec& spec, const ForwardCurve& h0, int m,
                            std::uint64_t seed, double box_radius) {
    if (m < 1) throw std::invalid_argument("vpsi_dimension_estimate: m must be >= 1");
    const RealizationReport report = check_sufficient(spec);
    if (report.basis.empty())
        throw NoRealization("vpsi_dimension_estimate: no quasi-exponential candidate basis");

    ConfigPtr config = h0.config_ptr();
    const VolatilityStructure vol(spec, config);
    std::vector<ForwardCurve> basis_grids;
    for (const auto& v : report.basis) basis_grids.push_back(evaluate_on_grid(v, config));
    const auto d = basis_grids.size();

    auto rng = path_stream(seed, 0);
    std::uniform_real_distribution<double> box(-box_radius, box_radius);

    Eigen::MatrixXd probe(m, config->n_grid);
    for (int s = 0; s < m; ++s) {
        ForwardCurve leaf_point = h0;
        for (size_t j = 0; j < d; ++j) leaf_point = leaf_point + basis_grids[j] * box(rng);
        const ForwardCurve integrated = integral_operator(vol.evaluate(leaf_point));
        for (int i = 0; i < config->n_grid; ++i) {
            const double z = integrated[i];
            if (z < spec.k_lo || z > spec.k_hi) {
                std::ostringstream os;
                os << "vpsi_dimension_estimate: sampled integrated volatility " << z
                   << " leaves K = [" << spec.k_lo << ", " << spec.k_hi << "]";
                throw DomainError(os.str());
            }
            probe(s, i) = cumulant(spec.levy, z);
        }
    }
    return numerical_rank(probe);
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

std::string realization_report_json(const RealizationReport& report, int indent) {
    nlohmann::json j;
    j["exists"] = report.exists;
    j["dimension"] = report.dimension;
    j["reason"] = report.reason;
    j["basis"] = nlohmann::json::array();
    for (const auto& v : report.basis) j["basis"].push_back(v.to_string());
    nlohmann::json conditions;
    conditions["quasi_exponential"] = report.quasi_exponential;
    conditions["phi_constant_on_leaves"] = report.phi_constant_on_leaves;
    conditions["decay"] = report.decay_flags;
    if (report.moment_n0) conditions["moment_n0"] = *report.moment_n0;
    else conditions["moment_n0"] = nullptr;
    conditions["kappa_condition"] = report.kappa_condition;
    j["conditions"] = conditions;
    return j.dump(indent);
}

} // namespace levyhjmm
