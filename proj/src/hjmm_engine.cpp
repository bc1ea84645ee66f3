#include "levyhjmm/hjmm_engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include <unsupported/Eigen/MatrixFunctions>

#include "levyhjmm/errors.hpp"
#include "levyhjmm/realization.hpp"
#include "levyhjmm/rng.hpp"

namespace levyhjmm {

// ---------------------------------------------------------------------------
// Volatility structure
// ---------------------------------------------------------------------------

VolatilityStructure::VolatilityStructure(const ModelSpec& spec, ConfigPtr config) {
    constant_ = true;
    for (const auto& term : spec.volatility) {
        phis_.push_back(term.phi);
        lambda_grids_.push_back(resolve_lambda(term, spec, config));
        if (!term.phi.is_constant()) constant_ = false;
    }
}

std::vector<double> VolatilityStructure::phi_values(const ForwardCurve& h) const {
    std::vector<double> out(phis_.size());
    const double r0 = short_rate(h);
    for (size_t i = 0; i < phis_.size(); ++i) out[i] = phis_[i].evaluate(r0);
    return out;
}

ForwardCurve VolatilityStructure::evaluate(const ForwardCurve& h) const {
    const auto weights = phi_values(h);
    std::vector<double> v(static_cast<size_t>(h.size()), 0.0);
    for (size_t t = 0; t < weights.size(); ++t) {
        const auto& lam = lambda_grids_[t].values();
        for (size_t i = 0; i < v.size(); ++i) v[i] += weights[t] * lam[i];
    }
    return ForwardCurve(h.config_ptr(), std::move(v));
}

// ---------------------------------------------------------------------------
// HJM drift
// ---------------------------------------------------------------------------

ForwardCurve hjm_drift(const ForwardCurve& sigma_h, const LevyModel& model) {
    const ForwardCurve integrated = integral_operator(sigma_h);
    const CumulantDomain dom = cumulant_domain(model);
    std::vector<double> alpha(static_cast<size_t>(sigma_h.size()));
    for (int i = 0; i < sigma_h.size(); ++i) {
        const double z = integrated[i];
        if (!(z > dom.lo && z < dom.hi)) {
            std::ostringstream os;
            os << "integrated volatility " << z << " at x = " << sigma_h.config().x_at(i)
               << " leaves D(Psi)";
            throw DomainError(os.str());
        }
        alpha[static_cast<size_t>(i)] = -sigma_h[i] * cumulant_derivative(model, z);
    }
    return ForwardCurve(sigma_h.config_ptr(), std::move(alpha));
}

ForwardCurve hjm_drift_divergence_form(const ForwardCurve& sigma_h, const LevyModel& model) {
    const ForwardCurve integrated = integral_operator(sigma_h);
    std::vector<double> psi(static_cast<size_t>(sigma_h.size()));
    for (int i = 0; i < sigma_h.size(); ++i)
        psi[static_cast<size_t>(i)] = cumulant(model, integrated[i]);
    return differentiate(ForwardCurve(sigma_h.config_ptr(), std::move(psi)));
}

// ---------------------------------------------------------------------------
// Full simulation
// ---------------------------------------------------------------------------

std::vector<double> draw_increments(const LevyModel& model, double horizon, int n_steps,
                                    std::uint64_t seed, std::uint64_t path_index) {
    if (n_steps < 1) throw std::invalid_argument("draw_increments: n_steps must be >= 1");
    auto rng = path_stream(seed, path_index);
    const double dt = horizon / n_steps;
    std::vector<double> inc(static_cast<size_t>(n_steps));
    for (auto& d : inc) d = sample_increment(model, dt, rng);
    return inc;
}

namespace {

void check_overflow(const ForwardCurve& r, double t) {
    for (int i = 0; i < r.size(); ++i) {
        const double v = r[i];
        if (!std::isfinite(v) || std::abs(v) > kOverflowGuard) {
            std::ostringstream os;
            os << "curve value " << v << " exceeded the overflow guard at t = " << t;
            throw NumericsError(os.str());
        }
    }
}

} // namespace

SimulationResult simulate_full_with_increments(const ModelSpec& spec, const ForwardCurve& h0,
                                               const SimOptions& options,
                                               const std::vector<double>& increments) {
    const int n_steps = static_cast<int>(increments.size());
    if (n_steps < 1) throw std::invalid_argument("simulate_full: need at least one step");
    const double dt = options.horizon / n_steps;
    ConfigPtr config = h0.config_ptr();
    const VolatilityStructure vol(spec, config);

    SimulationResult result;
    result.increments = increments;
    result.times.reserve(static_cast<size_t>(n_steps) + 1);
    result.short_rates.reserve(static_cast<size_t>(n_steps) + 1);

    // With constant loadings sigma (and hence the drift) never changes.
    ForwardCurve sigma = vol.evaluate(h0);
    ForwardCurve alpha = options.zero_drift ? ForwardCurve::zero(config)
                                            : hjm_drift(sigma, spec.levy);

    ForwardCurve r = h0;
    result.times.push_back(0.0);
    result.short_rates.push_back(short_rate(r));
    if (options.store_curves) result.curves.push_back(r);

    std::vector<double> reaction(static_cast<size_t>(r.size()));
    for (int k = 0; k < n_steps; ++k) {
        if (!vol.is_constant()) {
            sigma = vol.evaluate(r);
            if (!options.zero_drift) alpha = hjm_drift(sigma, spec.levy);
        }
        const double dx_inc = increments[static_cast<size_t>(k)];
        const auto& rv = r.values();
        const auto& av = alpha.values();
        const auto& sv = sigma.values();
        for (size_t i = 0; i < reaction.size(); ++i)
            reaction[i] = rv[i] + av[i] * dt + sv[i] * dx_inc;
        r = shift(ForwardCurve(config, reaction), dt);
        const double t = dt * (k + 1);
        check_overflow(r, t);
        result.times.push_back(t);
        result.short_rates.push_back(short_rate(r));
        if (options.store_curves) result.curves.push_back(r);
    }
    if (!options.store_curves) result.curves.push_back(r);  // terminal only
    return result;
}

SimulationResult simulate_full(const ModelSpec& spec, const ForwardCurve& h0,
                               const SimOptions& options, std::uint64_t seed,
                               std::uint64_t path_index) {
    auto increments =
        draw_increments(spec.levy, options.horizon, options.n_steps, seed, path_index);
    SimulationResult result = simulate_full_with_increments(spec, h0, options, increments);
    result.seed = seed;
    result.path_index = path_index;
    return result;
}

// ---------------------------------------------------------------------------
// Reduced simulation
// ---------------------------------------------------------------------------

SimulationResult simulate_reduced_with_increments(const ModelSpec& spec, const ForwardCurve& h0,
                                                  const SimOptions& options,
                                                  const std::vector<ExpPoly>& basis,
                                                  const std::vector<double>& increments) {
    const int n_steps = static_cast<int>(increments.size());
    if (n_steps < 1) throw std::invalid_argument("simulate_reduced: need at least one step");
    const double dt = options.horizon / n_steps;
    ConfigPtr config = h0.config_ptr();
    const VolatilityStructure vol(spec, config);
    const auto d = static_cast<Eigen::Index>(basis.size());

    // d/dx restricted to V; the shift semigroup on V is its exponential, so
    // the state step mirrors the splitting scheme exactly.
    const Eigen::MatrixXd D = shift_matrix(basis);
    const Eigen::MatrixXd step_matrix = (D * dt).exp();

    // Coordinates of each direction lambda_i in the basis (exact in
    // coefficient space). Tabulated directions cannot occur here: the
    // sufficiency check only passes quasi-exponential volatility.
    std::vector<Eigen::VectorXd> lambda_coords;
    for (const auto& term : spec.volatility) {
        if (term.is_tabulated)
            throw NoRealization("simulate_reduced: tabulated volatility direction");
        const auto coords = coordinates_in_span(term.lambda, basis);
        lambda_coords.push_back(
            Eigen::Map<const Eigen::VectorXd>(coords.data(), static_cast<Eigen::Index>(coords.size())));
    }

    std::vector<ForwardCurve> basis_grids;
    basis_grids.reserve(basis.size());
    for (const auto& v : basis) basis_grids.push_back(evaluate_on_grid(v, config));

    SimulationResult result;
    result.increments = increments;

    ForwardCurve psi = h0;
    Eigen::VectorXd state = Eigen::VectorXd::Zero(d);

    auto reconstruct = [&](const ForwardCurve& base, const Eigen::VectorXd& z) {
        ForwardCurve r = base;
        auto& values = r.mutable_values();
        for (Eigen::Index j = 0; j < d; ++j) {
            const auto& vg = basis_grids[static_cast<size_t>(j)].values();
            for (size_t i = 0; i < values.size(); ++i) values[i] += z(j) * vg[i];
        }
        return r;
    };

    auto record = [&](double t) {
        result.times.push_back(t);
        result.state_path.emplace_back(state.data(), state.data() + state.size());
        ForwardCurve r = reconstruct(psi, state);
        result.short_rates.push_back(short_rate(r));
        if (options.store_curves) {
            result.psi_path.push_back(psi);
            result.curves.push_back(std::move(r));
        } else if (result.times.size() == static_cast<size_t>(n_steps) + 1) {
            result.psi_path.push_back(psi);
            result.curves.push_back(std::move(r));
        }
    };

    record(0.0);
    std::vector<double> reaction(static_cast<size_t>(psi.size()));
    for (int k = 0; k < n_steps; ++k) {
        // sigma is constant on each leaf psi(t) + V, so Phi is read at psi.
        const auto weights = vol.phi_values(psi);
        ForwardCurve sigma = vol.evaluate(psi);
        Eigen::VectorXd loading = Eigen::VectorXd::Zero(d);
        for (size_t i = 0; i < weights.size(); ++i) loading += weights[i] * lambda_coords[i];

        const ForwardCurve alpha = options.zero_drift ? ForwardCurve::zero(config)
                                                      : hjm_drift(sigma, spec.levy);
        const auto& pv = psi.values();
        const auto& av = alpha.values();
        for (size_t i = 0; i < reaction.size(); ++i) reaction[i] = pv[i] + av[i] * dt;
        psi = shift(ForwardCurve(config, reaction), dt);
        state = step_matrix * (state + loading * increments[static_cast<size_t>(k)]);

        const double t = dt * (k + 1);
        check_overflow(psi, t);
        record(t);
    }
    return result;
}

SimulationResult simulate_reduced(const ModelSpec& spec, const ForwardCurve& h0,
                                  const SimOptions& options, std::uint64_t seed,
                                  std::uint64_t path_index) {
    const RealizationReport report = check_sufficient(spec);
    if (!report.exists)
        throw NoRealization("simulate_reduced: no affine realization (" + report.reason + ")");
    auto increments =
        draw_increments(spec.levy, options.horizon, options.n_steps, seed, path_index);
    SimulationResult result =
        simulate_reduced_with_increments(spec, h0, options, report.basis, increments);
    result.seed = seed;
    result.path_index = path_index;
    return result;
}

// ---------------------------------------------------------------------------
// Pricing
// ---------------------------------------------------------------------------

double bond_price(const ForwardCurve& curve, double tau) {
    const auto& cfg = curve.config();
    if (tau < 0.0 || tau > cfg.x_max * (1.0 + 1e-12))
        throw RangeError("bond_price: maturity outside the curve grid");
    const double dx = cfg.dx();
    const auto& v = curve.values();
    double acc = 0.0;
    int j = std::min(static_cast<int>(tau / dx), cfg.n_grid - 1);
    for (int i = 1; i <= j; ++i) acc += 0.5 * dx * (v[static_cast<size_t>(i - 1)] + v[static_cast<size_t>(i)]);
    const double rest = tau - cfg.x_at(j);
    if (rest > 0.0) acc += 0.5 * rest * (v[static_cast<size_t>(j)] + curve.at(tau));
    return std::exp(-acc);
}

double bank_account(const std::vector<double>& short_rates, const std::vector<double>& times) {
    if (short_rates.size() != times.size())
        throw std::invalid_argument("bank_account: paths are not aligned");
    double acc = 0.0;
    for (size_t k = 1; k < times.size(); ++k)
        acc += 0.5 * (short_rates[k - 1] + short_rates[k]) * (times[k] - times[k - 1]);
    return std::exp(acc);
}

// ---------------------------------------------------------------------------
// Martingale test
// ---------------------------------------------------------------------------

int engine_thread_count() {
    if (const char* env = std::getenv("LEVY_HJMM_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for_paths(int n_paths, const std::function<void(int)>& fn) {
    const int workers = std::min(engine_thread_count(), std::max(1, n_paths));
    if (workers == 1) {
        for (int p = 0; p < n_paths; ++p) fn(p);
        return;
    }
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        threads.emplace_back([&, w]() {
            try {
                for (int p = w; p < n_paths; p += workers) fn(p);
            } catch (...) {
                errors[static_cast<size_t>(w)] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

MartingaleReport martingale_test(const ModelSpec& spec, double maturity, int n_paths,
                                 std::uint64_t seed, int n_steps, bool zero_drift) {
    ConfigPtr config = make_config(spec.space);
    if (maturity > spec.space.x_max)
        throw RangeError("martingale_test: maturity beyond the curve grid");
    const ForwardCurve h0 = resolve_initial_curve(spec, config);
    const double t_eval = maturity / 2.0;

    SimOptions options;
    options.horizon = t_eval;
    options.n_steps = n_steps;
    options.store_curves = false;
    options.zero_drift = zero_drift;

    std::vector<double> discounted(static_cast<size_t>(n_paths));
    parallel_for_paths(n_paths, [&](int p) {
        const auto increments = draw_increments(spec.levy, t_eval, n_steps, seed,
                                                static_cast<std::uint64_t>(p));
        const auto sim = simulate_full_with_increments(spec, h0, options, increments);
        discounted[static_cast<size_t>(p)] =
            bond_price(sim.terminal_curve(), maturity - t_eval) /
            bank_account(sim.short_rates, sim.times);
    });

    double mean = 0.0;
    for (double v : discounted) mean += v;
    mean /= n_paths;
    double var = 0.0;
    for (double v : discounted) var += (v - mean) * (v - mean);
    var /= std::max(1, n_paths - 1);

    MartingaleReport report;
    report.mean = mean;
    report.stderr_ = std::sqrt(var / n_paths);
    report.reference = bond_price(h0, maturity);
    if (report.stderr_ > 0.0) {
        report.z_score = (mean - report.reference) / report.stderr_;
    } else {
        // Deterministic discounted bonds (sigma == 0): exact match or not.
        report.z_score = mean == report.reference ? 0.0
                         : std::numeric_limits<double>::infinity() *
                               (mean > report.reference ? 1.0 : -1.0);
    }
    report.n_paths = n_paths;
    return report;
}

// ---------------------------------------------------------------------------
// CSV output
// ---------------------------------------------------------------------------

void write_full_csv(std::ostream& os, const std::vector<SimulationResult>& paths) {
    os << "path,t,x,value\n";
    for (size_t p = 0; p < paths.size(); ++p) {
        const auto& sim = paths[p];
        for (size_t k = 0; k < sim.curves.size(); ++k) {
            const auto& curve = sim.curves[k];
            const double t = k < sim.times.size() ? sim.times[k] : sim.times.back();
            for (int i = 0; i < curve.size(); ++i)
                os << p << "," << t << "," << curve.config().x_at(i) << "," << curve[i] << "\n";
        }
    }
}

void write_reduced_csv(std::ostream& os, const std::vector<SimulationResult>& paths) {
    size_t d = 0;
    for (const auto& sim : paths)
        if (!sim.state_path.empty()) d = std::max(d, sim.state_path.front().size());
    os << "path,t";
    for (size_t j = 1; j <= d; ++j) os << ",z_" << j;
    os << "\n";
    for (size_t p = 0; p < paths.size(); ++p) {
        const auto& sim = paths[p];
        for (size_t k = 0; k < sim.state_path.size(); ++k) {
            os << p << "," << sim.times[k];
            for (double z : sim.state_path[k]) os << "," << z;
            os << "\n";
        }
    }
}

} // namespace levyhjmm
