#include "levyhjmm/curve_space.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "levyhjmm/errors.hpp"

namespace levyhjmm {

std::vector<std::string> CurveSpaceConfig::check() const {
    std::vector<std::string> problems;
    if (!(beta > 0.0)) problems.push_back("beta must be > 0");
    if (!(beta < beta_prime)) problems.push_back("constants must satisfy 0 < beta < beta_prime");
    if (n_grid < 16) problems.push_back("n_grid must be >= 16");
    if (!(x_max > 0.0)) problems.push_back("x_max must be > 0");
    return problems;
}

bool CurveSpaceConfig::same_grid(const CurveSpaceConfig& other) const {
    return n_grid == other.n_grid && x_max == other.x_max;
}

ConfigPtr make_config(CurveSpaceConfig cfg) {
    auto problems = cfg.check();
    if (!problems.empty()) throw std::invalid_argument("CurveSpaceConfig: " + problems.front());
    return std::make_shared<const CurveSpaceConfig>(cfg);
}

// ---------------------------------------------------------------------------
// ForwardCurve
// ---------------------------------------------------------------------------

ForwardCurve::ForwardCurve(ConfigPtr config, std::vector<double> values)
    : config_(std::move(config)), values_(std::move(values)) {
    if (!config_) throw std::invalid_argument("ForwardCurve: null config");
    if (static_cast<int>(values_.size()) != config_->n_grid)
        throw std::invalid_argument("ForwardCurve: value count does not match grid");
}

ForwardCurve ForwardCurve::flat(ConfigPtr config, double value) {
    std::vector<double> v(static_cast<size_t>(config->n_grid), value);
    return ForwardCurve(std::move(config), std::move(v));
}

ForwardCurve ForwardCurve::zero(ConfigPtr config) { return flat(std::move(config), 0.0); }

double ForwardCurve::at(double x) const {
    const auto& cfg = *config_;
    if (x <= 0.0) return values_.front();
    if (x >= cfg.x_max) return values_.back();
    const double u = x / cfg.dx();
    auto i = static_cast<size_t>(u);
    if (i >= values_.size() - 1) return values_.back();
    const double frac = u - static_cast<double>(i);
    return values_[i] + frac * (values_[i + 1] - values_[i]);
}

bool ForwardCurve::all_finite() const {
    return std::all_of(values_.begin(), values_.end(),
                       [](double v) { return std::isfinite(v); });
}

namespace {
void require_same_grid(const ForwardCurve& a, const ForwardCurve& b) {
    if (!a.config().same_grid(b.config()))
        throw std::invalid_argument("curve grids do not match");
}
} // namespace

ForwardCurve ForwardCurve::operator+(const ForwardCurve& other) const {
    require_same_grid(*this, other);
    std::vector<double> v(values_.size());
    for (size_t i = 0; i < v.size(); ++i) v[i] = values_[i] + other.values_[i];
    return ForwardCurve(config_, std::move(v));
}

ForwardCurve ForwardCurve::operator-(const ForwardCurve& other) const {
    require_same_grid(*this, other);
    std::vector<double> v(values_.size());
    for (size_t i = 0; i < v.size(); ++i) v[i] = values_[i] - other.values_[i];
    return ForwardCurve(config_, std::move(v));
}

ForwardCurve ForwardCurve::operator*(double scalar) const {
    std::vector<double> v(values_.size());
    for (size_t i = 0; i < v.size(); ++i) v[i] = values_[i] * scalar;
    return ForwardCurve(config_, std::move(v));
}

// ---------------------------------------------------------------------------
// Norm, inner product, subspace test
// ---------------------------------------------------------------------------

std::vector<double> grid_derivative(const ForwardCurve& curve) {
    const auto& v = curve.values();
    const int n = curve.size();
    const double dx = curve.config().dx();
    std::vector<double> d(static_cast<size_t>(n));
    d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dx);
    for (int i = 1; i + 1 < n; ++i)
        d[static_cast<size_t>(i)] = (v[static_cast<size_t>(i + 1)] - v[static_cast<size_t>(i - 1)]) / (2.0 * dx);
    d[static_cast<size_t>(n - 1)] =
        (3.0 * v[static_cast<size_t>(n - 1)] - 4.0 * v[static_cast<size_t>(n - 2)] + v[static_cast<size_t>(n - 3)]) /
        (2.0 * dx);
    return d;
}

double inner_product_beta(const ForwardCurve& f, const ForwardCurve& g, double beta) {
    require_same_grid(f, g);
    const auto df = grid_derivative(f);
    const auto dg = grid_derivative(g);
    const auto& cfg = f.config();
    const double dx = cfg.dx();
    double integral = 0.0;
    for (int i = 0; i < cfg.n_grid; ++i) {
        const double w = (i == 0 || i == cfg.n_grid - 1) ? 0.5 : 1.0;
        integral += w * df[static_cast<size_t>(i)] * dg[static_cast<size_t>(i)] *
                    std::exp(beta * cfg.x_at(i));
    }
    integral *= dx;
    return f[0] * g[0] + integral;
}

double norm_beta(const ForwardCurve& curve, double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("norm_beta: beta must be > 0");
    return std::sqrt(inner_product_beta(curve, curve, beta));
}

bool in_H0(const ForwardCurve& curve) {
    const auto& cfg = curve.config();
    const double n = norm_beta(curve, cfg.beta_prime);
    if (!std::isfinite(n) || n >= kOverflowGuard) return false;
    const int tail_start = (cfg.n_grid * 9) / 10;
    for (int i = tail_start; i < cfg.n_grid; ++i)
        if (std::abs(curve[i]) > kTailTolerance) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Shift, derivative, integral operator
// ---------------------------------------------------------------------------

ForwardCurve shift(const ForwardCurve& curve, double t) {
    if (t < 0.0) throw std::invalid_argument("shift: t must be >= 0");
    const auto& cfg = curve.config();
    const auto& v = curve.values();
    const int n = cfg.n_grid;
    std::vector<double> out(static_cast<size_t>(n));
    const double offset = t / cfg.dx();
    // Snap near-integer offsets so grid-aligned shifts satisfy the semigroup
    // law exactly.
    double base = std::floor(offset);
    double frac = offset - base;
    if (frac < 1e-9) frac = 0.0;
    if (frac > 1.0 - 1e-9) {
        base += 1.0;
        frac = 0.0;
    }
    const auto k = static_cast<long>(base);
    for (int i = 0; i < n; ++i) {
        const long j = i + k;
        if (j >= n - 1) {
            out[static_cast<size_t>(i)] = v[static_cast<size_t>(n - 1)];
        } else {
            const double lo = v[static_cast<size_t>(j)];
            const double hi = v[static_cast<size_t>(j + 1)];
            out[static_cast<size_t>(i)] = lo + frac * (hi - lo);
        }
    }
    return ForwardCurve(curve.config_ptr(), std::move(out));
}

ForwardCurve differentiate(const ForwardCurve& curve) {
    return ForwardCurve(curve.config_ptr(), grid_derivative(curve));
}

ForwardCurve integral_operator(const ForwardCurve& lam) {
    const auto& v = lam.values();
    const double dx = lam.config().dx();
    std::vector<double> out(v.size());
    out[0] = 0.0;
    double acc = 0.0;
    for (size_t i = 1; i < v.size(); ++i) {
        acc += 0.5 * dx * (v[i - 1] + v[i]);
        out[i] = -acc;
    }
    return ForwardCurve(lam.config_ptr(), std::move(out));
}

double short_rate(const ForwardCurve& curve) { return curve[0]; }

// ---------------------------------------------------------------------------
// Projection
// ---------------------------------------------------------------------------

Projection project_onto(const ForwardCurve& curve, const std::vector<ForwardCurve>& basis) {
    const double beta = curve.config().beta;
    const auto d = static_cast<Eigen::Index>(basis.size());
    if (d == 0) return {{}, norm_beta(curve, beta)};

    Eigen::MatrixXd gram(d, d);
    Eigen::VectorXd rhs(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = i; j < d; ++j) {
            gram(i, j) = inner_product_beta(basis[static_cast<size_t>(i)],
                                            basis[static_cast<size_t>(j)], beta);
            gram(j, i) = gram(i, j);
        }
        rhs(i) = inner_product_beta(basis[static_cast<size_t>(i)], curve, beta);
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(gram, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= 0.0 || sv(0) / sv(sv.size() - 1) > 1e12)
        throw DegenerateBasis("project_onto: Gram matrix condition number exceeds 1e12");

    Eigen::VectorXd coords = svd.solve(rhs);

    ForwardCurve residual = curve;
    for (Eigen::Index i = 0; i < d; ++i)
        residual = residual - basis[static_cast<size_t>(i)] * coords(i);

    Projection p;
    p.coordinates.assign(coords.data(), coords.data() + coords.size());
    p.residual_norm = norm_beta(residual, beta);
    return p;
}

ForwardCurve truncate_to(const ForwardCurve& curve, double x_cut) {
    const auto& cfg = curve.config();
    int m = static_cast<int>(std::floor(x_cut / cfg.dx() + 1e-9)) + 1;
    m = std::clamp(m, 16, cfg.n_grid);
    CurveSpaceConfig sub = cfg;
    sub.n_grid = m;
    sub.x_max = cfg.x_at(m - 1);
    std::vector<double> v(curve.values().begin(), curve.values().begin() + m);
    return ForwardCurve(make_config(sub), std::move(v));
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

ForwardCurve read_curve_csv(const std::string& path, ConfigPtr config) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open curve file: " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty curve file: " + path);

    std::vector<double> xs, ys;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string xs_str, ys_str;
        if (!std::getline(ls, xs_str, ',') || !std::getline(ls, ys_str))
            throw std::runtime_error("malformed curve row: " + line);
        xs.push_back(std::stod(xs_str));
        ys.push_back(std::stod(ys_str));
    }
    if (xs.size() < 2) throw std::runtime_error("curve file needs at least two points: " + path);
    for (size_t i = 1; i < xs.size(); ++i)
        if (!(xs[i] > xs[i - 1]))
            throw std::runtime_error("curve file x-column must be strictly increasing: " + path);

    std::vector<double> v(static_cast<size_t>(config->n_grid));
    size_t seg = 0;
    for (int i = 0; i < config->n_grid; ++i) {
        const double x = config->x_at(i);
        if (x <= xs.front()) {
            v[static_cast<size_t>(i)] = ys.front();
            continue;
        }
        if (x >= xs.back()) {
            v[static_cast<size_t>(i)] = ys.back();
            continue;
        }
        while (seg + 2 < xs.size() && xs[seg + 1] < x) ++seg;
        const double w = (x - xs[seg]) / (xs[seg + 1] - xs[seg]);
        v[static_cast<size_t>(i)] = ys[seg] + w * (ys[seg + 1] - ys[seg]);
    }
    return ForwardCurve(std::move(config), std::move(v));
}

void write_curve_csv(const std::string& path, const ForwardCurve& curve) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write curve file: " + path);
    out.precision(17);
    out << "x,value\n";
    for (int i = 0; i < curve.size(); ++i)
        out << curve.config().x_at(i) << "," << curve[i] << "\n";
}

} // namespace levyhjmm
