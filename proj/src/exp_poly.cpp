#include "levyhjmm/exp_poly.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>
#include <tuple>

#include "levyhjmm/errors.hpp"

namespace levyhjmm {

namespace {

constexpr double kRankTol = 1e-10;

using MonomialKey = std::tuple<double, int, double, bool>;  // (theta, degree, omega, is_sin)

MonomialKey key_of(const ExpPolyTerm& t) { return {t.theta, t.degree, t.omega, t.is_sin}; }

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

/// Interns monomials (theta, degree, omega, phase) so polynomials become
/// coefficient vectors over a shared index set.
class MonomialIndexer {
public:
    int intern(const ExpPolyTerm& t) {
        auto [it, inserted] = index_.emplace(key_of(t), static_cast<int>(index_.size()));
        return it->second;
    }
    int size() const { return static_cast<int>(index_.size()); }

private:
    std::map<MonomialKey, int> index_;
};

Eigen::VectorXd coeff_vector(const ExpPoly& f, MonomialIndexer& indexer) {
    std::vector<std::pair<int, double>> entries;
    entries.reserve(f.terms().size());
    for (const auto& t : f.terms()) entries.emplace_back(indexer.intern(t), t.coeff);
    Eigen::VectorXd v = Eigen::VectorXd::Zero(indexer.size());
    for (auto [i, c] : entries) v(i) += c;
    return v;
}

Eigen::VectorXd pad(const Eigen::VectorXd& v, Eigen::Index n) {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    out.head(v.size()) = v;
    return out;
}

/// Incremental Gram-Schmidt over a growing monomial set. accept() returns
/// true when the polynomial enlarges the span.
class SpanBuilder {
public:
    bool accept(const ExpPoly& f) {
        Eigen::VectorXd v = coeff_vector(f, indexer_);
        const double scale = v.norm();
        if (scale == 0.0) return false;
        for (auto& q : ortho_) {
            if (q.size() < v.size()) q = pad(q, v.size());
            v -= q.dot(v) * q;
        }
        if (v.norm() <= kRankTol * scale) return false;
        ortho_.push_back(v / v.norm());
        return true;
    }

private:
    MonomialIndexer indexer_;
    std::vector<Eigen::VectorXd> ortho_;
};

} // namespace

// ---------------------------------------------------------------------------
// Canonical form and arithmetic
// ---------------------------------------------------------------------------

ExpPoly::ExpPoly(std::vector<ExpPolyTerm> terms) {
    std::map<MonomialKey, double> merged;
    for (auto t : terms) {
        if (t.degree < 0) throw std::invalid_argument("ExpPoly: degree must be >= 0");
        if (t.omega < 0.0) {  // cos is even, sin is odd
            t.omega = -t.omega;
            if (t.is_sin) t.coeff = -t.coeff;
        }
        if (t.omega == 0.0 && t.is_sin) continue;  // sin(0) == 0
        if (t.coeff == 0.0) continue;
        merged[key_of(t)] += t.coeff;
    }
    for (const auto& [key, coeff] : merged) {
        if (coeff == 0.0) continue;
        const auto& [theta, degree, omega, is_sin] = key;
        terms_.push_back({coeff, theta, degree, omega, is_sin});
    }
}

ExpPoly ExpPoly::term(double rho, double theta, int degree, double omega, bool is_sin) {
    return ExpPoly(std::vector<ExpPolyTerm>{{rho, theta, degree, omega, is_sin}});
}

double ExpPoly::evaluate(double x) const {
    double sum = 0.0;
    for (const auto& t : terms_) {
        double v = t.coeff * std::exp(-t.theta * x);
        for (int i = 0; i < t.degree; ++i) v *= x;
        if (t.omega != 0.0) v *= t.is_sin ? std::sin(t.omega * x) : std::cos(t.omega * x);
        sum += v;
    }
    return sum;
}

double ExpPoly::value_at_zero() const {
    double sum = 0.0;
    for (const auto& t : terms_)
        if (t.degree == 0 && !t.is_sin) sum += t.coeff;
    return sum;
}

ExpPoly ExpPoly::operator+(const ExpPoly& other) const {
    std::vector<ExpPolyTerm> all = terms_;
    all.insert(all.end(), other.terms_.begin(), other.terms_.end());
    return ExpPoly(std::move(all));
}

ExpPoly ExpPoly::operator-(const ExpPoly& other) const { return *this + other * -1.0; }

ExpPoly ExpPoly::operator*(double scalar) const {
    std::vector<ExpPolyTerm> scaled = terms_;
    for (auto& t : scaled) t.coeff *= scalar;
    return ExpPoly(std::move(scaled));
}

bool ExpPoly::operator==(const ExpPoly& other) const {
    if (terms_.size() != other.terms_.size()) return false;
    for (size_t i = 0; i < terms_.size(); ++i) {
        const auto& a = terms_[i];
        const auto& b = other.terms_[i];
        if (a.coeff != b.coeff || a.theta != b.theta || a.degree != b.degree ||
            a.omega != b.omega || a.is_sin != b.is_sin)
            return false;
    }
    return true;
}

std::string ExpPoly::to_string() const {
    if (terms_.empty()) return "exp_poly(rho=0, theta=0)";
    std::ostringstream os;
    bool first = true;
    for (const auto& t : terms_) {
        if (!first) os << " + ";
        first = false;
        os << "exp_poly(rho=" << format_double(t.coeff) << ", theta=" << format_double(t.theta);
        if (t.degree != 0) os << ", degree=" << t.degree;
        if (t.omega != 0.0)
            os << ", omega=" << format_double(t.omega) << ", phase=" << (t.is_sin ? "sin" : "cos");
        os << ")";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Derivative and spans
// ---------------------------------------------------------------------------

ExpPoly derivative(const ExpPoly& f) {
    std::vector<ExpPolyTerm> out;
    out.reserve(f.terms().size() * 3);
    for (const auto& t : f.terms()) {
        if (t.degree > 0)
            out.push_back({t.coeff * t.degree, t.theta, t.degree - 1, t.omega, t.is_sin});
        out.push_back({-t.coeff * t.theta, t.theta, t.degree, t.omega, t.is_sin});
        if (t.omega != 0.0) {
            // (cos)' = -omega sin, (sin)' = omega cos
            if (t.is_sin)
                out.push_back({t.coeff * t.omega, t.theta, t.degree, t.omega, false});
            else
                out.push_back({-t.coeff * t.omega, t.theta, t.degree, t.omega, true});
        }
    }
    return ExpPoly(std::move(out));
}

std::vector<ExpPoly> derivative_span(const ExpPoly& f) {
    return realization_space({f});
}

std::vector<ExpPoly> realization_space(const std::vector<ExpPoly>& lams) {
    // Krylov property: once a derivative of lam falls inside the accumulated
    // span (which already contains the full derivative spans of the previous
    // lams), every further derivative does too, so one stop test per lam is
    // exact.
    SpanBuilder builder;
    std::vector<ExpPoly> basis;
    for (const auto& lam : lams) {
        ExpPoly g = lam;
        while (!g.is_zero() && builder.accept(g)) {
            basis.push_back(g);
            g = derivative(g);
        }
    }
    return basis;
}

namespace {

Eigen::MatrixXd basis_matrix(const std::vector<ExpPoly>& basis, MonomialIndexer& indexer) {
    std::vector<Eigen::VectorXd> cols;
    cols.reserve(basis.size());
    for (const auto& v : basis) cols.push_back(coeff_vector(v, indexer));
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(indexer.size(), static_cast<Eigen::Index>(basis.size()));
    for (size_t j = 0; j < cols.size(); ++j)
        B.col(static_cast<Eigen::Index>(j)).head(cols[j].size()) = cols[j];
    return B;
}

Eigen::VectorXd solve_in_span(const Eigen::MatrixXd& B, const Eigen::VectorXd& rhs,
                              const std::string& what) {
    Eigen::VectorXd coords = B.colPivHouseholderQr().solve(rhs);
    const double residual = (B * coords - rhs).norm();
    if (residual > kRankTol * std::max(1.0, rhs.norm()))
        throw NotInvariant(what + ": element leaves the span (residual " +
                           std::to_string(residual) + ")");
    return coords;
}

} // namespace

Eigen::MatrixXd shift_matrix(const std::vector<ExpPoly>& basis) {
    const auto d = static_cast<Eigen::Index>(basis.size());
    if (d == 0) return Eigen::MatrixXd(0, 0);
    MonomialIndexer indexer;
    std::vector<Eigen::VectorXd> rhs_cols;
    rhs_cols.reserve(basis.size());
    for (const auto& v : basis) rhs_cols.push_back(coeff_vector(derivative(v), indexer));
    const Eigen::MatrixXd B = basis_matrix(basis, indexer);
    Eigen::MatrixXd D(d, d);
    for (Eigen::Index j = 0; j < d; ++j)
        D.col(j) = solve_in_span(B, pad(rhs_cols[static_cast<size_t>(j)], indexer.size()),
                                 "shift_matrix");
    return D;
}

std::vector<double> coordinates_in_span(const ExpPoly& f, const std::vector<ExpPoly>& basis) {
    if (basis.empty()) throw NotInvariant("coordinates_in_span: empty basis");
    MonomialIndexer indexer;
    Eigen::VectorXd rhs = coeff_vector(f, indexer);
    const Eigen::MatrixXd B = basis_matrix(basis, indexer);
    Eigen::VectorXd coords = solve_in_span(B, pad(rhs, indexer.size()), "coordinates_in_span");
    return std::vector<double>(coords.data(), coords.data() + coords.size());
}

bool decay_check(const ExpPoly& f, double beta_prime) {
    for (const auto& t : f.terms())
        if (!(t.theta > beta_prime / 2.0)) return false;
    return true;
}

ForwardCurve evaluate_on_grid(const ExpPoly& f, ConfigPtr config) {
    std::vector<double> v(static_cast<size_t>(config->n_grid));
    for (int i = 0; i < config->n_grid; ++i)
        v[static_cast<size_t>(i)] = f.evaluate(config->x_at(i));
    return ForwardCurve(std::move(config), std::move(v));
}

} // namespace levyhjmm
