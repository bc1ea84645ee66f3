#include "levyhjmm/power_series.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "levyhjmm/errors.hpp"

namespace levyhjmm {

namespace {

/// Partial sums have settled when the trailing window contributes nothing
/// (relative 1e-10) to the absolute total. Trivially true for singletons,
/// false for slowly converging or divergent tails.
bool partial_sums_stabilized(const std::vector<double>& terms) {
    const size_t n = terms.size();
    if (n <= 1) return true;
    double total = 0.0;
    for (double t : terms) total += std::abs(t);
    const size_t window = std::min(n - 1, std::max<size_t>(4, n / 10));
    double tail = 0.0;
    for (size_t k = n - window; k < n; ++k) tail += std::abs(terms[k]);
    return tail <= 1e-10 * std::max(1.0, total);
}

} // namespace

ProductSeriesResult product_series_sum(const std::vector<double>& a_terms,
                                       const std::vector<double>& b_terms) {
    ProductSeriesResult r{};
    r.a_stabilized = partial_sums_stabilized(a_terms);
    r.b_stabilized = partial_sums_stabilized(b_terms);

    double a_sum = 0.0, b_sum = 0.0;
    for (double a : a_terms) a_sum += a;
    for (double b : b_terms) b_sum += b;
    r.value = a_sum * b_sum;

    double double_sum = 0.0;
    for (double a : a_terms)
        for (double b : b_terms) double_sum += a * b;
    r.two_way_gap = std::abs(r.value - double_sum);
    return r;
}

bool uniform_convergence_bound(const std::vector<double>& term_sup_norms) {
    for (double s : term_sup_norms)
        if (!(s >= 0.0) || !std::isfinite(s)) return false;
    return partial_sums_stabilized(term_sup_norms);
}

std::vector<MultiIndex> graded_multi_indices(int p, int max_degree) {
    std::vector<MultiIndex> out;
    MultiIndex current(static_cast<size_t>(p), 0);
    // Enumerate compositions of each total degree in lexicographic order.
    auto rec = [&](auto&& self, int pos, int remaining) -> void {
        if (pos == p - 1) {
            current[static_cast<size_t>(pos)] = remaining;
            out.push_back(current);
            return;
        }
        for (int k = remaining; k >= 0; --k) {
            current[static_cast<size_t>(pos)] = k;
            self(self, pos + 1, remaining - k);
        }
    };
    for (int d = 0; d <= max_degree; ++d) rec(rec, 0, d);
    return out;
}

std::vector<std::string> MultiSeries::check() const {
    std::vector<std::string> problems;
    if (p < 1) problems.push_back("p must be >= 1");
    if (center.size() != static_cast<size_t>(p)) problems.push_back("center size must equal p");
    if (witness.size() != static_cast<size_t>(p)) problems.push_back("witness size must equal p");
    if (center.size() == witness.size())
        for (size_t i = 0; i < center.size(); ++i)
            if (!(std::abs(witness[i] - center[i]) > 0.0))
                problems.push_back("witness must differ from the center in every coordinate");
    for (const auto& [k, c] : coefficients) {
        if (k.size() != static_cast<size_t>(p)) problems.push_back("multi-index size must equal p");
        int total = 0;
        for (int ki : k) {
            if (ki < 0) problems.push_back("multi-index entries must be >= 0");
            total += ki;
        }
        if (total > max_degree) problems.push_back("multi-index degree exceeds max_degree");
        if (!std::isfinite(c)) problems.push_back("coefficients must be finite");
    }
    return problems;
}

SeriesValue multivariate_eval(const MultiSeries& series, const std::vector<double>& z, double r,
                              int degree_cap) {
    {
        const auto problems = series.check();
        if (!problems.empty())
            throw std::invalid_argument("multivariate_eval: " + problems.front());
    }
    if (z.size() != static_cast<size_t>(series.p))
        throw std::invalid_argument("multivariate_eval: point dimension mismatch");

    double min_gap = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < z.size(); ++i)
        min_gap = std::min(min_gap, std::abs(series.witness[i] - series.center[i]));
    if (!(r > 0.0) || r >= min_gap)
        throw RadiusError("multivariate_eval: need 0 < r < min_i |x_i - a_i|");

    double dist2 = 0.0;
    for (size_t i = 0; i < z.size(); ++i) {
        const double d = z[i] - series.center[i];
        dist2 += d * d;
    }
    if (std::sqrt(dist2) > r * (1.0 + 1e-12))
        throw RadiusError("multivariate_eval: z outside the compact ball K_r(a)");

    const int N = degree_cap < 0 ? series.max_degree : std::min(degree_cap, series.max_degree);

    double value = 0.0;
    double witness_max = 0.0;  // M = max |c_k (x - a)^k| over stored terms up to N
    for (const auto& [k, c] : series.coefficients) {
        int total = 0;
        for (int ki : k) total += ki;
        if (total > N) continue;
        double zk = 1.0, xk = 1.0;
        for (size_t i = 0; i < k.size(); ++i) {
            for (int e = 0; e < k[i]; ++e) {
                zk *= z[i] - series.center[i];
                xk *= series.witness[i] - series.center[i];
            }
        }
        value += c * zk;
        witness_max = std::max(witness_max, std::abs(c * xk));
    }

    // Theta_i = r / |x_i - a_i| in (0,1); tail = M (prod 1/(1-Theta_i) - S_N)
    // with S_N the finite sum of Theta^k over |k| <= N.
    std::vector<double> theta(z.size());
    double full_product = 1.0;
    for (size_t i = 0; i < z.size(); ++i) {
        theta[i] = r / std::abs(series.witness[i] - series.center[i]);
        full_product *= 1.0 / (1.0 - theta[i]);
    }
    // DP over variables: partial[d] = sum over first j variables of Theta^k
    // with |k| = d.
    std::vector<double> partial(static_cast<size_t>(N) + 1, 0.0);
    partial[0] = 1.0;
    for (size_t j = 0; j < theta.size(); ++j) {
        std::vector<double> next(partial.size(), 0.0);
        for (size_t d = 0; d < partial.size(); ++d) {
            double tpow = 1.0;
            for (size_t t = 0; t + d < partial.size(); ++t) {
                next[d + t] += partial[d] * tpow;
                tpow *= theta[j];
            }
        }
        partial = std::move(next);
    }
    double s_n = 0.0;
    for (double v : partial) s_n += v;

    SeriesValue result;
    result.value = value;
    result.tail_bound = std::max(0.0, witness_max * (full_product - s_n));
    return result;
}

} // namespace levyhjmm
