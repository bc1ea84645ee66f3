#pragma once

#include <string>
#include <utility>
#include <vector>

namespace levyhjmm {

// =============================================================================
// Multivariate power series utilities
//
// Supports the series manipulations behind the rank arguments: Cauchy
// products of absolutely convergent series, a Weierstrass-style uniform
// convergence certificate, and truncated evaluation of a multivariate power
// series with a closed-form geometric tail bound derived from a witness
// point of convergence.
// =============================================================================

struct ProductSeriesResult {
    double value;         // (sum a_k) * (sum b_l)
    double two_way_gap;   // |product form - brute-force double sum|
    bool a_stabilized;    // partial sums of sum |a_k| settled
    bool b_stabilized;
};

/// Sum of a_k b_l over all index pairs, computed as the product of the two
/// sums (valid for absolutely convergent series); the brute-force double sum
/// is recorded as a cross-check diagnostic. Sequences are the series terms.
ProductSeriesResult product_series_sum(const std::vector<double>& a_terms,
                                       const std::vector<double>& b_terms);

/// Certificate that sum ||f_n||_K converges, from the sequence of sup norms:
/// true when the absolute partial sums have stabilized (tail window
/// negligible against the total). Conservative: slowly converging series are
/// rejected.
bool uniform_convergence_bound(const std::vector<double>& term_sup_norms);

/// Multi-index with total degree |k| = k_1 + ... + k_p.
using MultiIndex = std::vector<int>;

struct MultiSeries {
    int p = 2;                       // number of variables
    int max_degree = 0;              // coefficients stored for |k| <= max_degree
    std::vector<double> center;      // a in R^p
    std::vector<double> witness;     // x with |x_i - a_i| > 0, series converges at x
    // Coefficients in graded-lexicographic order over all |k| <= max_degree.
    std::vector<std::pair<MultiIndex, double>> coefficients;

    std::vector<std::string> check() const;
};

/// All multi-indices of dimension p with total degree <= max_degree in
/// graded-lexicographic order.
std::vector<MultiIndex> graded_multi_indices(int p, int max_degree);

struct SeriesValue {
    double value;       // truncated sum up to the requested degree
    double tail_bound;  // M * sum_{|k| > degree} Theta^k, closed form
};

/// Evaluate the series at z in the compact ball K_r(a), truncating at
/// total degree <= degree_cap (default: all stored coefficients). The tail
/// bound uses Theta_i = r / |x_i - a_i| and M = max over stored terms of
/// |c_k (x - a)^k|, following the geometric comparison at the witness point.
/// Throws RadiusError when r >= min_i |x_i - a_i| or ||z - a|| > r.
SeriesValue multivariate_eval(const MultiSeries& series, const std::vector<double>& z, double r,
                              int degree_cap = -1);

} // namespace levyhjmm
