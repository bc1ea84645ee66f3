#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>

#include <boost/math/distributions/chi_squared.hpp>

#include "levyhjmm/errors.hpp"
#include "levyhjmm/levy_model.hpp"
#include "levyhjmm/rng.hpp"
#include "oracles.hpp"

using namespace levyhjmm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<LevyModel> model_zoo() {
    return {
        LevyModel::brownian(0.0, 1.0),
        LevyModel::brownian(0.7, 0.3),
        LevyModel::compound_poisson(0.0, 0.0, 1.0, JumpDistribution::point_mass(1.0)),
        LevyModel::compound_poisson(0.1, 0.2, 5.0, JumpDistribution::exponential(5.0)),
        LevyModel::compound_poisson(0.0, 0.0, 2.0, JumpDistribution::normal(0.1, 0.4)),
        LevyModel::merton(0.0, 0.5, 3.0, 0.0, 0.3),
        LevyModel::gamma_process(0.0, 0.0, 8.0, 8.0),
        LevyModel::bilateral_gamma(0.0, 0.1, 4.0, 6.0, 3.0, 7.0),
    };
}

/// Safe probe points inside D(Psi) for each model.
std::vector<double> probe_points(const LevyModel& m) {
    const CumulantDomain d = cumulant_domain(m);
    const double hi = std::min(d.hi, 3.0);
    const double lo = std::max(d.lo, -3.0);
    std::vector<double> zs;
    for (double u : {0.1, 0.35, 0.7, 0.95})
        zs.push_back(lo * 0.45 + (hi * 0.45 - lo * 0.45) * u);
    zs.push_back(0.45 * hi);
    zs.push_back(0.45 * lo);
    return zs;
}

} // namespace

TEST_CASE("cumulant closed forms", "[levy]") {
    SECTION("brownian reduces to c z^2 / 2") {
        const auto m = LevyModel::brownian(0.0, 1.0);
        REQUIRE_THAT(cumulant(m, 2.0), WithinAbs(2.0, 1e-14));
    }
    SECTION("zero at zero for every kind") {
        for (const auto& m : model_zoo()) REQUIRE_THAT(cumulant(m, 0.0), WithinAbs(0.0, 1e-14));
    }
    SECTION("point-mass jumps: e - 2 at z = 1") {
        const auto m = LevyModel::compound_poisson(0.0, 0.0, 1.0, JumpDistribution::point_mass(1.0));
        REQUIRE_THAT(cumulant(m, 1.0), WithinRel(std::exp(1.0) - 2.0, 1e-12));
    }
    SECTION("quadrature route agrees to 1e-10 relative") {
        for (const auto& m : model_zoo()) {
            for (double z : probe_points(m)) {
                const double closed = cumulant(m, z);
                const double quad = oracles::quad_cumulant(m, z);
                REQUIRE_THAT(quad, WithinRel(closed, 1e-10) || WithinAbs(closed, 1e-13));
            }
        }
    }
    SECTION("domain violations throw") {
        const auto cp = LevyModel::compound_poisson(0.0, 0.0, 1.0, JumpDistribution::exponential(2.0));
        REQUIRE_THROWS_AS(cumulant(cp, 2.0), DomainError);
        REQUIRE_THROWS_AS(cumulant(cp, 2.5), DomainError);
        const auto g = LevyModel::gamma_process(0.0, 0.0, 1.0, 3.0);
        REQUIRE_THROWS_AS(cumulant(g, 3.0), DomainError);
        const auto bg = LevyModel::bilateral_gamma(0.0, 0.0, 1.0, 2.0, 1.0, 4.0);
        REQUIRE_THROWS_AS(cumulant(bg, -4.0), DomainError);
        REQUIRE_NOTHROW(cumulant(bg, -3.9));
    }
}

TEST_CASE("cumulant derivative", "[levy]") {
    SECTION("brownian: Psi' = c z") {
        REQUIRE_THAT(cumulant_derivative(LevyModel::brownian(0.0, 1.0), 3.0),
                     WithinAbs(3.0, 1e-14));
    }
    SECTION("Psi'(0) = b for every kind") {
        for (const auto& m : model_zoo())
            REQUIRE_THAT(cumulant_derivative(m, 0.0), WithinAbs(m.b, 1e-14));
    }
    SECTION("point-mass jumps: e - 1 at z = 1") {
        const auto m = LevyModel::compound_poisson(0.0, 0.0, 1.0, JumpDistribution::point_mass(1.0));
        REQUIRE_THAT(cumulant_derivative(m, 1.0), WithinRel(std::exp(1.0) - 1.0, 1e-12));
    }
    SECTION("matches central differences of the cumulant to 1e-6 relative") {
        for (const auto& m : model_zoo()) {
            for (double z : probe_points(m)) {
                const double h = 1e-5;
                const double fd =
                    oracles::central_diff([&](double u) { return cumulant(m, u); }, z, h);
                const double closed = cumulant_derivative(m, z);
                REQUIRE_THAT(fd, WithinRel(closed, 1e-6) || WithinAbs(closed, 1e-9));
            }
        }
    }
    SECTION("convexity: Psi'' >= 0 on a grid") {
        for (const auto& m : model_zoo()) {
            for (double z : probe_points(m)) {
                const double h = 1e-4;
                const double second =
                    (cumulant(m, z + h) - 2.0 * cumulant(m, z) + cumulant(m, z - h)) / (h * h);
                REQUIRE(second >= -1e-6);
            }
        }
    }
}

TEST_CASE("taylor coefficients", "[levy]") {
    SECTION("brownian: (0, 0, c/2, 0, 0)") {
        const auto s = taylor_coefficients(LevyModel::brownian(0.0, 1.0), 4);
        REQUIRE(s.coefficients.size() == 5);
        REQUIRE_THAT(s.coefficients[0], WithinAbs(0.0, 1e-15));
        REQUIRE_THAT(s.coefficients[1], WithinAbs(0.0, 1e-15));
        REQUIRE_THAT(s.coefficients[2], WithinAbs(0.5, 1e-15));
        REQUIRE_THAT(s.coefficients[3], WithinAbs(0.0, 1e-15));
        REQUIRE_THAT(s.coefficients[4], WithinAbs(0.0, 1e-15));
    }
    SECTION("point-mass jumps: a_n = 1/n!") {
        const auto m = LevyModel::compound_poisson(0.0, 0.0, 1.0, JumpDistribution::point_mass(1.0));
        const auto s = taylor_coefficients(m, 4);
        for (int n = 2; n <= 4; ++n) {
            double fact = 1.0;
            for (int i = 2; i <= n; ++i) fact *= i;
            REQUIRE_THAT(s.coefficients[static_cast<size_t>(n)], WithinRel(1.0 / fact, 1e-12));
            REQUIRE_THAT(oracles::quad_levy_moment(m, n), WithinRel(1.0, 1e-10));
        }
    }
    SECTION("symmetric merton: a_3 = 0") {
        const auto m = LevyModel::merton(1.0, 0.0, 1.0, 0.0, 1.0);
        const auto s = taylor_coefficients(m, 3);
        REQUIRE_THAT(s.coefficients[3], WithinAbs(0.0, 1e-14));
        REQUIRE_THAT(oracles::quad_levy_moment(m, 3), WithinAbs(0.0, 1e-10));
        REQUIRE_THAT(s.coefficients[1], WithinAbs(1.0, 1e-15));
    }
    SECTION("closed-form moments match quadrature for every kind") {
        for (const auto& m : model_zoo()) {
            for (int n = 2; n <= 6; ++n) {
                const double closed = levy_moment(m, n);
                const double quad = oracles::quad_levy_moment(m, n);
                const double scale = std::max(1e-12, levy_moment_magnitude(m, n));
                REQUIRE_THAT(quad / scale, WithinAbs(closed / scale, 1e-9));
            }
        }
    }
    SECTION("agrees with finite differences of Psi at 0") {
        const auto m = LevyModel::compound_poisson(0.3, 0.2, 5.0, JumpDistribution::exponential(5.0));
        const auto s = taylor_coefficients(m, 3);
        const double h = 1e-3;
        const auto f = [&](double z) { return cumulant(m, z); };
        const double d2 = (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
        const double d3 = (f(2 * h) - 2.0 * f(h) + 2.0 * f(-h) - f(-2 * h)) / (2.0 * h * h * h);
        REQUIRE_THAT(d2 / 2.0, WithinRel(s.coefficients[2], 1e-5));
        REQUIRE_THAT(d3 / 6.0, WithinRel(s.coefficients[3], 1e-3));
    }
    SECTION("a_2 > 0 whenever c + F(R) > 0") {
        for (const auto& m : model_zoo()) REQUIRE(taylor_coefficients(m, 2).coefficients[2] > 0.0);
    }
    SECTION("partial sums converge monotonically inside the radius") {
        const auto m = LevyModel::compound_poisson(0.0, 0.0, 5.0, JumpDistribution::exponential(2.0));
        const double z = 0.4;  // radius hint is 2
        const double exact = cumulant(m, z);
        const auto s = taylor_coefficients(m, 14);
        REQUIRE(s.radius_hint == 2.0);
        double prev_err = std::numeric_limits<double>::infinity();
        for (int N = 2; N <= 14; N += 2) {
            CumulantSeries partial{std::vector<double>(s.coefficients.begin(),
                                                       s.coefficients.begin() + N + 1),
                                   s.radius_hint};
            const double err = std::abs(partial.evaluate(z) - exact);
            REQUIRE(err <= prev_err + 1e-15);
            prev_err = err;
        }
        REQUIRE(prev_err < 1e-8);
    }
    SECTION("huge orders overflow to MomentError") {
        const auto m = LevyModel::compound_poisson(0.0, 0.0, 1.0, JumpDistribution::exponential(0.5));
        REQUIRE_THROWS_AS(taylor_coefficients(m, 400), MomentError);
    }
}

TEST_CASE("domain membership", "[levy]") {
    REQUIRE(domain_contains(LevyModel::brownian(0.0, 1.0), -50.0, 50.0));
    const auto cp = LevyModel::compound_poisson(0.0, 0.0, 1.0, JumpDistribution::exponential(2.0));
    REQUIRE(domain_contains(cp, -1.0, 1.0));
    REQUIRE_FALSE(domain_contains(cp, -1.0, 3.0));
    REQUIRE_FALSE(domain_contains(cp, -1.0, 2.0));  // boundary excluded
    const auto bg = LevyModel::bilateral_gamma(0.0, 0.0, 1.0, 2.0, 1.0, 4.0);
    REQUIRE(domain_contains(bg, -3.9, 1.9));
    REQUIRE_FALSE(domain_contains(bg, -4.1, 1.0));
}

TEST_CASE("moment nonvanishing index", "[levy]") {
    const auto cp_exp = LevyModel::compound_poisson(0.0, 0.0, 1.0, JumpDistribution::exponential(2.0));
    REQUIRE(moment_nonvanishing_index(cp_exp, 10) == 1);
    const auto merton = LevyModel::merton(1.0, 0.0, 1.0, 0.0, 1.0);
    REQUIRE_FALSE(moment_nonvanishing_index(merton, 10).has_value());
    const auto cp_pm = LevyModel::compound_poisson(0.0, 0.0, 1.0, JumpDistribution::point_mass(1.0));
    REQUIRE(moment_nonvanishing_index(cp_pm, 10) == 1);
    const auto sym_bg = LevyModel::bilateral_gamma(0.0, 0.0, 2.0, 5.0, 2.0, 5.0);
    REQUIRE_FALSE(moment_nonvanishing_index(sym_bg, 10).has_value());
    REQUIRE_FALSE(moment_nonvanishing_index(LevyModel::brownian(0.0, 1.0), 10).has_value());
    REQUIRE(moment_nonvanishing_index(LevyModel::gamma_process(0.0, 0.0, 2.0, 4.0), 10) == 1);
    // Shifted jump mean: the first moment vanishes but later ones do not.
    const auto centered =
        LevyModel::compound_poisson(0.0, 0.0, 1.0, JumpDistribution::normal(0.0, 1.0));
    REQUIRE_FALSE(moment_nonvanishing_index(centered, 10).has_value());
}

TEST_CASE("model invariants", "[levy]") {
    REQUIRE(LevyModel::brownian(0.0, 1.0).check().empty());
    REQUIRE_FALSE(LevyModel::brownian(0.0, -1.0).check().empty());
    REQUIRE_FALSE(LevyModel::brownian(0.5, 0.0).check().empty());  // c + F(R) = 0
    REQUIRE_FALSE(
        LevyModel::compound_poisson(0.0, 0.0, -1.0, JumpDistribution::point_mass(1.0)).check().empty());
    REQUIRE(LevyModel::gamma_process(0.0, 0.0, 1.0, 2.0).check().empty());
}

TEST_CASE("increment sampling", "[levy][sampling]") {
    SECTION("seeded determinism") {
        for (const auto& m : model_zoo()) {
            auto r1 = path_stream(42, 7);
            auto r2 = path_stream(42, 7);
            REQUIRE(sample_increment(m, 1.0, r1) == sample_increment(m, 1.0, r2));
            auto r3 = path_stream(42, 8);
            // different stream, almost surely different draw
            REQUIRE(sample_increment(m, 1.0, r3) != sample_increment(m, 1.0, r1));
        }
    }

    SECTION("empirical mean and variance match Psi'(0) dt and Psi''(0) dt") {
        const int n = 100000;
        const double dt = 1.0;
        for (const auto& m : model_zoo()) {
            auto rng = path_stream(1234, 0);
            std::vector<double> draws(n);
            for (auto& d : draws) d = sample_increment(m, dt, rng);
            double mean = 0.0;
            for (double d : draws) mean += d;
            mean /= n;
            double var = 0.0, m4 = 0.0;
            for (double d : draws) {
                const double u = d - mean;
                var += u * u;
                m4 += u * u * u * u;
            }
            var /= n - 1;
            m4 /= n;

            const double target_mean = m.b * dt;
            const double target_var = (m.c + levy_moment(m, 2)) * dt;
            const double se_mean = std::sqrt(var / n);
            REQUIRE_THAT(mean, WithinAbs(target_mean, 4.0 * se_mean));
            const double kurt = m4 / (var * var);
            const double se_var = var * std::sqrt(std::max(kurt - 1.0, 0.0) / n);
            REQUIRE_THAT(var, WithinAbs(target_var, 5.0 * se_var));
        }
    }

    SECTION("jump counts follow the Poisson law as dt -> 0") {
        // Point-mass jumps of size 1 make counts recoverable from increments.
        const auto m = LevyModel::compound_poisson(0.0, 0.0, 1.0, JumpDistribution::point_mass(1.0));
        const double dt = 0.05;
        const int n = 20000;
        auto rng = path_stream(99, 0);
        std::map<int, int> counts;
        for (int i = 0; i < n; ++i) {
            const double inc = sample_increment(m, dt, rng);
            const int jumps = static_cast<int>(std::lround(inc + m.intensity * dt));
            counts[std::min(jumps, 3)]++;
        }
        const double lambda = m.intensity * dt;
        std::vector<double> expected(4, 0.0);
        double pmf = std::exp(-lambda);
        double cumulative = 0.0;
        for (int k = 0; k < 3; ++k) {
            expected[static_cast<size_t>(k)] = n * pmf;
            cumulative += pmf;
            pmf *= lambda / (k + 1);
        }
        expected[3] = n * (1.0 - cumulative);
        double chi2 = 0.0;
        for (int k = 0; k <= 3; ++k) {
            const double e = std::max(expected[static_cast<size_t>(k)], 1e-9);
            const double o = counts.count(k) ? counts[k] : 0;
            chi2 += (o - e) * (o - e) / e;
        }
        boost::math::chi_squared chi_dist(3);
        REQUIRE(chi2 < boost::math::quantile(chi_dist, 0.999));
        // dt -> 0: no-jump frequency approaches e^{-dt}
        const double p0 = static_cast<double>(counts[0]) / n;
        REQUIRE_THAT(p0, WithinAbs(std::exp(-lambda), 4.0 * std::sqrt(std::exp(-lambda) *
                                                                      (1 - std::exp(-lambda)) / n)));
    }

    SECTION("dt must be positive") {
        auto rng = path_stream(1, 0);
        REQUIRE_THROWS_AS(sample_increment(LevyModel::brownian(0.0, 1.0), 0.0, rng),
                          std::invalid_argument);
    }
}
