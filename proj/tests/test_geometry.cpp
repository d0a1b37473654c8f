#include <cmath>
#include <vector>

#include "doctest.h"

#include "avalanche/errors.hpp"
#include "avalanche/geometry.hpp"
#include "avalanche/rng.hpp"

using namespace avalanche;
using namespace avalanche::geometry;

namespace {

// Closed-form values frozen from high-precision evaluation.
constexpr double kLn2 = 0.6931471805599453;
constexpr double kSqrt2Ln2 = 0.9802581434685472;         // sqrt(2) ln 2
constexpr double kSqrt3Ln2 = 1.2005661338529437;         // sqrt(3) ln 2
constexpr double kExcessVertical = 0.2871109629086019;   // (sqrt(2)-1) ln 2
constexpr double kSqrt2Acosh2 = 1.8624597189054244;      // sqrt(2) arcosh 2
constexpr double kSqrt14_25 = 3.7749172176353748;
constexpr double kApexSigma = 1.224744871391589;         // sqrt(3/2)
constexpr double kInfExcessS0 = 0.004142135623730951;    // sqrt(2)(1-1/sqrt(2)) 0.01
constexpr double kInfExcessS1 = 0.005073059361772882;    // sqrt(3)(1-1/sqrt(2)) 0.01
constexpr double kHalfSqrt2 = 0.7071067811865476;

ManifoldPoint random_point(RngStream& rng, double sigma_lo, double sigma_hi,
                           double mu_abs) {
    return {rng.uniform(-mu_abs, mu_abs), rng.uniform(sigma_lo, sigma_hi)};
}

}  // namespace

TEST_CASE("metric speed") {
    CHECK(metric_speed({0, 1}, 1, 0) == 1.0);
    CHECK(std::fabs(metric_speed({0, 2}, 0, 1) - kHalfSqrt2) <= 1e-16);
    CHECK(metric_speed({5, 1}, 0, 0) == 0.0);
    CHECK_THROWS_AS(metric_speed({0, 0}, 1, 0), std::domain_error);
    CHECK_THROWS_AS(metric_speed({0, -1}, 1, 0), std::domain_error);
}

TEST_CASE("christoffel symbols") {
    const auto g1 = christoffel(1.0);
    CHECK(g1.mu_musigma == -1.0);
    CHECK(g1.sigma_mumu == 0.5);
    CHECK(g1.sigma_sigmasigma == -1.0);

    const auto g2 = christoffel(2.0);
    CHECK(g2.mu_musigma == -0.5);
    CHECK(g2.sigma_mumu == 0.25);
    CHECK(g2.sigma_sigmasigma == -0.5);

    CHECK_THROWS_AS(christoffel(0.0), std::domain_error);
    CHECK_THROWS_AS(christoffel(-3.0), std::domain_error);
}

TEST_CASE("geodesic arc through two points") {
    const GeodesicArc a = geodesic_arc({0, 1}, {2, 1});
    CHECK(a.mu_c == 1.0);
    CHECK(std::fabs(a.R - std::sqrt(3.0)) <= 1e-15);

    const GeodesicArc b = geodesic_arc({0, 1}, {1, 2});
    CHECK(b.mu_c == 3.5);
    CHECK(std::fabs(b.R - kSqrt14_25) <= 1e-15);

    CHECK_THROWS_AS(geodesic_arc({0, 1}, {0, 2}), VerticalGeodesicError);
    CHECK_THROWS_AS(geodesic_arc({3, 2}, {3, 2}), CoincidentPointsError);
}

TEST_CASE("arc endpoint containment on random pairs") {
    RngStream rng(101);
    for (int i = 0; i < 300; ++i) {
        const ManifoldPoint p1 = random_point(rng, 0.1, 10.0, 10.0);
        ManifoldPoint p2 = random_point(rng, 0.1, 10.0, 10.0);
        if (std::fabs(p1.mu - p2.mu) < 1e-6) p2.mu += 0.1;
        const GeodesicArc arc = geodesic_arc(p1, p2);
        CHECK(arc_residual(p1, arc) < 1e-9);
        CHECK(arc_residual(p2, arc) < 1e-9);
    }
}

TEST_CASE("vertical tolerance is overridable") {
    const ManifoldPoint p1{0.0, 1.0};
    const ManifoldPoint p2{1e-10, 2.0};
    CHECK_NOTHROW(geodesic_arc(p1, p2));  // default tol_vertical 1e-12
    Tolerances wide;
    wide.vertical = 1e-8;
    CHECK_THROWS_AS(geodesic_arc(p1, p2, wide), VerticalGeodesicError);
}

TEST_CASE("geodesic length closed forms") {
    CHECK(std::fabs(geodesic_length({0, 1}, {0, 2}, LengthConvention::PaperEq5) - kLn2) <=
          1e-15);
    CHECK(geodesic_length({0, 1}, {0, 1}, LengthConvention::PaperEq5) == 0.0);
    CHECK(std::fabs(geodesic_length({0, 1}, {0, 2}, LengthConvention::MetricConsistent) -
                    kSqrt2Ln2) <= 1e-15);
    CHECK(std::fabs(geodesic_length({0, 1}, {2, 1}, LengthConvention::MetricConsistent) -
                    kSqrt2Acosh2) <= 1e-15);
    CHECK_THROWS_AS(geodesic_length({0, 0}, {0, 1}, LengthConvention::PaperEq5),
                    std::domain_error);
}

TEST_CASE("geodesic length symmetry and convention ratio") {
    RngStream rng(102);
    const double sqrt2 = std::sqrt(2.0);
    for (int i = 0; i < 200; ++i) {
        const ManifoldPoint a = random_point(rng, 0.1, 10.0, 10.0);
        const ManifoldPoint b = random_point(rng, 0.1, 10.0, 10.0);
        const double ab = geodesic_length(a, b, LengthConvention::PaperEq5);
        const double ba = geodesic_length(b, a, LengthConvention::PaperEq5);
        CHECK(ab == ba);  // bit-identical: evaluation order is commutative-safe
        CHECK(geodesic_length(a, b, LengthConvention::MetricConsistent) == sqrt2 * ab);
    }
}

TEST_CASE("triangle inequality in the metric-consistent convention") {
    RngStream rng(103);
    for (int i = 0; i < 200; ++i) {
        const ManifoldPoint a = random_point(rng, 0.1, 10.0, 10.0);
        const ManifoldPoint b = random_point(rng, 0.1, 10.0, 10.0);
        const ManifoldPoint c = random_point(rng, 0.1, 10.0, 10.0);
        const auto conv = LengthConvention::MetricConsistent;
        CHECK(geodesic_length(a, c, conv) <=
              geodesic_length(a, b, conv) + geodesic_length(b, c, conv) + 1e-12);
    }
}

TEST_CASE("linear path length") {
    CHECK(std::fabs(linear_path_length(0, 1, 2) - kSqrt2Ln2) <= 1e-15);
    CHECK(std::fabs(linear_path_length(1, 1, 2) - kSqrt3Ln2) <= 1e-15);
    CHECK(linear_path_length(7, 3, 3) == 0.0);
    CHECK(linear_path_length(0, 2, 1) == linear_path_length(0, 1, 2));  // absolute value
    CHECK_THROWS_AS(linear_path_length(0, 0, 1), std::domain_error);
    CHECK_THROWS_AS(linear_path_length(0, 1, -2), std::domain_error);
}

TEST_CASE("excess action closed forms") {
    CHECK(std::fabs(excess_action({0, 1}, {0, 2}, LengthConvention::PaperEq5) -
                    kExcessVertical) <= 1e-12);
    CHECK(std::fabs(excess_action({0, 1}, {0, 2}, LengthConvention::MetricConsistent)) <=
          1e-15);
    CHECK(excess_action({0, 1}, {0, 1}, LengthConvention::PaperEq5) == 0.0);
    CHECK_THROWS_AS(excess_action({0, 1}, {1, 2}, LengthConvention::PaperEq5),
                    SharpeMismatchError);
}

TEST_CASE("excess action is positive on rays under PaperEq5") {
    RngStream rng(104);
    for (int i = 0; i < 100; ++i) {
        const double s = rng.uniform(-3, 3);
        const double s1 = rng.uniform(0.2, 5);
        double s2 = rng.uniform(0.2, 5);
        if (s2 == s1) s2 += 0.1;
        const ManifoldPoint p1{s * s1, s1};
        const ManifoldPoint p2{s * s2, s2};
        CHECK(excess_action(p1, p2, LengthConvention::PaperEq5) > 0.0);
        CHECK(excess_action(p1, p2, LengthConvention::MetricConsistent) >= 0.0);
    }
}

TEST_CASE("infinitesimal excess") {
    CHECK(std::fabs(infinitesimal_excess(0, 0.01, 1) - kInfExcessS0) <= 1e-15);
    CHECK(infinitesimal_excess(0, 0, 1) == 0.0);
    CHECK(std::fabs(infinitesimal_excess(1, 0.02, 2) - kInfExcessS1) <= 1e-15);
    CHECK_THROWS_AS(infinitesimal_excess(0, 0.01, 0), std::domain_error);
}

TEST_CASE("first-order agreement of finite and infinitesimal excess") {
    // Relative error of the first-order form is ~eps/2: linear convergence.
    double prev_rel = 0.0;
    for (const double eps : {1e-3, 1e-4, 1e-5}) {
        const double finite =
            excess_action({0, 1}, {0, 1 + eps}, LengthConvention::PaperEq5);
        const double first = infinitesimal_excess(0, eps, 1);
        const double rel = std::fabs(first - finite) / finite;
        CHECK(std::fabs(rel - eps / 2) <= 0.05 * (eps / 2));
        if (prev_rel != 0.0) CHECK(prev_rel / rel == doctest::Approx(10.0).epsilon(0.05));
        prev_rel = rel;
    }
}

TEST_CASE("chord length matches metric-consistent distance to second order") {
    // The coordinate chord along a Sharpe ray is not the geodesic, but for
    // nearby points their lengths agree beyond first order.
    for (const double eps : {1e-2, 1e-3}) {
        const ManifoldPoint p{1.0, 1.0};
        const ManifoldPoint q{1.0 + eps, 1.0 + eps};  // S = 1 ray
        const double lin = linear_path_length(1.0, p.sigma, q.sigma);
        const double geo = geodesic_length(p, q, LengthConvention::MetricConsistent);
        CHECK(std::fabs(lin - geo) <= eps * eps);
    }
}

TEST_CASE("local geodesic slope") {
    const GeodesicArc arc{1.0, std::sqrt(3.0)};
    CHECK(local_geodesic_slope({0, 1}, arc) == 2.0);
    CHECK(local_geodesic_slope({2, 1}, arc) == -2.0);
    CHECK_THROWS_AS(local_geodesic_slope({1.0, kApexSigma}, arc), ApexSingularityError);
    CHECK_THROWS_AS(local_geodesic_slope({5, 5}, arc), std::domain_error);  // off arc
}

TEST_CASE("arc angle parametrization is exact at the apex") {
    const GeodesicArc arc{1.0, std::sqrt(3.0)};
    const ManifoldPoint apex = arc_point(arc, std::acos(0.0));  // phi = pi/2
    CHECK(std::fabs(apex.mu - 1.0) <= 1e-15);
    CHECK(std::fabs(apex.sigma - kApexSigma) <= 1e-15);
    // angle -> point -> angle round-trip
    const double phi = arc_angle({0, 1}, arc);
    const ManifoldPoint back = arc_point(arc, phi);
    CHECK(std::fabs(back.mu - 0.0) <= 1e-14);
    CHECK(std::fabs(back.sigma - 1.0) <= 1e-14);
}

TEST_CASE("integrate geodesic: vertical line") {
    const DiscretePath path = integrate_geodesic({0, 1}, {0, 1}, kSqrt2Ln2, 1000);
    REQUIRE(path.points.size() == 1001);
    const ManifoldPoint end = path.points.back();
    CHECK(std::fabs(end.mu - 0.0) <= 1e-9);
    CHECK(std::fabs(end.sigma - 2.0) <= 1e-6);
    // sigma(s) = exp(s / sqrt(2)) along the vertical geodesic
    const ManifoldPoint mid = path.points[500];
    CHECK(std::fabs(mid.sigma - std::exp(0.5 * kSqrt2Ln2 / std::sqrt(2.0))) <= 1e-6);
}

TEST_CASE("integrate geodesic: zero arclength and bad inputs") {
    const DiscretePath path = integrate_geodesic({0, 1}, {1, 1}, 0.0, 100);
    REQUIRE(path.points.size() == 1);
    CHECK(path.points[0] == ManifoldPoint{0, 1});
    CHECK_THROWS_AS(integrate_geodesic({0, 1}, {0, 0}, 1.0, 100), std::invalid_argument);
    CHECK_THROWS_AS(integrate_geodesic({0, 0}, {1, 0}, 1.0, 100), std::domain_error);
}

TEST_CASE("integrate geodesic: semicircle to (2,1)") {
    // Tangent of the (0,1) -> (2,1) geodesic at (0,1) is (2,1); after the
    // metric-consistent distance sqrt(2) arcosh 2 the endpoint comes back to
    // (2,1).
    const DiscretePath path = integrate_geodesic({0, 1}, {2, 1}, kSqrt2Acosh2, 2000);
    const ManifoldPoint end = path.points.back();
    CHECK(std::fabs(end.mu - 2.0) <= 1e-3);
    CHECK(std::fabs(end.sigma - 1.0) <= 1e-3);

    // Every sample stays on the semicircle through the initial conditions.
    const GeodesicArc arc{1.0, std::sqrt(3.0)};
    for (const auto& p : path.points) CHECK(arc_residual(p, arc) < 1e-6);
}

TEST_CASE("integrate geodesic preserves unit metric speed") {
    const DiscretePath path = integrate_geodesic({0, 1}, {2, 1}, 2.0, 1000);
    const double ds = 2.0 / 1000.0;
    for (std::size_t i = 0; i + 1 < path.points.size(); ++i) {
        const auto& a = path.points[i];
        const auto& b = path.points[i + 1];
        const ManifoldPoint mid{0.5 * (a.mu + b.mu), 0.5 * (a.sigma + b.sigma)};
        const double chord = metric_speed(mid, b.mu - a.mu, b.sigma - a.sigma);
        CHECK(std::fabs(chord / ds - 1.0) <= 1e-6);
    }
}

TEST_CASE("path length quadrature") {
    DiscretePath vertical;
    DiscretePath horizontal;
    const std::size_t n = 10000;
    for (std::size_t j = 0; j <= n; ++j) {
        const double f = static_cast<double>(j) / static_cast<double>(n);
        vertical.points.push_back({0.0, 1.0 + f});
        horizontal.points.push_back({2.0 * f, 1.0});
    }
    CHECK(std::fabs(path_length(vertical) - kSqrt2Ln2) <= 1e-6);
    CHECK(std::fabs(path_length(horizontal) - 2.0) <= 1e-6);

    DiscretePath single;
    single.points.push_back({0, 1});
    CHECK(path_length(single) == 0.0);

    DiscretePath degenerate;
    degenerate.points = {{0, 1}, {0, 1}};
    CHECK_THROWS_AS(path_length(degenerate), std::domain_error);
    CHECK_THROWS_AS(path_length(DiscretePath{}), std::domain_error);
}

TEST_CASE("path length additivity under splitting") {
    RngStream rng(105);
    DiscretePath path;
    for (int j = 0; j <= 50; ++j)
        path.points.push_back(
            {static_cast<double>(j) * 0.1 + rng.uniform(0, 0.01), rng.uniform(0.5, 2.0)});
    const double total = path_length(path);
    DiscretePath head, tail;
    head.points.assign(path.points.begin(), path.points.begin() + 20);
    tail.points.assign(path.points.begin() + 19, path.points.end());
    CHECK(std::fabs(path_length(head) + path_length(tail) - total) < 1e-12);
}

TEST_CASE("minimize path length reproduces the closed forms") {
    const MinimizeResult vertical = minimize_path_length({0, 1}, {0, 2});
    CHECK(std::fabs(vertical.length - kSqrt2Ln2) <= 1e-4);

    const MinimizeResult circle = minimize_path_length({0, 1}, {2, 1});
    CHECK(std::fabs(circle.length - kSqrt2Acosh2) <= 1e-4);

    const MinimizeResult tiny = minimize_path_length({0, 1}, {0, 1 + 1e-9}, 8, 10);
    CHECK(std::fabs(tiny.length - std::sqrt(2.0) * 1e-9) <= 1e-12);
}

TEST_CASE("minimize path length input validation") {
    CHECK_THROWS_AS(minimize_path_length({0, 1}, {0, 1}), CoincidentPointsError);
    CHECK_THROWS_AS(minimize_path_length({0, 1}, {0, 2}, 4, 100), std::invalid_argument);
    CHECK_THROWS_AS(minimize_path_length({0, 1}, {0, 2}, 64, 5), std::invalid_argument);
}

TEST_CASE("minimizer never exceeds the straight-chord initialization") {
    RngStream rng(106);
    for (int i = 0; i < 5; ++i) {
        const ManifoldPoint a = random_point(rng, 0.5, 5.0, 5.0);
        ManifoldPoint b = random_point(rng, 0.5, 5.0, 5.0);
        if (a == b) b.sigma += 0.5;
        const MinimizeResult res = minimize_path_length(a, b);
        DiscretePath chord;
        for (int j = 0; j <= 64; ++j) {
            const double f = j / 64.0;
            chord.points.push_back(
                {a.mu + f * (b.mu - a.mu), a.sigma + f * (b.sigma - a.sigma)});
        }
        CHECK(res.length <= path_length(chord) + 1e-12);
    }
}

TEST_CASE("minimizer agrees with the metric-consistent closed form") {
    RngStream rng(107);
    for (int i = 0; i < 10; ++i) {
        const ManifoldPoint a = random_point(rng, 0.5, 5.0, 5.0);
        ManifoldPoint b = random_point(rng, 0.5, 5.0, 5.0);
        if (std::fabs(a.mu - b.mu) < 1e-6) b.mu += 0.2;
        const MinimizeResult res = minimize_path_length(a, b);
        const double oracle = geodesic_length(a, b, LengthConvention::MetricConsistent);
        CHECK(std::fabs(res.length - oracle) <= 1e-4);
        const double paper = geodesic_length(a, b, LengthConvention::PaperEq5);
        if (paper > 0.5) {
            const double ratio = res.length / paper;
            CHECK(ratio >= 1.41);
            CHECK(ratio <= 1.42);
        }
    }
}
