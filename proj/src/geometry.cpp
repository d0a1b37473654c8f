#include "avalanche/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "avalanche/errors.hpp"

namespace avalanche::geometry {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

/// arcosh(1 + x) for x >= 0 without the cancellation std::acosh suffers
/// near 1: log1p(x + sqrt(x (2 + x))).
double acosh1p(double x) {
    if (x < 0.0) throw std::domain_error("acosh1p: negative argument");
    return std::log1p(x + std::sqrt(x * (2.0 + x)));
}

/// Midpoint-rule metric length of the straight segment a -> b.
double segment_length(const ManifoldPoint& a, const ManifoldPoint& b) {
    const double dmu = b.mu - a.mu;
    const double dsg = b.sigma - a.sigma;
    const double smid = 0.5 * (a.sigma + b.sigma);
    return std::sqrt(dmu * dmu + 2.0 * dsg * dsg) / smid;
}

struct KahanSum {
    double sum{0.0};
    double carry{0.0};
    void add(double x) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

double polyline_length(const std::vector<ManifoldPoint>& pts) {
    KahanSum acc;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
        acc.add(segment_length(pts[i], pts[i + 1]));
    return acc.sum;
}

/// Resample a polyline to m segments at uniform cumulative metric length,
/// interpolating linearly in coordinates. Endpoints are preserved exactly.
std::vector<ManifoldPoint> resample_uniform(const std::vector<ManifoldPoint>& pts,
                                            std::size_t m) {
    std::vector<double> cum(pts.size(), 0.0);
    for (std::size_t i = 1; i < pts.size(); ++i)
        cum[i] = cum[i - 1] + segment_length(pts[i - 1], pts[i]);
    const double total = cum.back();

    std::vector<ManifoldPoint> out;
    out.reserve(m + 1);
    out.push_back(pts.front());
    std::size_t seg = 0;
    for (std::size_t j = 1; j < m; ++j) {
        const double target = total * static_cast<double>(j) / static_cast<double>(m);
        while (seg + 2 < pts.size() && cum[seg + 1] < target) ++seg;
        const double lo = cum[seg], hi = cum[seg + 1];
        const double f = (hi > lo) ? (target - lo) / (hi - lo) : 0.0;
        out.push_back({pts[seg].mu + f * (pts[seg + 1].mu - pts[seg].mu),
                       pts[seg].sigma + f * (pts[seg + 1].sigma - pts[seg].sigma)});
    }
    out.push_back(pts.back());
    return out;
}

}  // namespace

bool is_valid(const ManifoldPoint& p) {
    return std::isfinite(p.mu) && std::isfinite(p.sigma) && p.sigma > 0.0;
}

void validate(const ManifoldPoint& p) {
    if (!is_valid(p))
        throw std::domain_error("ManifoldPoint: sigma must be > 0 and coordinates finite");
}

void validate(const DiscretePath& path) {
    if (path.points.empty())
        throw std::domain_error("DiscretePath: empty");
    for (const auto& p : path.points) validate(p);
    for (std::size_t i = 0; i + 1 < path.points.size(); ++i)
        if (path.points[i] == path.points[i + 1])
            throw std::domain_error("DiscretePath: consecutive points must be distinct");
}

double metric_speed(const ManifoldPoint& p, double dmu, double dsigma) {
    validate(p);
    return std::sqrt(dmu * dmu + 2.0 * dsigma * dsigma) / p.sigma;
}

ChristoffelSymbols christoffel(double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw std::domain_error("christoffel: sigma must be > 0");
    return {-1.0 / sigma, 1.0 / (2.0 * sigma), -1.0 / sigma};
}

GeodesicArc geodesic_arc(const ManifoldPoint& p1, const ManifoldPoint& p2,
                         const Tolerances& tol) {
    validate(p1);
    validate(p2);
    if (p1 == p2)
        throw CoincidentPointsError("geodesic_arc: coincident endpoints");
    if (std::abs(p1.mu - p2.mu) < tol.vertical)
        throw VerticalGeodesicError(
            "geodesic_arc: vertical geodesic (mu1 == mu2) has no finite semicircle");
    const double mu_c = 0.5 * (p1.mu + p2.mu) +
                        (p1.sigma * p1.sigma - p2.sigma * p2.sigma) / (p1.mu - p2.mu);
    const double dx = p1.mu - mu_c;
    const double R = std::sqrt(dx * dx + 2.0 * p1.sigma * p1.sigma);
    return {mu_c, R};
}

double arc_residual(const ManifoldPoint& p, const GeodesicArc& arc) {
    const double dx = p.mu - arc.mu_c;
    return std::abs(dx * dx + 2.0 * p.sigma * p.sigma - arc.R * arc.R) / (arc.R * arc.R);
}

double arc_angle(const ManifoldPoint& p, const GeodesicArc& arc) {
    return std::atan2(kSqrt2 * p.sigma, p.mu - arc.mu_c);
}

ManifoldPoint arc_point(const GeodesicArc& arc, double phi) {
    return {arc.mu_c + arc.R * std::cos(phi), arc.R * std::sin(phi) / kSqrt2};
}

double geodesic_length(const ManifoldPoint& p1, const ManifoldPoint& p2,
                       LengthConvention conv) {
    validate(p1);
    validate(p2);
    const double dmu = p2.mu - p1.mu;
    const double dsg = p2.sigma - p1.sigma;
    const double x = (dmu * dmu + 2.0 * dsg * dsg) / (4.0 * p1.sigma * p2.sigma);
    const double base = acosh1p(x);
    return conv == LengthConvention::PaperEq5 ? base : kSqrt2 * base;
}

double linear_path_length(double sharpe, double sigma1, double sigma2) {
    if (!(sigma1 > 0.0) || !(sigma2 > 0.0) || !std::isfinite(sigma1) || !std::isfinite(sigma2))
        throw std::domain_error("linear_path_length: sigmas must be > 0");
    if (!std::isfinite(sharpe))
        throw std::domain_error("linear_path_length: sharpe must be finite");
    if (sigma1 == sigma2) return 0.0;
    return std::sqrt(sharpe * sharpe + 2.0) * std::abs(std::log(sigma2 / sigma1));
}

double excess_action(const ManifoldPoint& p1, const ManifoldPoint& p2,
                     LengthConvention conv, const Tolerances& tol) {
    validate(p1);
    validate(p2);
    const double s1 = p1.mu / p1.sigma;
    const double s2 = p2.mu / p2.sigma;
    if (std::abs(s1 - s2) > tol.sharpe_ray)
        throw SharpeMismatchError("excess_action: points not on a common Sharpe ray (" +
                                  std::to_string(s1) + " vs " + std::to_string(s2) + ")");
    return linear_path_length(s1, p1.sigma, p2.sigma) - geodesic_length(p1, p2, conv);
}

double infinitesimal_excess(double sharpe, double eps, double sigma) {
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw std::domain_error("infinitesimal_excess: sigma must be > 0");
    if (eps < 0.0 || !std::isfinite(eps) || !std::isfinite(sharpe))
        throw std::domain_error("infinitesimal_excess: bad step or sharpe");
    return std::sqrt(sharpe * sharpe + 2.0) * (1.0 - 1.0 / kSqrt2) * eps / sigma;
}

double local_geodesic_slope(const ManifoldPoint& p, const GeodesicArc& arc,
                            const Tolerances& tol) {
    validate(p);
    if (arc_residual(p, arc) > 1e-6)
        throw std::domain_error("local_geodesic_slope: point not on arc");
    const double dx = p.mu - arc.mu_c;
    if (std::abs(dx) < tol.apex)
        throw ApexSingularityError(
            "local_geodesic_slope: unbounded at the arc apex (mu == mu_c); "
            "use the angle parametrization instead");
    return -2.0 * p.sigma / dx;
}

DiscretePath integrate_geodesic(const ManifoldPoint& start,
                                std::pair<double, double> direction,
                                double arclength, std::size_t steps) {
    validate(start);
    const auto [d0, d1] = direction;
    if (d0 == 0.0 && d1 == 0.0)
        throw std::invalid_argument("integrate_geodesic: zero direction");
    if (!(arclength >= 0.0) || !std::isfinite(arclength))
        throw std::domain_error("integrate_geodesic: arclength must be >= 0");
    if (steps < 1)
        throw std::invalid_argument("integrate_geodesic: steps must be >= 1");

    DiscretePath path;
    path.points.reserve(steps + 1);
    path.points.push_back(start);
    if (arclength == 0.0) return path;

    const double speed0 = metric_speed(start, d0, d1);
    double y[4] = {start.mu, start.sigma, d0 / speed0, d1 / speed0};
    const double ds = arclength / static_cast<double>(steps);

    auto deriv = [](const double* s, double* out) {
        const double sg = s[1], umu = s[2], usg = s[3];
        out[0] = umu;
        out[1] = usg;
        out[2] = 2.0 * umu * usg / sg;
        out[3] = -umu * umu / (2.0 * sg) + usg * usg / sg;
    };

    double k1[4], k2[4], k3[4], k4[4], tmp[4];
    for (std::size_t n = 0; n < steps; ++n) {
        deriv(y, k1);
        for (int i = 0; i < 4; ++i) tmp[i] = y[i] + 0.5 * ds * k1[i];
        deriv(tmp, k2);
        for (int i = 0; i < 4; ++i) tmp[i] = y[i] + 0.5 * ds * k2[i];
        deriv(tmp, k3);
        for (int i = 0; i < 4; ++i) tmp[i] = y[i] + ds * k3[i];
        deriv(tmp, k4);
        for (int i = 0; i < 4; ++i)
            y[i] += ds / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        if (!(y[1] > 0.0))
            throw Error("integrate_geodesic: sigma left the upper half-plane");
        path.points.push_back({y[0], y[1]});
    }
    return path;
}

double path_length(const DiscretePath& path) {
    validate(path);
    if (path.points.size() < 2) return 0.0;
    return polyline_length(path.points);
}

MinimizeResult minimize_path_length(const ManifoldPoint& p1, const ManifoldPoint& p2,
                                    std::size_t segments, std::size_t iterations) {
    validate(p1);
    validate(p2);
    if (p1 == p2)
        throw CoincidentPointsError("minimize_path_length: coincident endpoints");
    if (segments < 8)
        throw std::invalid_argument("minimize_path_length: segments must be >= 8");
    if (iterations < 10)
        throw std::invalid_argument("minimize_path_length: iterations must be >= 10");

    // Straight-chord initialization at the coarsest level.
    std::size_t n = std::min<std::size_t>(8, segments);
    std::vector<ManifoldPoint> pts;
    pts.reserve(n + 1);
    for (std::size_t j = 0; j <= n; ++j) {
        const double f = static_cast<double>(j) / static_cast<double>(n);
        pts.push_back({p1.mu + f * (p2.mu - p1.mu), p1.sigma + f * (p2.sigma - p1.sigma)});
    }

    // Local objective around interior point i: only its two incident
    // segments change when the point moves.
    auto local_len = [&pts](std::size_t i, const ManifoldPoint& q) {
        if (!(q.sigma > 0.0)) return std::numeric_limits<double>::infinity();
        return segment_length(pts[i - 1], q) + segment_length(q, pts[i + 1]);
    };

    std::vector<double> history;
    bool final_level = false;
    while (true) {
        final_level = (n == segments);
        double len = polyline_length(pts);
        // Step size starts at one segment length and halves whenever a full
        // sweep stops shortening the path: at a fixed step the accepted
        // moves eventually just oscillate around the minimum.
        double delta = len / static_cast<double>(n);
        if (final_level) history.clear();

        for (std::size_t sweep = 0; sweep < iterations; ++sweep) {
            for (std::size_t i = 1; i < n; ++i) {
                for (int coord = 0; coord < 2; ++coord) {
                    const double h = delta * pts[i].sigma;
                    ManifoldPoint base = pts[i];
                    const double cur = local_len(i, base);
                    ManifoldPoint up = base, dn = base;
                    if (coord == 0) { up.mu += h; dn.mu -= h; }
                    else            { up.sigma += h; dn.sigma -= h; }
                    const double lu = local_len(i, up);
                    const double ld = local_len(i, dn);
                    if (lu < cur && lu <= ld)      { pts[i] = up; }
                    else if (ld < cur)             { pts[i] = dn; }
                }
            }
            // Equal-arclength redistribution kills the tangential drift the
            // midpoint quadrature would otherwise reward on long segments.
            pts = resample_uniform(pts, n);
            const double new_len = polyline_length(pts);
            if (final_level) history.push_back(new_len);
            if (new_len >= len - 1e-13 * std::max(1.0, len)) {
                delta *= 0.5;
                if (delta < 1e-9) break;
            }
            len = new_len;
        }
        if (final_level) break;
        n = std::min(n * 2, segments);
        pts = resample_uniform(pts, n);
    }

    const double final_len = polyline_length(pts);
    if (!history.empty()) {
        const std::size_t mark =
            static_cast<std::size_t>(0.9 * static_cast<double>(history.size() - 1));
        const double improvement = history[mark] - history.back();
        const double scale = std::max(std::abs(history.back()),
                                      std::numeric_limits<double>::min());
        if (improvement / scale > 1e-7)
            throw NonConvergenceError(
                "minimize_path_length: still improving after the sweep budget");
    }

    MinimizeResult res;
    res.path.points = std::move(pts);
    res.length = final_len;
    return res;
}

}  // namespace avalanche::geometry
