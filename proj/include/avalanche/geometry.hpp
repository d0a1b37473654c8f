// Geometry of the Gaussian statistical manifold: the upper half-plane
// {(mu, sigma) : sigma > 0} with metric ds^2 = (dmu^2 + 2 dsigma^2) / sigma^2.
//
// Geodesics are the semicircles (mu - mu_c)^2 + 2 sigma^2 = R^2 centered on
// the mu-axis (vertical lines in the equal-mu limit). Two length conventions
// coexist and differ by exactly sqrt(2):
//
//   PaperEq5         arcosh(1 + ((mu2-mu1)^2 + 2(sigma2-sigma1)^2)/(4 sigma1 sigma2))
//   MetricConsistent sqrt(2) times the above; this one agrees with the length
//                    functional of the metric (and with the discrete
//                    minimization oracle in minimize_path_length).
//
// All functions here are pure; values are immutable after construction.

#ifndef AVALANCHE_GEOMETRY_HPP
#define AVALANCHE_GEOMETRY_HPP

#include <cstddef>
#include <utility>
#include <vector>

namespace avalanche::geometry {

// ---------------------------------------------------------------- types ----

/// A market state (mu, sigma) on the upper half-plane. sigma must be > 0
/// and both coordinates finite.
struct ManifoldPoint {
    double mu{0.0};
    double sigma{1.0};

    friend bool operator==(const ManifoldPoint&, const ManifoldPoint&) = default;
};

bool is_valid(const ManifoldPoint& p);

/// Throws std::domain_error if p is not a valid upper-half-plane point.
void validate(const ManifoldPoint& p);

/// Semicircle parameters of a Fisher-Rao geodesic: center mu_c on the
/// mu-axis and radius R > 0. Points p on the arc satisfy
/// (p.mu - mu_c)^2 + 2 p.sigma^2 = R^2.
struct GeodesicArc {
    double mu_c{0.0};
    double R{1.0};
};

enum class LengthConvention {
    PaperEq5,          // arcosh closed form as printed
    MetricConsistent,  // sqrt(2) * PaperEq5; consistent with the metric
};

/// An ordered polyline of manifold points. Carrier for quadrature and for
/// the discrete minimization oracle. Consecutive points must be distinct.
struct DiscretePath {
    std::vector<ManifoldPoint> points;
};

void validate(const DiscretePath& path);

/// Named tolerance constants, overridable per call site.
struct Tolerances {
    double vertical = 1e-12;      // |mu1 - mu2| below this => vertical geodesic
    double apex = 1e-10;          // |mu - mu_c| below this => apex singularity
    double arc_residual = 1e-9;   // relative endpoint residual on an arc
    double sharpe_ray = 1e-9;     // |mu1/sigma1 - mu2/sigma2| ray tolerance
};

struct ChristoffelSymbols {
    double mu_musigma;       // Gamma^mu_{mu sigma} = -1/sigma
    double sigma_mumu;       // Gamma^sigma_{mu mu}  = 1/(2 sigma)
    double sigma_sigmasigma; // Gamma^sigma_{sigma sigma} = -1/sigma
};

// ----------------------------------------------------------- operations ----

/// Speed of the displacement (dmu, dsigma) at p in the Fisher metric:
/// sqrt(dmu^2 + 2 dsigma^2) / sigma.
double metric_speed(const ManifoldPoint& p, double dmu, double dsigma);

ChristoffelSymbols christoffel(double sigma);

/// Semicircle through two points. Throws CoincidentPointsError when p1 == p2
/// and VerticalGeodesicError when |p1.mu - p2.mu| < tol.vertical.
GeodesicArc geodesic_arc(const ManifoldPoint& p1, const ManifoldPoint& p2,
                         const Tolerances& tol = {});

/// Relative residual |(mu-mu_c)^2 + 2 sigma^2 - R^2| / R^2 of p on arc.
double arc_residual(const ManifoldPoint& p, const GeodesicArc& arc);

/// Angle parametrization of an arc: mu = mu_c + R cos(phi),
/// sigma = (R/sqrt(2)) sin(phi), phi in (0, pi). Safe at the apex where
/// dmu/dsigma blows up.
double arc_angle(const ManifoldPoint& p, const GeodesicArc& arc);
ManifoldPoint arc_point(const GeodesicArc& arc, double phi);

/// Geodesic distance between two points under the chosen convention.
/// Symmetric in its arguments; zero iff p1 == p2.
double geodesic_length(const ManifoldPoint& p1, const ManifoldPoint& p2,
                       LengthConvention conv);

/// Metric length of the constant-Sharpe chord between sigma1 and sigma2:
/// sqrt(S^2 + 2) * |ln(sigma2/sigma1)|. The absolute value extends the
/// closed form to sigma2 < sigma1.
double linear_path_length(double sharpe, double sigma1, double sigma2);

/// Excess action Delta_L = L_lin - L_geo for two points on a common Sharpe
/// ray. Throws SharpeMismatchError when mu1/sigma1 != mu2/sigma2 within
/// tol.sharpe_ray. Strictly positive for distinct sigmas under PaperEq5.
double excess_action(const ManifoldPoint& p1, const ManifoldPoint& p2,
                     LengthConvention conv, const Tolerances& tol = {});

/// First-order excess action of an infinitesimal constant-Sharpe step:
/// sqrt(S^2 + 2) * (1 - 1/sqrt(2)) * eps / sigma.
double infinitesimal_excess(double sharpe, double eps, double sigma);

/// Local geodesic direction dmu/dsigma = -2 sigma / (mu - mu_c) at a point
/// on the arc. Throws ApexSingularityError when |mu - mu_c| < tol.apex;
/// callers needing a direction there should use the angle parametrization.
double local_geodesic_slope(const ManifoldPoint& p, const GeodesicArc& arc,
                            const Tolerances& tol = {});

/// Integrate the geodesic ODE
///   mu''    = (2/sigma) mu' sigma'
///   sigma'' = -mu'^2/(2 sigma) + sigma'^2/sigma
/// from `start` with the given initial direction (normalized internally to
/// unit metric speed), for `arclength` in the MetricConsistent metric,
/// using `steps` RK4 steps. Returns steps+1 samples (a single sample when
/// arclength == 0).
DiscretePath integrate_geodesic(const ManifoldPoint& start,
                                std::pair<double, double> direction,
                                double arclength, std::size_t steps);

/// Metric length of a polyline by per-segment midpoint quadrature
/// (compensated summation; additive under concatenation).
double path_length(const DiscretePath& path);

struct MinimizeResult {
    DiscretePath path;
    double length{0.0};
};

/// Independent discrete oracle for geodesic distance: coordinate-wise
/// descent with step halving on the interior points of a polyline with
/// fixed endpoints, coarse-to-fine (segment doubling) with arc-length
/// resampling between sweeps. `segments` is the final resolution (>= 8);
/// `iterations` is the sweep budget per refinement level.
///
/// Deliberately built on path_length quadrature only, never on the arcosh
/// closed form, so it can arbitrate the sqrt(2) normalization question.
/// Throws NonConvergenceError when the objective is still improving by more
/// than 1e-7 relative over the final 10% of sweeps at the finest level.
MinimizeResult minimize_path_length(const ManifoldPoint& p1, const ManifoldPoint& p2,
                                    std::size_t segments = 1024,
                                    std::size_t iterations = 400);

}  // namespace avalanche::geometry

#endif  // AVALANCHE_GEOMETRY_HPP
