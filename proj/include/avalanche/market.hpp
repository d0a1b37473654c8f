// Market layer: avalanche events map to volatility jumps on the manifold,
// the Sharpe constraint ties drift to volatility, price follows the target
// discounted by the required excess return, and small off-manifold
// excursions relax back by linear response.

#ifndef AVALANCHE_MARKET_HPP
#define AVALANCHE_MARKET_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "avalanche/geometry.hpp"
#include "avalanche/rng.hpp"
#include "avalanche/sandpile.hpp"

namespace avalanche::market {

using geometry::DiscretePath;
using geometry::ManifoldPoint;

// ---------------------------------------------------------------- types ----

struct MarketState {
    ManifoldPoint point;         // current (mu, sigma), mu = sharpe * sigma on-ray
    double price{100.0};         // > 0
    double target_price{100.0};  // long-run target P*, > 0
    double sharpe{0.5};          // S = mu/sigma, slowly varying
    double horizon{1.0};         // discounting horizon H, > 0
};

void validate(const MarketState& s);

/// Price rule P = P* exp(-S sigma H): the simplest rule that is strictly
/// decreasing in sigma (for S > 0) and drops discontinuously when sigma
/// jumps.
double price_rule(double target_price, double sharpe, double sigma, double horizon);

/// Avalanche-size-to-volatility mapping. Any kind is monotonically
/// non-decreasing in s and maps s = 0 to a zero increment; jumps stay
/// discontinuous in time by construction.
struct VolMapping {
    enum class Kind { Linear, Log1p, PowerCapped };
    Kind kind{Kind::Log1p};
    double k{0.05};         // gain, > 0
    double gamma{0.5};      // PowerCapped exponent, > 0
    double cap{10.0};       // PowerCapped cap, > 0
    double kappa{1.0};      // mean-reversion rate, >= 0
    double sigma_bar{0.2};  // mean-reversion level, > 0

    /// k * g(s): the sigma increment for an avalanche of size s.
    double jump_increment(double s) const;
};

void validate(const VolMapping& m);

/// Displacement off the equilibrium manifold with its Onsager transport
/// matrix. Construction rejects asymmetric matrices (reciprocity).
class OffManifoldState {
public:
    using Vec2 = std::array<double, 2>;
    using Mat2 = std::array<std::array<double, 2>, 2>;

    OffManifoldState(Vec2 eta, Mat2 transport);

    const Vec2& eta() const { return eta_; }
    const Mat2& transport() const { return transport_; }
    double eta_norm() const;

    friend OffManifoldState onsager_step(const OffManifoldState& off,
                                         const Vec2& forces, double dt);

private:
    Vec2 eta_;
    Mat2 transport_;
};

/// Explicit Euler linear-response step: eta += (L * forces) dt.
OffManifoldState onsager_step(const OffManifoldState& off,
                              const OffManifoldState::Vec2& forces, double dt);

enum class Regime { Creep, Avalanche, Relaxation };
enum class PathMode { Geodesic, Euclidean };

struct TrajectorySample {
    double t{0.0};
    double price{0.0};
    double mu{0.0};
    double sigma{0.0};
    Regime regime{Regime::Creep};
    PathMode path_mode{PathMode::Geodesic};
};

/// Time-indexed market trace; times strictly increasing, sigma > 0.
struct MarketTrajectory {
    std::vector<TrajectorySample> samples;
};

void validate(const MarketTrajectory& t);

// ----------------------------------------------------------- operations ----

/// Volatility jump: sigma += k g(s), mu re-imposed to S sigma, price drops
/// per the price rule with the target unchanged.
MarketState apply_avalanche(const MarketState& state, double s, const VolMapping& mapping);

/// Inter-avalanche creep: sigma decays exponentially toward sigma_bar at
/// rate kappa, the target price adjusts slowly toward the price at rate
/// rho, and the price is recomputed. Never increases sigma above its
/// pre-step value while sigma > sigma_bar.
MarketState relax_between_avalanches(const MarketState& state, double dt,
                                     const VolMapping& mapping, double rho);

/// Sampled transition between two manifold points. Geodesic: n+1 points
/// uniform in arc angle on the semicircle (uniform in hyperbolic arc length
/// on a vertical line). Euclidean: sigma affine in the path fraction with
/// mu = S sigma; both endpoints are reproduced exactly.
DiscretePath transition_path(const ManifoldPoint& from, const ManifoldPoint& to,
                             PathMode mode, std::size_t n);

// ----------------------------------------------------------- simulation ----

enum class EventSource { None, Lattice, Slope };

/// Full simulation configuration. Defaults give a well-behaved run; see
/// validate_config for the constraints.
struct SimConfig {
    EventSource source{EventSource::Lattice};
    std::uint64_t seed{0};
    std::int64_t steps{1000};
    double dt{0.1};

    // lattice source
    std::size_t lattice_size{16};
    int lattice_threshold{4};

    // slope source
    sandpile::SlopeState slope{};
    sandpile::IntensityLaw intensity{};

    VolMapping mapping{};
    double rho{0.01};          // target-price adjustment rate, << kappa
    double sharpe{0.5};
    double sharpe_drift{0.0};  // optional dS/dt, default 0
    double horizon{1.0};
    double target_price0{100.0};
    double sigma0{0.4};

    PathMode path_mode{PathMode::Geodesic};
    std::size_t path_samples{16};     // points per avalanche traversal
    double epsilon_frac{1e-3};        // traversal duration as a fraction of the
                                      // mean inter-avalanche time

    // Onsager excursion after each avalanche (optional)
    bool onsager_enabled{false};
    OffManifoldState::Mat2 onsager_transport{{{1.0, 0.0}, {0.0, 1.0}}};
    double onsager_kick{0.01};        // initial |eta| scale per unit jump
    std::size_t onsager_steps{8};
    double onsager_dt{0.05};
};

void validate_config(const SimConfig& config);

/// Run the event-driven market simulation: grain-by-grain (or slope-step)
/// loading, avalanche traversals compressed into a short window, optional
/// off-manifold relaxation, creep in between. Deterministic per seed.
MarketTrajectory simulate(const SimConfig& config, RngStream& rng);

// Enum <-> string helpers shared by CSV, JSON, and config parsing.
std::string to_string(Regime r);
std::string to_string(PathMode m);
std::string to_string(EventSource s);
std::string to_string(VolMapping::Kind k);
Regime regime_from_string(const std::string& s);
PathMode path_mode_from_string(const std::string& s);
EventSource event_source_from_string(const std::string& s);
VolMapping::Kind mapping_kind_from_string(const std::string& s);

}  // namespace avalanche::market

#endif  // AVALANCHE_MARKET_HPP
