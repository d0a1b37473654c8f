// Bak-Tang-Wiesenfeld lattice sandpile with open (dissipative) boundaries,
// the reduced information-slope jump process, and the maximum-likelihood
// power-law tail estimator for avalanche sizes.

#ifndef AVALANCHE_SANDPILE_HPP
#define AVALANCHE_SANDPILE_HPP

#include <cstdint>
#include <deque>
#include <optional>
#include <utility>
#include <vector>

#include "avalanche/rng.hpp"

namespace avalanche::sandpile {

/// A recorded avalanche. `time` is the driving step index (1-based grain
/// count for the lattice, step count for the slope process). `size` is the
/// toppling count on the lattice (always an integer >= 1 there) or the
/// real-valued overshoot release of the slope process.
struct AvalancheEvent {
    std::int64_t time{0};
    double size{0.0};
    std::int64_t grains_lost{0};
};

/// Rectangular BTW lattice. Toppling moves `threshold` grains from an
/// unstable cell, distributed one per von Neumann neighbor in N,E,S,W
/// round-robin order; grains pushed off the edge leave the system and are
/// recorded in the dissipation ledger.
class SandpileLattice {
public:
    SandpileLattice(std::size_t width, std::size_t height, int threshold = 4);

    std::size_t width() const { return width_; }
    std::size_t height() const { return height_; }
    int threshold() const { return threshold_; }

    int height_at(std::size_t x, std::size_t y) const;
    const std::vector<int>& grains() const { return grains_; }

    std::int64_t total_added() const { return total_added_; }
    std::int64_t total_lost() const { return total_lost_; }
    /// Grains currently on the lattice; equals total_added - total_lost.
    std::int64_t total_on_lattice() const;

    /// Number of grains dropped so far; the `time` stamp of events.
    std::int64_t steps() const { return total_added_; }

    /// Drop one grain at (x, y) and stabilize. Returns the avalanche event
    /// if any toppling occurred.
    std::optional<AvalancheEvent> add_grain(std::size_t x, std::size_t y);

    /// Replace the whole grid (restore a snapshot); heights may exceed the
    /// threshold until settle() is called. Resets the conservation ledger
    /// to the new configuration.
    void set_heights(const std::vector<int>& grains);

    /// Topple every unstable site to the fixed point. The final state and
    /// toppling count do not depend on the order (abelian property).
    std::optional<AvalancheEvent> settle();

private:
    std::pair<std::int64_t, std::int64_t> run_topples(std::deque<std::size_t>&& queue);

    std::size_t width_, height_;
    int threshold_;
    std::vector<int> grains_;
    std::int64_t total_added_{0};
    std::int64_t total_lost_{0};
};

/// Drop n_grains at uniformly random sites, collecting every avalanche in
/// order. Deterministic for a given stream seed.
std::vector<AvalancheEvent> drive_to_soc(SandpileLattice& lattice, RngStream& rng,
                                         std::int64_t n_grains);

/// Reduced slope process state: information gradient theta loaded at rate v,
/// released in jumps of size alpha * (theta - theta_c).
struct SlopeState {
    double theta{0.0};
    double theta_c{1.0};
    double v{0.05};      // loading rate, > 0
    double alpha{1.0};   // overshoot-to-size coefficient, > 0
};

void validate(const SlopeState& s);

/// Jump intensity law lambda(theta). The only structural requirement is
/// that the jump probability increase as theta approaches theta_c; both a
/// smooth exponential form and a hard threshold are provided.
struct IntensityLaw {
    enum class Kind { Exponential, HardThreshold };
    Kind kind{Kind::Exponential};
    double lambda0{0.1};  // Exponential: lambda0 * exp(beta * (theta - theta_c))
    double beta{10.0};

    /// Firing probability for a step of length dt, clamped to [0, 1].
    double fire_probability(double theta, double theta_c, double dt) const;
};

/// One Euler step of d theta = v dt - s(theta) dN(theta). Loads first, then
/// fires with probability lambda(theta) dt; a fired jump releases
/// s = alpha * max(theta - theta_c, 0).
std::pair<SlopeState, std::optional<AvalancheEvent>> step_slope(
    const SlopeState& state, double dt, RngStream& rng, const IntensityLaw& intensity,
    std::int64_t step_index = 0);

struct PowerLawFit {
    double tau_hat{0.0};
    std::size_t n_tail{0};
    double s_min{0.0};
};

/// Maximum-likelihood tail exponent tau_hat = 1 + n / sum ln(s_i / s_min)
/// over the samples with s_i >= s_min. Requires at least 10 tail samples
/// (InsufficientTailError) and a nonzero log-sum (domain error when every
/// tail sample equals s_min).
PowerLawFit fit_power_law_tail(const std::vector<double>& sizes, double s_min);

}  // namespace avalanche::sandpile

#endif  // AVALANCHE_SANDPILE_HPP
