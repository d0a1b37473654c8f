#include "avalanche/sandpile.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>
#include <string>

#include "avalanche/errors.hpp"

namespace avalanche::sandpile {

namespace {
// Tripwire for the proven-finite stabilization loop.
constexpr std::int64_t kMaxTopplings = 100000000;
}

SandpileLattice::SandpileLattice(std::size_t width, std::size_t height, int threshold)
    : width_(width), height_(height), threshold_(threshold),
      grains_(width * height, 0) {
    if (width == 0 || height == 0)
        throw std::invalid_argument("SandpileLattice: empty lattice");
    if (threshold < 1)
        throw std::invalid_argument("SandpileLattice: threshold must be >= 1");
}

int SandpileLattice::height_at(std::size_t x, std::size_t y) const {
    if (x >= width_ || y >= height_)
        throw std::out_of_range("SandpileLattice: site out of bounds");
    return grains_[y * width_ + x];
}

std::int64_t SandpileLattice::total_on_lattice() const {
    std::int64_t sum = 0;
    for (int g : grains_) sum += g;
    return sum;
}

std::pair<std::int64_t, std::int64_t> SandpileLattice::run_topples(
    std::deque<std::size_t>&& queue) {
    // FIFO stabilization. A site may be enqueued more than once; the
    // height check at pop keeps the loop exact. The final state and the
    // toppling count are order-independent (abelian property).
    std::int64_t topplings = 0;
    std::int64_t lost = 0;
    const std::ptrdiff_t w = static_cast<std::ptrdiff_t>(width_);
    while (!queue.empty()) {
        const std::size_t site = queue.front();
        queue.pop_front();
        if (grains_[site] < threshold_) continue;

        grains_[site] -= threshold_;
        if (++topplings > kMaxTopplings)
            throw Error("SandpileLattice: toppling tripwire exceeded");

        const std::ptrdiff_t sx = static_cast<std::ptrdiff_t>(site % width_);
        const std::ptrdiff_t sy = static_cast<std::ptrdiff_t>(site / width_);
        // N, E, S, W offsets; one grain each in round-robin until the
        // threshold's worth of grains is distributed.
        const std::ptrdiff_t nx[4] = {sx, sx + 1, sx, sx - 1};
        const std::ptrdiff_t ny[4] = {sy - 1, sy, sy + 1, sy};
        for (int g = 0; g < threshold_; ++g) {
            const std::ptrdiff_t tx = nx[g % 4];
            const std::ptrdiff_t ty = ny[g % 4];
            if (tx < 0 || ty < 0 || tx >= w ||
                ty >= static_cast<std::ptrdiff_t>(height_)) {
                ++lost;  // open boundary: the grain leaves the system
                continue;
            }
            const std::size_t t = static_cast<std::size_t>(ty) * width_ +
                                  static_cast<std::size_t>(tx);
            if (++grains_[t] == threshold_) queue.push_back(t);
        }
        if (grains_[site] >= threshold_) queue.push_back(site);
    }
    total_lost_ += lost;
    return {topplings, lost};
}

std::optional<AvalancheEvent> SandpileLattice::add_grain(std::size_t x, std::size_t y) {
    if (x >= width_ || y >= height_)
        throw std::out_of_range("SandpileLattice: site out of bounds");

    ++total_added_;
    const std::size_t start = y * width_ + x;
    ++grains_[start];
    if (grains_[start] < threshold_) return std::nullopt;

    const auto [topplings, lost] = run_topples(std::deque<std::size_t>{start});
    return AvalancheEvent{total_added_, static_cast<double>(topplings), lost};
}

void SandpileLattice::set_heights(const std::vector<int>& grains) {
    if (grains.size() != grains_.size())
        throw std::invalid_argument("SandpileLattice: grid size mismatch");
    std::int64_t sum = 0;
    for (int g : grains) {
        if (g < 0) throw std::domain_error("SandpileLattice: negative height");
        sum += g;
    }
    grains_ = grains;
    total_added_ = sum;
    total_lost_ = 0;
}

std::optional<AvalancheEvent> SandpileLattice::settle() {
    std::deque<std::size_t> queue;
    for (std::size_t site = 0; site < grains_.size(); ++site)
        if (grains_[site] >= threshold_) queue.push_back(site);
    if (queue.empty()) return std::nullopt;
    const auto [topplings, lost] = run_topples(std::move(queue));
    return AvalancheEvent{total_added_, static_cast<double>(topplings), lost};
}

std::vector<AvalancheEvent> drive_to_soc(SandpileLattice& lattice, RngStream& rng,
                                         std::int64_t n_grains) {
    if (n_grains < 1)
        throw std::invalid_argument("drive_to_soc: n_grains must be >= 1");
    std::vector<AvalancheEvent> events;
    const std::uint64_t n_sites =
        static_cast<std::uint64_t>(lattice.width()) * lattice.height();
    for (std::int64_t i = 0; i < n_grains; ++i) {
        const std::uint64_t site = rng.below(n_sites);
        const std::size_t x = static_cast<std::size_t>(site % lattice.width());
        const std::size_t y = static_cast<std::size_t>(site / lattice.width());
        if (auto ev = lattice.add_grain(x, y)) events.push_back(*ev);
    }
    return events;
}

void validate(const SlopeState& s) {
    if (!(s.v > 0.0) || !(s.alpha > 0.0) || !std::isfinite(s.theta) ||
        !std::isfinite(s.theta_c) || !std::isfinite(s.v) || !std::isfinite(s.alpha))
        throw std::domain_error("SlopeState: v and alpha must be > 0 and fields finite");
}

double IntensityLaw::fire_probability(double theta, double theta_c, double dt) const {
    switch (kind) {
        case Kind::HardThreshold:
            return theta >= theta_c ? 1.0 : 0.0;
        case Kind::Exponential: {
            const double lambda = lambda0 * std::exp(beta * (theta - theta_c));
            const double p = lambda * dt;
            return p < 0.0 ? 0.0 : (p > 1.0 ? 1.0 : p);
        }
    }
    return 0.0;
}

std::pair<SlopeState, std::optional<AvalancheEvent>> step_slope(
    const SlopeState& state, double dt, RngStream& rng, const IntensityLaw& intensity,
    std::int64_t step_index) {
    validate(state);
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw std::domain_error("step_slope: dt must be > 0");

    SlopeState next = state;
    next.theta += next.v * dt;

    const double p = intensity.fire_probability(next.theta, next.theta_c, dt);
    // One uniform draw per step regardless of p keeps runs with different
    // intensity laws on the same draw sequence.
    const double u = rng.next_double();
    if (u < p) {
        const double s = next.alpha * std::max(next.theta - next.theta_c, 0.0);
        next.theta -= s;
        return {next, AvalancheEvent{step_index, s, 0}};
    }
    return {next, std::nullopt};
}

PowerLawFit fit_power_law_tail(const std::vector<double>& sizes, double s_min) {
    if (!(s_min > 0.0) || !std::isfinite(s_min))
        throw std::domain_error("fit_power_law_tail: s_min must be > 0");

    std::size_t n = 0;
    double log_sum = 0.0;
    for (double s : sizes) {
        if (!(s > 0.0) || !std::isfinite(s))
            throw std::domain_error("fit_power_law_tail: sizes must be positive finite");
        if (s >= s_min) {
            ++n;
            log_sum += std::log(s / s_min);
        }
    }
    if (n < 10)
        throw InsufficientTailError("fit_power_law_tail: need >= 10 samples at or above s_min, have " +
                                    std::to_string(n));
    if (log_sum <= 0.0)
        throw std::domain_error("fit_power_law_tail: degenerate tail (all samples at s_min)");

    return {1.0 + static_cast<double>(n) / log_sum, n, s_min};
}

}  // namespace avalanche::sandpile
