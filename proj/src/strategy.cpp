#include "avalanche/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "avalanche/errors.hpp"

namespace avalanche::strategy {

namespace {

constexpr double kZeroDeltaTol = 1e-14;

bool finite(double x) { return std::isfinite(x); }

}  // namespace

// ------------------------------------------------------ capital schedule ----

CapitalSchedule CapitalSchedule::constant(double w) {
    if (!finite(w) || w <= 0.0) throw std::domain_error("capital must be positive");
    CapitalSchedule out;
    out.breakpoints_ = {{0.0, w}};
    return out;
}

CapitalSchedule CapitalSchedule::parse(const std::string& text) {
    if (text.find(':') == std::string::npos) {
        std::size_t used = 0;
        const double w = std::stod(text, &used);
        if (used != text.size()) throw ConfigError("bad capital value: " + text);
        return constant(w);
    }
    CapitalSchedule out;
    out.breakpoints_.clear();
    std::istringstream in(text);
    std::string piece;
    while (std::getline(in, piece, ',')) {
        const std::size_t colon = piece.find(':');
        if (colon == std::string::npos) throw ConfigError("bad capital breakpoint: " + piece);
        std::size_t used = 0;
        const double t = std::stod(piece.substr(0, colon), &used);
        const double w = std::stod(piece.substr(colon + 1), &used);
        if (!finite(t) || !finite(w) || w <= 0.0)
            throw ConfigError("bad capital breakpoint: " + piece);
        out.breakpoints_.emplace_back(t, w);
    }
    if (out.breakpoints_.empty()) throw ConfigError("empty capital schedule");
    std::sort(out.breakpoints_.begin(), out.breakpoints_.end());
    return out;
}

double CapitalSchedule::at(double t) const {
    double w = breakpoints_.front().second;
    for (const auto& [t_from, value] : breakpoints_) {
        if (t_from > t) break;
        w = value;
    }
    return w;
}

// ---------------------------------------------------------------- ledger ----

StrategyLedger StrategyLedger::from_entries(const std::vector<LedgerEntry>& entries,
                                            CapitalSchedule capital) {
    StrategyLedger out(std::move(capital));
    out.entries_ = entries;
    for (const LedgerEntry& e : entries) {
        const double y = e.increment - out.carry_;
        const double s = out.cumulative_ + y;
        out.carry_ = (s - out.cumulative_) - y;
        out.cumulative_ = s;
    }
    if (!entries.empty()) out.time_cursor_ = entries.back().t;
    return out;
}

void StrategyLedger::book(double t, double delta_L, double dt) {
    if (!finite(t) || !finite(delta_L) || !finite(dt) || dt <= 0.0)
        throw std::domain_error("ledger entries must be finite with dt > 0");
    const double increment = capital_.at(t) * delta_L * dt;
    // Kahan step: the running total stays exact to the last ulp even over
    // millions of small increments.
    const double y = increment - carry_;
    const double s = cumulative_ + y;
    carry_ = (s - cumulative_) - y;
    cumulative_ = s;
    entries_.push_back(LedgerEntry{t, delta_L, increment});
    time_cursor_ = t;
}

// ----------------------------------------------------------- operations ----

HedgePosition hedge_ratio(const ManifoldPoint& p, const SensitivityProvider& provider) {
    geometry::validate(p);
    const double delta = provider.delta(p);
    const double vega = provider.vega(p);
    if (!finite(delta) || !finite(vega))
        throw std::domain_error("sensitivities must be finite");
    HedgePosition out;
    out.stock_units = delta;
    out.vega_units = vega;
    if (std::abs(delta) < kZeroDeltaTol) {
        if (vega != 0.0) throw ZeroDeltaError("hedge ratio undefined: delta vanishes");
        out.ratio = 0.0;
        return out;
    }
    out.ratio = vega / delta;
    return out;
}

double prediction_gap(const ManifoldPoint& p, double step_eps, double sharpe,
                      const GeodesicArc& arc, const SensitivityProvider& provider) {
    geometry::validate(p);
    if (!finite(step_eps)) throw std::domain_error("step must be finite");
    if (!finite(sharpe)) throw std::domain_error("sharpe must be finite");
    const double slope = geometry::local_geodesic_slope(p, arc);
    // Both predictions advance sigma by the same eps, so only the mu legs
    // differ: delta * (slope - S) * eps.
    return provider.delta(p) * (slope - sharpe) * step_eps;
}

double prediction_gap_exact(const ManifoldPoint& p, double step_eps, double sharpe,
                            const GeodesicArc& arc, const SensitivityProvider& provider) {
    geometry::validate(p);
    if (!finite(step_eps) || step_eps <= 0.0)
        throw std::domain_error("step must be positive");
    if (!finite(sharpe)) throw std::domain_error("sharpe must be finite");
    // Guard against calling through the apex: the slope check also rejects
    // points off the arc.
    geometry::local_geodesic_slope(p, arc);

    const double sigma_next = p.sigma + step_eps;
    const double remaining = arc.R * arc.R - 2.0 * sigma_next * sigma_next;
    if (remaining <= 0.0)
        throw ApexSingularityError("step crosses the apex of the arc");
    const double side = (p.mu >= arc.mu_c) ? 1.0 : -1.0;
    const double mu_arc = arc.mu_c + side * std::sqrt(remaining);
    const double mu_ray = p.mu + sharpe * step_eps;
    return provider.delta(p) * (mu_arc - mu_ray);
}

StrategyLedger harvest_step(StrategyLedger ledger, const ManifoldPoint& p,
                            double next_sigma, double sharpe, double dt,
                            LengthConvention conv) {
    geometry::validate(p);
    if (!finite(next_sigma) || next_sigma <= 0.0)
        throw std::domain_error("next sigma must be positive");
    if (!finite(dt) || dt <= 0.0) throw std::domain_error("dt must be positive");
    if (!finite(sharpe)) throw std::domain_error("sharpe must be finite");
    if (std::abs(p.mu / p.sigma - sharpe) > geometry::Tolerances{}.sharpe_ray)
        throw SharpeMismatchError("harvest step requires p on the Sharpe ray");

    const ManifoldPoint q{sharpe * next_sigma, next_sigma};
    const double delta_L = (q == p) ? 0.0 : geometry::excess_action(p, q, conv);
    ledger.book(ledger.time_cursor_ + dt, delta_L, dt);
    return ledger;
}

BacktestResult backtest(const market::MarketTrajectory& trajectory,
                        const SensitivityProvider& provider, LengthConvention conv,
                        CapitalSchedule capital) {
    market::validate(trajectory);
    BacktestResult result{StrategyLedger(std::move(capital)), {}};

    const auto& samples = trajectory.samples;
    std::size_t i = 0;
    while (i < samples.size()) {
        if (samples[i].regime != market::Regime::Avalanche) {
            ++i;
            continue;
        }
        // Extend the run one sample backwards: the jump starts from the last
        // pre-avalanche state.
        std::size_t begin = (i > 0) ? i - 1 : i;
        std::size_t end = i;
        while (end + 1 < samples.size() &&
               samples[end + 1].regime == market::Regime::Avalanche) {
            ++end;
        }

        for (std::size_t k = begin; k < end; ++k) {
            const market::TrajectorySample& a = samples[k];
            const market::TrajectorySample& b = samples[k + 1];
            const ManifoldPoint pa{a.mu, a.sigma};
            const ManifoldPoint pb{b.mu, b.sigma};
            const double dt = b.t - a.t;
            double delta_L = 0.0;
            if (b.path_mode == market::PathMode::Euclidean && !(pa == pb)) {
                // Realized chord follows the Sharpe ray; the harvested excess
                // is its length over the geodesic.
                delta_L = geometry::excess_action(pa, pb, conv);
            }
            // Geodesic traversals realize the minimal path: zero excess.
            result.ledger.book(b.t, delta_L, dt);
            result.positions.push_back(TimedHedge{a.t, hedge_ratio(pa, provider)});
        }
        i = end + 1;
    }
    return result;
}

}  // namespace avalanche::strategy
