// Dynamic arbitrage engine: geodesic-neutral hedge construction and the
// incremental harvest of the excess action Delta_L along a market
// trajectory, booked into a compensated-summation ledger.

#ifndef AVALANCHE_STRATEGY_HPP
#define AVALANCHE_STRATEGY_HPP

#include <memory>
#include <string>
#include <vector>

#include "avalanche/geometry.hpp"
#include "avalanche/market.hpp"

namespace avalanche::strategy {

using geometry::GeodesicArc;
using geometry::LengthConvention;
using geometry::ManifoldPoint;

// ---------------------------------------------------------------- types ----

/// Valuation interface exposing the two sensitivities the hedge needs:
/// delta = dV/dmu and vega = dV/dsigma.
class SensitivityProvider {
public:
    virtual ~SensitivityProvider() = default;
    virtual double delta(const ManifoldPoint& p) const = 0;
    virtual double vega(const ManifoldPoint& p) const = 0;
};

/// Built-in test valuation V = a mu + b sigma + c mu sigma with analytic
/// partials delta = a + c sigma, vega = b + c mu.
class QuadraticValuation final : public SensitivityProvider {
public:
    QuadraticValuation(double a, double b, double c) : a_(a), b_(b), c_(c) {}

    double value(const ManifoldPoint& p) const {
        return a_ * p.mu + b_ * p.sigma + c_ * p.mu * p.sigma;
    }
    double delta(const ManifoldPoint& p) const override { return a_ + c_ * p.sigma; }
    double vega(const ManifoldPoint& p) const override { return b_ + c_ * p.mu; }

    double a() const { return a_; }
    double b() const { return b_; }
    double c() const { return c_; }

private:
    double a_, b_, c_;
};

/// Stock leg held long in proportion to delta, vega leg held short in
/// proportion to vega; ratio = vega/delta.
struct HedgePosition {
    double stock_units{0.0};
    double vega_units{0.0};
    double ratio{0.0};
};

struct TimedHedge {
    double t{0.0};
    HedgePosition position;
};

/// Piecewise-constant capital schedule W_t: the value attached to the
/// latest breakpoint at or before t. Default: W = 1 everywhere.
class CapitalSchedule {
public:
    CapitalSchedule() : breakpoints_{{0.0, 1.0}} {}
    static CapitalSchedule constant(double w);
    /// Parse "1.5" (constant) or "0:1,10:2,20:0.5" (breakpoints).
    static CapitalSchedule parse(const std::string& text);

    double at(double t) const;

private:
    std::vector<std::pair<double, double>> breakpoints_;  // (t_from, W), sorted
};

struct LedgerEntry {
    double t{0.0};
    double delta_L{0.0};
    double increment{0.0};  // W_t * delta_L * dt
};

/// Backtest ledger with exact (compensated) accumulation of harvest
/// increments.
class StrategyLedger {
public:
    explicit StrategyLedger(CapitalSchedule capital = {})
        : capital_(std::move(capital)) {}

    /// Rebuild a ledger from stored entries (increments taken verbatim,
    /// cumulative recomputed by compensated summation).
    static StrategyLedger from_entries(const std::vector<LedgerEntry>& entries,
                                       CapitalSchedule capital = {});

    /// Book one step: increment = W(t) * delta_L * dt at time t.
    void book(double t, double delta_L, double dt);

    const std::vector<LedgerEntry>& entries() const { return entries_; }
    double cumulative() const { return cumulative_; }
    const CapitalSchedule& capital() const { return capital_; }
    double time_cursor() const { return time_cursor_; }

private:
    CapitalSchedule capital_;
    std::vector<LedgerEntry> entries_;
    double cumulative_{0.0};
    double carry_{0.0};       // Kahan compensation
    double time_cursor_{0.0};

    friend StrategyLedger harvest_step(StrategyLedger ledger, const ManifoldPoint& p,
                                       double next_sigma, double sharpe, double dt,
                                       LengthConvention conv);
};

// ----------------------------------------------------------- operations ----

/// Hedge proportions at p. Throws ZeroDeltaError when |delta| < 1e-14 while
/// vega is nonzero (the ratio is undefined); both legs zero gives ratio 0.
HedgePosition hedge_ratio(const ManifoldPoint& p, const SensitivityProvider& provider);

/// First-order valuation gap between the constant-Sharpe prediction
/// (dmu = S eps) and the local-geodesic prediction (dmu = slope * eps) for
/// a sigma step of eps: delta * (slope - S) * eps. Zero when the two
/// directions coincide. Propagates ApexSingularityError.
double prediction_gap(const ManifoldPoint& p, double step_eps, double sharpe,
                      const GeodesicArc& arc, const SensitivityProvider& provider);

/// Same gap but with the geodesic leg advanced exactly along the arc to
/// sigma + eps (same branch of the semicircle). Against the first-order
/// constant-Sharpe leg with S set to the local geodesic slope this decays
/// quadratically in eps: the hedge is geodesic-neutral to first order.
double prediction_gap_exact(const ManifoldPoint& p, double step_eps, double sharpe,
                            const GeodesicArc& arc, const SensitivityProvider& provider);

/// Book one constant-Sharpe harvest step from p to sigma = next_sigma on
/// the same ray: Delta_L by the closed forms, increment W * Delta_L * dt.
StrategyLedger harvest_step(StrategyLedger ledger, const ManifoldPoint& p,
                            double next_sigma, double sharpe, double dt,
                            LengthConvention conv);

struct BacktestResult {
    StrategyLedger ledger;
    std::vector<TimedHedge> positions;
};

/// Walk a trajectory and harvest every step inside Avalanche regimes.
/// Per-step Delta_L is the realized-path length minus the geodesic length:
/// Euclidean avalanche steps contribute excess_action (> 0 under PaperEq5
/// whenever sigma moves); geodesic traversals are the zero-Delta_L path by
/// construction. The trajectory's own sampling is the accounting grid.
BacktestResult backtest(const market::MarketTrajectory& trajectory,
                        const SensitivityProvider& provider, LengthConvention conv,
                        CapitalSchedule capital = {});

}  // namespace avalanche::strategy

#endif  // AVALANCHE_STRATEGY_HPP
