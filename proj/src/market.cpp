#include "avalanche/market.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

#include "avalanche/errors.hpp"

namespace avalanche::market {

namespace {

constexpr double kTransportSymmetryTol = 1e-12;

bool finite(double x) { return std::isfinite(x); }

}  // namespace

// ---------------------------------------------------------------- state ----

void validate(const MarketState& s) {
    geometry::validate(s.point);
    if (!finite(s.price) || s.price <= 0.0) throw std::domain_error("price must be positive");
    if (!finite(s.target_price) || s.target_price <= 0.0)
        throw std::domain_error("target price must be positive");
    if (!finite(s.sharpe)) throw std::domain_error("sharpe must be finite");
    if (!finite(s.horizon) || s.horizon <= 0.0)
        throw std::domain_error("horizon must be positive");
}

double price_rule(double target_price, double sharpe, double sigma, double horizon) {
    return target_price * std::exp(-sharpe * sigma * horizon);
}

// -------------------------------------------------------------- mapping ----

double VolMapping::jump_increment(double s) const {
    switch (kind) {
        case Kind::Linear:
            return k * s;
        case Kind::Log1p:
            return k * std::log1p(s);
        case Kind::PowerCapped:
            return k * std::min(std::pow(s, gamma), cap);
    }
    throw std::logic_error("unreachable mapping kind");
}

void validate(const VolMapping& m) {
    if (!finite(m.k) || m.k <= 0.0) throw std::domain_error("mapping gain k must be positive");
    if (!finite(m.gamma) || m.gamma <= 0.0)
        throw std::domain_error("mapping exponent gamma must be positive");
    if (!finite(m.cap) || m.cap <= 0.0) throw std::domain_error("mapping cap must be positive");
    if (!finite(m.kappa) || m.kappa < 0.0)
        throw std::domain_error("mean-reversion rate kappa must be non-negative");
    if (!finite(m.sigma_bar) || m.sigma_bar <= 0.0)
        throw std::domain_error("mean-reversion level sigma_bar must be positive");
}

// -------------------------------------------------------------- onsager ----

OffManifoldState::OffManifoldState(Vec2 eta, Mat2 transport)
    : eta_(eta), transport_(transport) {
    for (double v : eta_) {
        if (!finite(v)) throw std::domain_error("eta components must be finite");
    }
    for (const auto& row : transport_) {
        for (double v : row) {
            if (!finite(v)) throw std::domain_error("transport entries must be finite");
        }
    }
    if (std::abs(transport_[0][1] - transport_[1][0]) > kTransportSymmetryTol) {
        throw std::invalid_argument("transport matrix must be symmetric (reciprocity)");
    }
}

double OffManifoldState::eta_norm() const {
    return std::hypot(eta_[0], eta_[1]);
}

OffManifoldState onsager_step(const OffManifoldState& off,
                              const OffManifoldState::Vec2& forces, double dt) {
    if (!finite(dt) || dt <= 0.0) throw std::domain_error("dt must be positive");
    for (double f : forces) {
        if (!finite(f)) throw std::domain_error("forces must be finite");
    }
    OffManifoldState out = off;
    const auto& l = off.transport_;
    out.eta_[0] += dt * (l[0][0] * forces[0] + l[0][1] * forces[1]);
    out.eta_[1] += dt * (l[1][0] * forces[0] + l[1][1] * forces[1]);
    return out;
}

// ----------------------------------------------------------- trajectory ----

void validate(const MarketTrajectory& t) {
    for (std::size_t i = 0; i < t.samples.size(); ++i) {
        const TrajectorySample& s = t.samples[i];
        if (!finite(s.t) || !finite(s.price) || !finite(s.mu) || !finite(s.sigma))
            throw std::domain_error("trajectory sample must be finite");
        if (s.sigma <= 0.0) throw std::domain_error("trajectory sigma must be positive");
        if (s.price <= 0.0) throw std::domain_error("trajectory price must be positive");
        if (i > 0 && !(s.t > t.samples[i - 1].t))
            throw std::domain_error("trajectory times must be strictly increasing");
    }
}

// ----------------------------------------------------------- operations ----

MarketState apply_avalanche(const MarketState& state, double s, const VolMapping& mapping) {
    validate(state);
    validate(mapping);
    if (!finite(s) || s < 0.0) throw std::domain_error("avalanche size must be non-negative");

    MarketState out = state;
    out.point.sigma = state.point.sigma + mapping.jump_increment(s);
    out.point.mu = state.sharpe * out.point.sigma;
    out.price = price_rule(out.target_price, out.sharpe, out.point.sigma, out.horizon);
    validate(out);
    return out;
}

MarketState relax_between_avalanches(const MarketState& state, double dt,
                                     const VolMapping& mapping, double rho) {
    validate(state);
    validate(mapping);
    if (!finite(dt) || dt <= 0.0) throw std::domain_error("dt must be positive");
    if (!finite(rho) || rho < 0.0) throw std::domain_error("rho must be non-negative");

    MarketState out = state;
    const double decay = std::exp(-mapping.kappa * dt);
    out.point.sigma = mapping.sigma_bar + (state.point.sigma - mapping.sigma_bar) * decay;
    out.point.mu = state.sharpe * out.point.sigma;
    out.target_price = state.target_price + rho * (state.price - state.target_price) * dt;
    out.price = price_rule(out.target_price, out.sharpe, out.point.sigma, out.horizon);
    validate(out);
    return out;
}

DiscretePath transition_path(const ManifoldPoint& from, const ManifoldPoint& to,
                             PathMode mode, std::size_t n) {
    geometry::validate(from);
    geometry::validate(to);
    if (n < 1) throw std::invalid_argument("transition path needs n >= 1 segments");
    if (from == to) throw CoincidentPointsError("transition endpoints coincide");

    const geometry::Tolerances tol{};
    DiscretePath path;
    path.points.resize(n + 1);
    path.points.front() = from;
    path.points.back() = to;

    if (mode == PathMode::Euclidean) {
        const double s1 = from.mu / from.sigma;
        const double s2 = to.mu / to.sigma;
        if (std::abs(s1 - s2) > tol.sharpe_ray)
            throw SharpeMismatchError("euclidean transition requires a common Sharpe ray");
        for (std::size_t j = 1; j < n; ++j) {
            const double f = static_cast<double>(j) / static_cast<double>(n);
            const double sigma = from.sigma + f * (to.sigma - from.sigma);
            path.points[j] = ManifoldPoint{s1 * sigma, sigma};
        }
        return path;
    }

    if (std::abs(to.mu - from.mu) <= tol.vertical) {
        // Vertical geodesic: geometric sigma spacing is uniform in arc length.
        const double ratio = to.sigma / from.sigma;
        for (std::size_t j = 1; j < n; ++j) {
            const double f = static_cast<double>(j) / static_cast<double>(n);
            path.points[j] = ManifoldPoint{from.mu, from.sigma * std::pow(ratio, f)};
        }
        return path;
    }

    const geometry::GeodesicArc arc = geometry::geodesic_arc(from, to, tol);
    const double phi1 = geometry::arc_angle(from, arc);
    const double phi2 = geometry::arc_angle(to, arc);
    for (std::size_t j = 1; j < n; ++j) {
        const double f = static_cast<double>(j) / static_cast<double>(n);
        path.points[j] = geometry::arc_point(arc, phi1 + f * (phi2 - phi1));
    }
    return path;
}

// ----------------------------------------------------------- simulation ----

void validate_config(const SimConfig& config) {
    if (config.steps < 1) throw ConfigError("steps must be >= 1");
    if (!finite(config.dt) || config.dt <= 0.0) throw ConfigError("dt must be positive");
    if (config.source == EventSource::Lattice) {
        if (config.lattice_size < 1) throw ConfigError("lattice size must be >= 1");
        if (config.lattice_threshold < 1) throw ConfigError("lattice threshold must be >= 1");
    }
    if (config.source == EventSource::Slope) {
        if (!finite(config.slope.theta_c) || config.slope.theta_c <= 0.0)
            throw ConfigError("slope theta_c must be positive");
        if (!finite(config.slope.v) || config.slope.v < 0.0)
            throw ConfigError("slope loading rate must be non-negative");
        if (!finite(config.slope.alpha) || config.slope.alpha <= 0.0)
            throw ConfigError("slope alpha must be positive");
        if (!finite(config.intensity.lambda0) || config.intensity.lambda0 < 0.0)
            throw ConfigError("intensity lambda0 must be non-negative");
        if (!finite(config.intensity.beta) || config.intensity.beta < 0.0)
            throw ConfigError("intensity beta must be non-negative");
    }
    try {
        validate(config.mapping);
    } catch (const std::domain_error& e) {
        throw ConfigError(e.what());
    }
    if (!finite(config.rho) || config.rho < 0.0) throw ConfigError("rho must be non-negative");
    if (config.rho * config.dt >= 1.0) throw ConfigError("rho * dt must stay below 1");
    if (!finite(config.sharpe)) throw ConfigError("sharpe must be finite");
    if (!finite(config.sharpe_drift)) throw ConfigError("sharpe drift must be finite");
    if (!finite(config.horizon) || config.horizon <= 0.0)
        throw ConfigError("horizon must be positive");
    if (!finite(config.target_price0) || config.target_price0 <= 0.0)
        throw ConfigError("initial target price must be positive");
    if (!finite(config.sigma0) || config.sigma0 <= 0.0)
        throw ConfigError("initial sigma must be positive");
    if (config.path_samples < 1) throw ConfigError("path samples must be >= 1");
    if (!finite(config.epsilon_frac) || config.epsilon_frac <= 0.0)
        throw ConfigError("epsilon fraction must be positive");
    if (config.onsager_enabled) {
        const auto& l = config.onsager_transport;
        for (const auto& row : l) {
            for (double v : row) {
                if (!finite(v)) throw ConfigError("transport entries must be finite");
            }
        }
        if (std::abs(l[0][1] - l[1][0]) > kTransportSymmetryTol)
            throw ConfigError("transport matrix must be symmetric");
        if (l[0][0] <= 0.0 || l[0][0] * l[1][1] - l[0][1] * l[1][0] <= 0.0)
            throw ConfigError("transport matrix must be positive definite");
        if (!finite(config.onsager_kick) || config.onsager_kick < 0.0)
            throw ConfigError("onsager kick must be non-negative");
        if (config.onsager_steps < 1) throw ConfigError("onsager steps must be >= 1");
        if (!finite(config.onsager_dt) || config.onsager_dt <= 0.0)
            throw ConfigError("onsager dt must be positive");
    }
}

MarketTrajectory simulate(const SimConfig& config, RngStream& rng) {
    validate_config(config);

    // Pass 1: realize the full event stream first so the avalanche traversal
    // window can be sized from the mean inter-avalanche time of this run.
    // One grain (or one slope step) is dropped per dt step; the event time
    // stamp is the 1-based step index.
    std::vector<sandpile::AvalancheEvent> events;
    if (config.source == EventSource::Lattice) {
        sandpile::SandpileLattice lattice(config.lattice_size, config.lattice_size,
                                          config.lattice_threshold);
        events = sandpile::drive_to_soc(lattice, rng, config.steps);
    } else if (config.source == EventSource::Slope) {
        sandpile::SlopeState slope = config.slope;
        for (std::int64_t i = 1; i <= config.steps; ++i) {
            auto [next, event] = sandpile::step_slope(slope, config.dt, rng,
                                                      config.intensity, i);
            slope = next;
            if (event) events.push_back(*event);
        }
    }

    const double total_time = static_cast<double>(config.steps) * config.dt;
    const double mean_gap =
        events.empty() ? total_time : total_time / static_cast<double>(events.size());
    // The traversal plus the optional excursion must both fit strictly
    // inside one step, before the next creep sample.
    const double eps_window = std::min(config.epsilon_frac * mean_gap, 0.45 * config.dt);

    MarketState state;
    state.sharpe = config.sharpe;
    state.horizon = config.horizon;
    state.target_price = config.target_price0;
    state.point = ManifoldPoint{config.sharpe * config.sigma0, config.sigma0};
    state.price = price_rule(state.target_price, state.sharpe, state.point.sigma,
                             state.horizon);
    validate(state);

    MarketTrajectory traj;
    traj.samples.reserve(static_cast<std::size_t>(config.steps) + 1);
    auto push = [&traj, &config](double t, double price, const ManifoldPoint& p,
                                 Regime regime) {
        traj.samples.push_back(
            TrajectorySample{t, price, p.mu, p.sigma, regime, config.path_mode});
    };
    push(0.0, state.price, state.point, Regime::Creep);

    std::size_t ev_idx = 0;
    for (std::int64_t i = 1; i <= config.steps; ++i) {
        const double t = static_cast<double>(i) * config.dt;
        if (config.sharpe_drift != 0.0) state.sharpe += config.sharpe_drift * config.dt;
        state = relax_between_avalanches(state, config.dt, config.mapping, config.rho);
        push(t, state.price, state.point, Regime::Creep);

        if (ev_idx >= events.size() || events[ev_idx].time != i) continue;
        const double size = events[ev_idx].size;
        ++ev_idx;
        if (!(size > 0.0) || config.mapping.jump_increment(size) <= 0.0) continue;

        const MarketState post = apply_avalanche(state, size, config.mapping);
        const DiscretePath path = transition_path(state.point, post.point,
                                                  config.path_mode, config.path_samples);
        const auto n = static_cast<double>(config.path_samples);
        for (std::size_t j = 1; j <= config.path_samples; ++j) {
            const ManifoldPoint& q = path.points[j];
            const double tj = t + eps_window * static_cast<double>(j) / n;
            push(tj, price_rule(post.target_price, post.sharpe, q.sigma, post.horizon), q,
                 Regime::Avalanche);
        }
        state = post;

        if (config.onsager_enabled && config.onsager_kick > 0.0) {
            OffManifoldState off({0.0, config.onsager_kick * (post.point.sigma - path.points.front().sigma)},
                                 config.onsager_transport);
            const auto m = static_cast<double>(config.onsager_steps);
            for (std::size_t j = 1; j <= config.onsager_steps; ++j) {
                const OffManifoldState::Vec2 restoring{-off.eta()[0], -off.eta()[1]};
                off = onsager_step(off, restoring, config.onsager_dt);
                const ManifoldPoint q{state.point.mu + off.eta()[0],
                                      state.point.sigma + off.eta()[1]};
                const double tj = t + eps_window + eps_window * static_cast<double>(j) / m;
                push(tj, price_rule(state.target_price, state.sharpe, q.sigma, state.horizon),
                     q, Regime::Relaxation);
            }
        }
    }

    validate(traj);
    return traj;
}

// ---------------------------------------------------------- enum strings ----

std::string to_string(Regime r) {
    switch (r) {
        case Regime::Creep: return "creep";
        case Regime::Avalanche: return "avalanche";
        case Regime::Relaxation: return "relaxation";
    }
    throw std::logic_error("unreachable regime");
}

std::string to_string(PathMode m) {
    switch (m) {
        case PathMode::Geodesic: return "geodesic";
        case PathMode::Euclidean: return "euclidean";
    }
    throw std::logic_error("unreachable path mode");
}

std::string to_string(EventSource s) {
    switch (s) {
        case EventSource::None: return "none";
        case EventSource::Lattice: return "lattice";
        case EventSource::Slope: return "slope";
    }
    throw std::logic_error("unreachable event source");
}

std::string to_string(VolMapping::Kind k) {
    switch (k) {
        case VolMapping::Kind::Linear: return "linear";
        case VolMapping::Kind::Log1p: return "log1p";
        case VolMapping::Kind::PowerCapped: return "power_capped";
    }
    throw std::logic_error("unreachable mapping kind");
}

Regime regime_from_string(const std::string& s) {
    if (s == "creep") return Regime::Creep;
    if (s == "avalanche") return Regime::Avalanche;
    if (s == "relaxation") return Regime::Relaxation;
    throw ConfigError("unknown regime: " + s);
}

PathMode path_mode_from_string(const std::string& s) {
    if (s == "geodesic") return PathMode::Geodesic;
    if (s == "euclidean") return PathMode::Euclidean;
    throw ConfigError("unknown path mode: " + s);
}

EventSource event_source_from_string(const std::string& s) {
    if (s == "none") return EventSource::None;
    if (s == "lattice") return EventSource::Lattice;
    if (s == "slope") return EventSource::Slope;
    throw ConfigError("unknown event source: " + s);
}

VolMapping::Kind mapping_kind_from_string(const std::string& s) {
    if (s == "linear") return VolMapping::Kind::Linear;
    if (s == "log1p") return VolMapping::Kind::Log1p;
    if (s == "power_capped") return VolMapping::Kind::PowerCapped;
    throw ConfigError("unknown mapping kind: " + s);
}

}  // namespace avalanche::market
