// Command-line harness: geometry queries, sandpile runs, market simulation,
// and backtest orchestration. Exit codes: 0 success, 2 validation error,
// 1 internal error.

#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"

#include "avalanche/config.hpp"
#include "avalanche/errors.hpp"
#include "avalanche/geometry.hpp"
#include "avalanche/io.hpp"
#include "avalanche/market.hpp"
#include "avalanche/rng.hpp"
#include "avalanche/sandpile.hpp"
#include "avalanche/strategy.hpp"

namespace {

namespace fs = std::filesystem;
using namespace avalanche;

std::optional<std::uint64_t> env_seed() {
    const char* raw = std::getenv("AVALANCHE_SEED");
    if (raw == nullptr) return std::nullopt;
    try {
        return std::stoull(raw);
    } catch (const std::exception&) {
        throw ConfigError("AVALANCHE_SEED is not an unsigned integer");
    }
}

geometry::LengthConvention parse_convention(const std::string& name) {
    return io::convention_from_name(name);
}

strategy::QuadraticValuation parse_provider(const std::string& spec) {
    std::istringstream in(spec);
    std::string piece;
    std::vector<double> coeffs;
    while (std::getline(in, piece, ',')) coeffs.push_back(io::parse_double(piece));
    if (coeffs.size() != 3)
        throw ConfigError("provider spec must be three comma-separated coefficients a,b,c");
    return strategy::QuadraticValuation(coeffs[0], coeffs[1], coeffs[2]);
}

void write_text(const fs::path& path, const std::string& content) {
    fs::create_directories(path.parent_path());
    io::write_file(path.string(), content);
}

struct GeometryArgs {
    double mu1 = 0, sigma1 = 1, mu2 = 0, sigma2 = 1;
    double sharpe = 0;
    std::string convention = "paper";
};

struct SandpileRunArgs {
    std::size_t size = 64;
    std::int64_t grains = 0;
    std::uint64_t seed = 0;
    bool seed_given = false;
    int threshold = 4;
    double smin = 10.0;
    bool smin_given = false;
    std::string out = "sandpile_out";
};

struct SimulateArgs {
    std::string config_file;
    std::vector<std::string> sets;
    std::string seed_text;
    std::string steps_text;
    std::string path_mode;
    std::string source;
    std::string out = "sim_out";
    unsigned jobs = 1;
};

int run_geometry_distance(const GeometryArgs& a) {
    const geometry::ManifoldPoint p1{a.mu1, a.sigma1};
    const geometry::ManifoldPoint p2{a.mu2, a.sigma2};
    const auto conv = parse_convention(a.convention);
    const double length = geometry::geodesic_length(p1, p2, conv);
    std::cout << io::length_json(length, conv).dump() << '\n';
    return 0;
}

int run_geometry_arc(const GeometryArgs& a) {
    const geometry::GeodesicArc arc =
        geometry::geodesic_arc({a.mu1, a.sigma1}, {a.mu2, a.sigma2});
    std::cout << io::arc_json(arc).dump() << '\n';
    return 0;
}

int run_geometry_excess(const GeometryArgs& a) {
    const auto conv = parse_convention(a.convention);
    const geometry::ManifoldPoint p1{a.sharpe * a.sigma1, a.sigma1};
    const geometry::ManifoldPoint p2{a.sharpe * a.sigma2, a.sigma2};
    const double delta_L = geometry::excess_action(p1, p2, conv);
    std::cout << io::excess_json(delta_L, conv).dump() << '\n';
    return 0;
}

int run_sandpile_run(const SandpileRunArgs& a) {
    std::uint64_t seed = a.seed;
    if (!a.seed_given) seed = env_seed().value_or(seed);
    if (a.grains < 1) throw ConfigError("--grains must be >= 1");

    sandpile::SandpileLattice lattice(a.size, a.size, a.threshold);
    RngStream rng(seed);
    const auto events = sandpile::drive_to_soc(lattice, rng, a.grains);

    std::ostringstream events_csv;
    io::write_events_csv(events_csv, events);
    write_text(fs::path(a.out) / "events.csv", events_csv.str());

    std::ostringstream grid;
    io::write_lattice_txt(grid, lattice);
    write_text(fs::path(a.out) / "lattice.txt", grid.str());

    std::vector<double> sizes;
    sizes.reserve(events.size());
    for (const auto& e : events) sizes.push_back(e.size);
    try {
        const auto fit = sandpile::fit_power_law_tail(sizes, a.smin);
        const std::string fit_text = io::fit_json(fit).dump() + "\n";
        write_text(fs::path(a.out) / "fit.json", fit_text);
        std::cout << fit_text;
    } catch (const InsufficientTailError& e) {
        if (a.smin_given) throw;
        std::cerr << "note: tail fit skipped (" << e.what() << ")\n";
    }
    return 0;
}

int run_sandpile_fit(const std::string& input, double smin) {
    std::istringstream in(io::read_file(input));
    const auto events = io::read_events_csv(in);
    std::vector<double> sizes;
    sizes.reserve(events.size());
    for (const auto& e : events) sizes.push_back(e.size);
    const auto fit = sandpile::fit_power_law_tail(sizes, smin);
    std::cout << io::fit_json(fit).dump() << '\n';
    return 0;
}

void run_one_simulation(const market::SimConfig& cfg, const fs::path& dir) {
    RngStream rng(cfg.seed);
    const market::MarketTrajectory traj = market::simulate(cfg, rng);
    std::ostringstream csv;
    io::write_trajectory_csv(csv, traj);
    write_text(dir / "trajectory.csv", csv.str());
    write_text(dir / "config_echo.txt", config::render_kv(config::to_kv(cfg)));
}

int run_simulate(const SimulateArgs& a) {
    config::KeyValues kv;
    if (!a.config_file.empty()) kv = config::parse_kv_file(a.config_file);
    for (const auto& assignment : a.sets) config::apply_override(kv, assignment);
    if (!a.seed_text.empty()) kv["seed"] = a.seed_text;
    if (!a.steps_text.empty()) kv["steps"] = a.steps_text;
    if (!a.path_mode.empty()) kv["path.mode"] = a.path_mode;
    if (!a.source.empty()) kv["source"] = a.source;
    if (kv.find("seed") == kv.end()) {
        if (const auto seed = env_seed()) kv["seed"] = std::to_string(*seed);
    }
    const market::SimConfig cfg = config::sim_config_from(kv);

    if (a.jobs <= 1) {
        run_one_simulation(cfg, fs::path(a.out));
        return 0;
    }

    // Independent seeds, one worker each; workers share nothing mutable.
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> failures(a.jobs);
    for (unsigned j = 0; j < a.jobs; ++j) {
        market::SimConfig cfg_j = cfg;
        cfg_j.seed = cfg.seed + j;
        const fs::path dir = fs::path(a.out) / ("seed_" + std::to_string(cfg_j.seed));
        workers.emplace_back([cfg_j, dir, &failures, j] {
            try {
                run_one_simulation(cfg_j, dir);
            } catch (...) {
                failures[j] = std::current_exception();
            }
        });
    }
    for (auto& w : workers) w.join();
    for (const auto& failure : failures) {
        if (failure) std::rethrow_exception(failure);
    }
    return 0;
}

int run_backtest(const std::string& input, const std::string& convention,
                 const std::string& capital, const std::string& provider_spec,
                 const std::string& out) {
    const auto conv = parse_convention(convention);
    std::istringstream in(io::read_file(input));
    const market::MarketTrajectory traj = io::read_trajectory_csv(in);
    const strategy::QuadraticValuation provider = parse_provider(provider_spec);
    const auto schedule = strategy::CapitalSchedule::parse(capital);

    const strategy::BacktestResult result =
        strategy::backtest(traj, provider, conv, schedule);

    std::ostringstream ledger_csv;
    io::write_ledger_csv(ledger_csv, result.ledger);
    write_text(fs::path(out) / "ledger.csv", ledger_csv.str());

    std::ostringstream positions_csv;
    io::write_positions_csv(positions_csv, result.positions);
    write_text(fs::path(out) / "positions.csv", positions_csv.str());

    const std::string summary = io::summary_json(result.ledger, conv).dump() + "\n";
    write_text(fs::path(out) / "summary.json", summary);
    std::cout << summary;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"information-avalanche toolkit: hyperbolic geometry, sandpile "
                 "criticality, market simulation, arbitrage backtests"};
    app.require_subcommand(1);

    GeometryArgs geo;
    auto* geometry_cmd = app.add_subcommand("geometry", "hyperbolic geometry queries");
    geometry_cmd->require_subcommand(1);

    auto* distance_cmd = geometry_cmd->add_subcommand("distance", "geodesic length");
    distance_cmd->add_option("--mu1", geo.mu1)->required();
    distance_cmd->add_option("--sigma1", geo.sigma1)->required();
    distance_cmd->add_option("--mu2", geo.mu2)->required();
    distance_cmd->add_option("--sigma2", geo.sigma2)->required();
    distance_cmd->add_option("--convention", geo.convention, "paper|metric");

    auto* arc_cmd = geometry_cmd->add_subcommand("arc", "geodesic semicircle parameters");
    arc_cmd->add_option("--mu1", geo.mu1)->required();
    arc_cmd->add_option("--sigma1", geo.sigma1)->required();
    arc_cmd->add_option("--mu2", geo.mu2)->required();
    arc_cmd->add_option("--sigma2", geo.sigma2)->required();

    auto* excess_cmd = geometry_cmd->add_subcommand(
        "excess", "excess action along a Sharpe ray");
    excess_cmd->add_option("--sharpe", geo.sharpe)->required();
    excess_cmd->add_option("--sigma1", geo.sigma1)->required();
    excess_cmd->add_option("--sigma2", geo.sigma2)->required();
    excess_cmd->add_option("--convention", geo.convention, "paper|metric");

    SandpileRunArgs sp;
    auto* sandpile_cmd = app.add_subcommand("sandpile", "sandpile runs and tail fits");
    sandpile_cmd->require_subcommand(1);

    auto* sp_run = sandpile_cmd->add_subcommand("run", "drive a lattice and log avalanches");
    sp_run->add_option("--size", sp.size, "lattice side length")->required();
    sp_run->add_option("--grains", sp.grains, "grains to drop")->required();
    auto* seed_opt = sp_run->add_option("--seed", sp.seed, "rng seed");
    sp_run->add_option("--threshold", sp.threshold, "toppling threshold");
    auto* smin_opt = sp_run->add_option("--smin", sp.smin, "tail cutoff for the fit");
    sp_run->add_option("--out", sp.out, "output directory");

    std::string fit_input;
    double fit_smin = 10.0;
    auto* sp_fit = sandpile_cmd->add_subcommand("fit", "power-law tail exponent");
    sp_fit->add_option("--input", fit_input, "events CSV")->required();
    sp_fit->add_option("--smin", fit_smin, "tail cutoff");

    SimulateArgs sim;
    auto* simulate_cmd = app.add_subcommand("simulate", "run the market simulation");
    simulate_cmd->add_option("--config", sim.config_file, "key=value config file");
    simulate_cmd->add_option("--set", sim.sets, "config override key=value")
        ->take_all();
    simulate_cmd->add_option("--seed", sim.seed_text, "rng seed");
    simulate_cmd->add_option("--steps", sim.steps_text, "driving steps");
    simulate_cmd->add_option("--path-mode", sim.path_mode, "geodesic|euclidean");
    simulate_cmd->add_option("--source", sim.source, "lattice|slope|none");
    simulate_cmd->add_option("--out", sim.out, "output directory");
    simulate_cmd->add_option("--jobs", sim.jobs, "independent seeds to fan out");

    std::string bt_input, bt_convention = "paper", bt_capital = "1",
                bt_provider = "0,0,1", bt_out = "backtest_out";
    auto* backtest_cmd = app.add_subcommand("backtest", "harvest a stored trajectory");
    backtest_cmd->add_option("--input", bt_input, "trajectory CSV")->required();
    backtest_cmd->add_option("--convention", bt_convention, "paper|metric");
    backtest_cmd->add_option("--capital", bt_capital, "W or t:W,t:W,...");
    backtest_cmd->add_option("--provider", bt_provider, "quadratic valuation a,b,c");
    backtest_cmd->add_option("--out", bt_out, "output directory");

    try {
        app.parse(argc, argv);
        sp.seed_given = seed_opt->count() > 0;
        sp.smin_given = smin_opt->count() > 0;

        if (distance_cmd->parsed()) return run_geometry_distance(geo);
        if (arc_cmd->parsed()) return run_geometry_arc(geo);
        if (excess_cmd->parsed()) return run_geometry_excess(geo);
        if (sp_run->parsed()) return run_sandpile_run(sp);
        if (sp_fit->parsed()) return run_sandpile_fit(fit_input, fit_smin);
        if (simulate_cmd->parsed()) return run_simulate(sim);
        if (backtest_cmd->parsed()) {
            return run_backtest(bt_input, bt_convention, bt_capital, bt_provider, bt_out);
        }
        std::cerr << "error: no subcommand\n";
        return 2;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
}
