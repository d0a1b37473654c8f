// Serialization: tidy CSV for traces and plot data, JSON for scalar
// results. All floating-point output uses shortest round-trip formatting,
// so emitted files are byte-stable and re-parse to the exact values.

#ifndef AVALANCHE_IO_HPP
#define AVALANCHE_IO_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "avalanche/geometry.hpp"
#include "avalanche/market.hpp"
#include "avalanche/sandpile.hpp"
#include "avalanche/strategy.hpp"

namespace avalanche::io {

std::string format_double(double x);
double parse_double(std::string_view text);
std::int64_t parse_int(std::string_view text);

// CSV headers: mu,sigma
void write_path_csv(std::ostream& out, const geometry::DiscretePath& path);
geometry::DiscretePath read_path_csv(std::istream& in);

// time,size,grains_lost
void write_events_csv(std::ostream& out, const std::vector<sandpile::AvalancheEvent>& events);
std::vector<sandpile::AvalancheEvent> read_events_csv(std::istream& in);

// Plain-text grid of grain heights, one lattice row per line.
void write_lattice_txt(std::ostream& out, const sandpile::SandpileLattice& lattice);

// t,price,mu,sigma,regime,path_mode
void write_trajectory_csv(std::ostream& out, const market::MarketTrajectory& traj);
market::MarketTrajectory read_trajectory_csv(std::istream& in);

// t,delta_L,increment,cumulative (cumulative re-derived on read)
void write_ledger_csv(std::ostream& out, const strategy::StrategyLedger& ledger);
strategy::StrategyLedger read_ledger_csv(std::istream& in);

// t,stock_units,vega_units,ratio
void write_positions_csv(std::ostream& out, const std::vector<strategy::TimedHedge>& positions);
std::vector<strategy::TimedHedge> read_positions_csv(std::istream& in);

std::string convention_name(geometry::LengthConvention conv);
geometry::LengthConvention convention_from_name(const std::string& name);

nlohmann::json arc_json(const geometry::GeodesicArc& arc);
nlohmann::json length_json(double length, geometry::LengthConvention conv);
nlohmann::json excess_json(double delta_L, geometry::LengthConvention conv);
nlohmann::json fit_json(const sandpile::PowerLawFit& fit);
nlohmann::json summary_json(const strategy::StrategyLedger& ledger,
                            geometry::LengthConvention conv);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace avalanche::io

#endif  // AVALANCHE_IO_HPP
