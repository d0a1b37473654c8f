#include "avalanche/io.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <system_error>

#include "avalanche/errors.hpp"

namespace avalanche::io {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(line.substr(start));
            return fields;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

// Strips a trailing '\r' so files written on other platforms still parse.
std::string_view trim_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

void expect_header(std::istream& in, std::string_view expected) {
    std::string line;
    if (!std::getline(in, line) || trim_cr(line) != expected)
        throw ConfigError("expected CSV header '" + std::string(expected) + "'");
}

std::vector<std::vector<std::string>> read_rows(std::istream& in, std::size_t n_fields) {
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        const std::string_view body = trim_cr(line);
        if (body.empty()) continue;
        const auto fields = split_fields(body);
        if (fields.size() != n_fields)
            throw ConfigError("CSV row has wrong field count: " + std::string(body));
        std::vector<std::string> row;
        row.reserve(fields.size());
        for (std::string_view f : fields) row.emplace_back(f);
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    if (res.ec != std::errc()) throw std::runtime_error("double formatting failed");
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
    double value = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw ConfigError("bad number: " + std::string(text));
    return value;
}

std::int64_t parse_int(std::string_view text) {
    std::int64_t value = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw ConfigError("bad integer: " + std::string(text));
    return value;
}

// ------------------------------------------------------------------ path ----

void write_path_csv(std::ostream& out, const geometry::DiscretePath& path) {
    out << "mu,sigma\n";
    for (const auto& p : path.points)
        out << format_double(p.mu) << ',' << format_double(p.sigma) << '\n';
}

geometry::DiscretePath read_path_csv(std::istream& in) {
    expect_header(in, "mu,sigma");
    geometry::DiscretePath path;
    for (const auto& row : read_rows(in, 2))
        path.points.push_back({parse_double(row[0]), parse_double(row[1])});
    return path;
}

// ---------------------------------------------------------------- events ----

void write_events_csv(std::ostream& out, const std::vector<sandpile::AvalancheEvent>& events) {
    out << "time,size,grains_lost\n";
    for (const auto& e : events)
        out << e.time << ',' << format_double(e.size) << ',' << e.grains_lost << '\n';
}

std::vector<sandpile::AvalancheEvent> read_events_csv(std::istream& in) {
    expect_header(in, "time,size,grains_lost");
    std::vector<sandpile::AvalancheEvent> events;
    for (const auto& row : read_rows(in, 3))
        events.push_back({parse_int(row[0]), parse_double(row[1]), parse_int(row[2])});
    return events;
}

// --------------------------------------------------------------- lattice ----

void write_lattice_txt(std::ostream& out, const sandpile::SandpileLattice& lattice) {
    for (std::size_t y = 0; y < lattice.height(); ++y) {
        for (std::size_t x = 0; x < lattice.width(); ++x) {
            if (x > 0) out << ' ';
            out << lattice.height_at(x, y);
        }
        out << '\n';
    }
}

// ------------------------------------------------------------ trajectory ----

void write_trajectory_csv(std::ostream& out, const market::MarketTrajectory& traj) {
    out << "t,price,mu,sigma,regime,path_mode\n";
    for (const auto& s : traj.samples) {
        out << format_double(s.t) << ',' << format_double(s.price) << ','
            << format_double(s.mu) << ',' << format_double(s.sigma) << ','
            << market::to_string(s.regime) << ',' << market::to_string(s.path_mode)
            << '\n';
    }
}

market::MarketTrajectory read_trajectory_csv(std::istream& in) {
    expect_header(in, "t,price,mu,sigma,regime,path_mode");
    market::MarketTrajectory traj;
    for (const auto& row : read_rows(in, 6)) {
        traj.samples.push_back({parse_double(row[0]), parse_double(row[1]),
                                parse_double(row[2]), parse_double(row[3]),
                                market::regime_from_string(row[4]),
                                market::path_mode_from_string(row[5])});
    }
    return traj;
}

// ---------------------------------------------------------------- ledger ----

void write_ledger_csv(std::ostream& out, const strategy::StrategyLedger& ledger) {
    out << "t,delta_L,increment,cumulative\n";
    // Mirror the ledger's compensated accumulation so the final row equals
    // cumulative() bit for bit.
    double cumulative = 0.0;
    double carry = 0.0;
    for (const auto& e : ledger.entries()) {
        const double y = e.increment - carry;
        const double s = cumulative + y;
        carry = (s - cumulative) - y;
        cumulative = s;
        out << format_double(e.t) << ',' << format_double(e.delta_L) << ','
            << format_double(e.increment) << ',' << format_double(cumulative) << '\n';
    }
}

strategy::StrategyLedger read_ledger_csv(std::istream& in) {
    expect_header(in, "t,delta_L,increment,cumulative");
    std::vector<strategy::LedgerEntry> entries;
    for (const auto& row : read_rows(in, 4))
        entries.push_back({parse_double(row[0]), parse_double(row[1]), parse_double(row[2])});
    return strategy::StrategyLedger::from_entries(entries);
}

// ------------------------------------------------------------- positions ----

void write_positions_csv(std::ostream& out, const std::vector<strategy::TimedHedge>& positions) {
    out << "t,stock_units,vega_units,ratio\n";
    for (const auto& p : positions) {
        out << format_double(p.t) << ',' << format_double(p.position.stock_units) << ','
            << format_double(p.position.vega_units) << ','
            << format_double(p.position.ratio) << '\n';
    }
}

std::vector<strategy::TimedHedge> read_positions_csv(std::istream& in) {
    expect_header(in, "t,stock_units,vega_units,ratio");
    std::vector<strategy::TimedHedge> positions;
    for (const auto& row : read_rows(in, 4)) {
        positions.push_back({parse_double(row[0]),
                             {parse_double(row[1]), parse_double(row[2]),
                              parse_double(row[3])}});
    }
    return positions;
}

// ------------------------------------------------------------------ json ----

std::string convention_name(geometry::LengthConvention conv) {
    return conv == geometry::LengthConvention::PaperEq5 ? "paper_eq5" : "metric_consistent";
}

geometry::LengthConvention convention_from_name(const std::string& name) {
    if (name == "paper_eq5" || name == "paper") return geometry::LengthConvention::PaperEq5;
    if (name == "metric_consistent" || name == "metric")
        return geometry::LengthConvention::MetricConsistent;
    throw ConfigError("unknown length convention: " + name);
}

nlohmann::json arc_json(const geometry::GeodesicArc& arc) {
    return nlohmann::json{{"mu_c", arc.mu_c}, {"R", arc.R}};
}

nlohmann::json length_json(double length, geometry::LengthConvention conv) {
    return nlohmann::json{{"length", length}, {"convention", convention_name(conv)}};
}

nlohmann::json excess_json(double delta_L, geometry::LengthConvention conv) {
    return nlohmann::json{{"delta_L", delta_L}, {"convention", convention_name(conv)}};
}

nlohmann::json fit_json(const sandpile::PowerLawFit& fit) {
    return nlohmann::json{
        {"tau_hat", fit.tau_hat}, {"n_tail", fit.n_tail}, {"s_min", fit.s_min}};
}

nlohmann::json summary_json(const strategy::StrategyLedger& ledger,
                            geometry::LengthConvention conv) {
    return nlohmann::json{{"cumulative", ledger.cumulative()},
                          {"n_steps", ledger.entries().size()},
                          {"convention", convention_name(conv)}};
}

// ----------------------------------------------------------------- files ----

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write file: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace avalanche::io
