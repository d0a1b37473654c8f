#include "avalanche/config.hpp"

#include <charconv>
#include <sstream>
#include <system_error>

#include "avalanche/errors.hpp"
#include "avalanche/io.hpp"

namespace avalanche::config {

namespace {

std::string trim(std::string_view s) {
    const auto begin = s.find_first_not_of(" \t");
    if (begin == std::string_view::npos) return {};
    const auto end = s.find_last_not_of(" \t");
    return std::string(s.substr(begin, end - begin + 1));
}

std::uint64_t parse_u64(const std::string& text) {
    std::uint64_t value = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw ConfigError("bad unsigned integer: " + text);
    return value;
}

bool parse_bool(const std::string& text) {
    if (text == "true" || text == "1") return true;
    if (text == "false" || text == "0") return false;
    throw ConfigError("bad boolean: " + text);
}

std::string to_string(sandpile::IntensityLaw::Kind k) {
    return k == sandpile::IntensityLaw::Kind::Exponential ? "exponential"
                                                          : "hard_threshold";
}

sandpile::IntensityLaw::Kind intensity_kind_from(const std::string& s) {
    if (s == "exponential") return sandpile::IntensityLaw::Kind::Exponential;
    if (s == "hard_threshold") return sandpile::IntensityLaw::Kind::HardThreshold;
    throw ConfigError("unknown intensity kind: " + s);
}

}  // namespace

KeyValues parse_kv_text(const std::string& text) {
    KeyValues kv;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) +
                              " is not key = value");
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config line " + std::to_string(line_no) +
                              " has an empty key or value");
        kv[key] = value;
    }
    return kv;
}

KeyValues parse_kv_file(const std::string& path) {
    return parse_kv_text(io::read_file(path));
}

void apply_override(KeyValues& kv, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override is not key=value: " + assignment);
    const std::string key = trim(assignment.substr(0, eq));
    const std::string value = trim(assignment.substr(eq + 1));
    if (key.empty() || value.empty())
        throw ConfigError("override has an empty key or value: " + assignment);
    kv[key] = value;
}

market::SimConfig sim_config_from(const KeyValues& kv) {
    market::SimConfig c;
    for (const auto& [key, value] : kv) {
        if (key == "source") c.source = market::event_source_from_string(value);
        else if (key == "seed") c.seed = parse_u64(value);
        else if (key == "steps") c.steps = io::parse_int(value);
        else if (key == "dt") c.dt = io::parse_double(value);
        else if (key == "lattice.size")
            c.lattice_size = static_cast<std::size_t>(parse_u64(value));
        else if (key == "lattice.threshold")
            c.lattice_threshold = static_cast<int>(io::parse_int(value));
        else if (key == "slope.theta0") c.slope.theta = io::parse_double(value);
        else if (key == "slope.theta_c") c.slope.theta_c = io::parse_double(value);
        else if (key == "slope.v") c.slope.v = io::parse_double(value);
        else if (key == "slope.alpha") c.slope.alpha = io::parse_double(value);
        else if (key == "intensity.kind") c.intensity.kind = intensity_kind_from(value);
        else if (key == "intensity.lambda0") c.intensity.lambda0 = io::parse_double(value);
        else if (key == "intensity.beta") c.intensity.beta = io::parse_double(value);
        else if (key == "mapping.kind") c.mapping.kind = market::mapping_kind_from_string(value);
        else if (key == "mapping.k") c.mapping.k = io::parse_double(value);
        else if (key == "mapping.gamma") c.mapping.gamma = io::parse_double(value);
        else if (key == "mapping.cap") c.mapping.cap = io::parse_double(value);
        else if (key == "reversion.kappa") c.mapping.kappa = io::parse_double(value);
        else if (key == "reversion.sigma_bar") c.mapping.sigma_bar = io::parse_double(value);
        else if (key == "reversion.rho") c.rho = io::parse_double(value);
        else if (key == "sharpe.S") c.sharpe = io::parse_double(value);
        else if (key == "sharpe.drift") c.sharpe_drift = io::parse_double(value);
        else if (key == "price.horizon") c.horizon = io::parse_double(value);
        else if (key == "price.target0") c.target_price0 = io::parse_double(value);
        else if (key == "sigma0") c.sigma0 = io::parse_double(value);
        else if (key == "path.mode") c.path_mode = market::path_mode_from_string(value);
        else if (key == "path.samples")
            c.path_samples = static_cast<std::size_t>(parse_u64(value));
        else if (key == "path.epsilon_frac") c.epsilon_frac = io::parse_double(value);
        else if (key == "onsager.enabled") c.onsager_enabled = parse_bool(value);
        else if (key == "onsager.l11") c.onsager_transport[0][0] = io::parse_double(value);
        else if (key == "onsager.l12") c.onsager_transport[0][1] = io::parse_double(value);
        else if (key == "onsager.l21") c.onsager_transport[1][0] = io::parse_double(value);
        else if (key == "onsager.l22") c.onsager_transport[1][1] = io::parse_double(value);
        else if (key == "onsager.kick") c.onsager_kick = io::parse_double(value);
        else if (key == "onsager.steps")
            c.onsager_steps = static_cast<std::size_t>(parse_u64(value));
        else if (key == "onsager.dt") c.onsager_dt = io::parse_double(value);
        else throw ConfigError("unknown config key: " + key);
    }
    market::validate_config(c);
    return c;
}

KeyValues to_kv(const market::SimConfig& c) {
    KeyValues kv;
    kv["source"] = market::to_string(c.source);
    kv["seed"] = std::to_string(c.seed);
    kv["steps"] = std::to_string(c.steps);
    kv["dt"] = io::format_double(c.dt);
    kv["lattice.size"] = std::to_string(c.lattice_size);
    kv["lattice.threshold"] = std::to_string(c.lattice_threshold);
    kv["slope.theta0"] = io::format_double(c.slope.theta);
    kv["slope.theta_c"] = io::format_double(c.slope.theta_c);
    kv["slope.v"] = io::format_double(c.slope.v);
    kv["slope.alpha"] = io::format_double(c.slope.alpha);
    kv["intensity.kind"] = to_string(c.intensity.kind);
    kv["intensity.lambda0"] = io::format_double(c.intensity.lambda0);
    kv["intensity.beta"] = io::format_double(c.intensity.beta);
    kv["mapping.kind"] = market::to_string(c.mapping.kind);
    kv["mapping.k"] = io::format_double(c.mapping.k);
    kv["mapping.gamma"] = io::format_double(c.mapping.gamma);
    kv["mapping.cap"] = io::format_double(c.mapping.cap);
    kv["reversion.kappa"] = io::format_double(c.mapping.kappa);
    kv["reversion.sigma_bar"] = io::format_double(c.mapping.sigma_bar);
    kv["reversion.rho"] = io::format_double(c.rho);
    kv["sharpe.S"] = io::format_double(c.sharpe);
    kv["sharpe.drift"] = io::format_double(c.sharpe_drift);
    kv["price.horizon"] = io::format_double(c.horizon);
    kv["price.target0"] = io::format_double(c.target_price0);
    kv["sigma0"] = io::format_double(c.sigma0);
    kv["path.mode"] = market::to_string(c.path_mode);
    kv["path.samples"] = std::to_string(c.path_samples);
    kv["path.epsilon_frac"] = io::format_double(c.epsilon_frac);
    kv["onsager.enabled"] = c.onsager_enabled ? "true" : "false";
    kv["onsager.l11"] = io::format_double(c.onsager_transport[0][0]);
    kv["onsager.l12"] = io::format_double(c.onsager_transport[0][1]);
    kv["onsager.l21"] = io::format_double(c.onsager_transport[1][0]);
    kv["onsager.l22"] = io::format_double(c.onsager_transport[1][1]);
    kv["onsager.kick"] = io::format_double(c.onsager_kick);
    kv["onsager.steps"] = std::to_string(c.onsager_steps);
    kv["onsager.dt"] = io::format_double(c.onsager_dt);
    return kv;
}

std::string render_kv(const KeyValues& kv) {
    std::ostringstream out;
    for (const auto& [key, value] : kv) out << key << " = " << value << '\n';
    return out.str();
}

}  // namespace avalanche::config
