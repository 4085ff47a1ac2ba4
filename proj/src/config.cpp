#include "ifpt/config.hpp"

#include "ifpt/error.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>

namespace ifpt {

namespace {

constexpr std::array<std::string_view, 26> kKnownKeys = {
    "process.alpha",      "process.beta",          "process.mu",
    "process.sigma",      "target.family",         "target.mean",
    "target.cv",          "target.rho",            "target.lambda",
    "target.kappa",       "target.rate",           "solver.horizon",
    "solver.n_steps",     "solver.mc_paths",       "solver.refresh_every",
    "solver.fresh_streams", "solver.bin_halfwidth", "solver.min_records_per_bin",
    "solver.root_tol",    "solver.max_bracket_expansions", "solver.mass_rule",
    "seed",               "threads",               "output.dir",
    "verify.paths",       "transform.sigma_level",
};

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorCode::ConfigError, msg); }

std::size_t get_count(const ConfigFile& cfg, const std::string& key, std::size_t fallback) {
    const auto v = cfg.find_u64(key);
    return v ? static_cast<std::size_t>(*v) : fallback;
}

// Re-labels library validation errors as configuration errors.
template <class F>
auto as_config(F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ConfigError) throw;
        config_error(e.what());
    }
}

}  // namespace

ConfigFile ConfigFile::parse(const std::string& text) {
    ConfigFile out;
    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line(raw);
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            config_error("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key.empty()) config_error("line " + std::to_string(line_no) + ": empty key");
        if (value.empty()) config_error("line " + std::to_string(line_no) + ": empty value for " + key);
        if (std::find(kKnownKeys.begin(), kKnownKeys.end(), key) == kKnownKeys.end()) {
            config_error("line " + std::to_string(line_no) + ": unknown key " + key);
        }
        if (!out.values_.emplace(key, value).second) {
            config_error("line " + std::to_string(line_no) + ": duplicate key " + key);
        }
    }
    return out;
}

ConfigFile ConfigFile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) config_error("cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::optional<std::string> ConfigFile::find_string(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::optional<double> ConfigFile::find_double(const std::string& key) const {
    const auto s = find_string(key);
    if (!s) return std::nullopt;
    double v = 0.0;
    const char* end = s->data() + s->size();
    const auto [ptr, ec] = std::from_chars(s->data(), end, v);
    if (ec != std::errc() || ptr != end) config_error("key " + key + ": not a number: " + *s);
    return v;
}

std::optional<std::uint64_t> ConfigFile::find_u64(const std::string& key) const {
    const auto s = find_string(key);
    if (!s) return std::nullopt;
    std::uint64_t v = 0;
    const char* end = s->data() + s->size();
    const auto [ptr, ec] = std::from_chars(s->data(), end, v);
    if (ec != std::errc() || ptr != end) config_error("key " + key + ": not an unsigned integer: " + *s);
    return v;
}

std::string ConfigFile::get_string(const std::string& key) const {
    auto v = find_string(key);
    if (!v) config_error("missing key " + key);
    return *v;
}

double ConfigFile::get_double(const std::string& key) const {
    auto v = find_double(key);
    if (!v) config_error("missing key " + key);
    return *v;
}

std::uint64_t ConfigFile::get_u64(const std::string& key) const {
    auto v = find_u64(key);
    if (!v) config_error("missing key " + key);
    return *v;
}

ModelParams process_from(const ConfigFile& cfg) {
    ModelParams p;
    p.alpha = cfg.get_double("process.alpha");
    p.beta = cfg.get_double("process.beta");
    p.mu = cfg.get_double("process.mu");
    p.sigma = cfg.get_double("process.sigma");
    return as_config([&] { return validate_params(p).params; });
}

TargetDistribution target_from(const ConfigFile& cfg) {
    const std::string family = cfg.get_string("target.family");
    const bool by_moments = cfg.has("target.mean") || cfg.has("target.cv");
    return as_config([&]() -> TargetDistribution {
        if (family == "inverse_gaussian") {
            if (by_moments) return ig_from_mean_cv(cfg.get_double("target.mean"), cfg.get_double("target.cv"));
            return make_inverse_gaussian(cfg.get_double("target.rho"), cfg.get_double("target.lambda"));
        }
        if (family == "gamma") {
            if (by_moments) return gamma_from_mean_cv(cfg.get_double("target.mean"), cfg.get_double("target.cv"));
            return make_gamma(cfg.get_double("target.kappa"), cfg.get_double("target.rate"));
        }
        if (family == "exponential") {
            if (cfg.has("target.mean")) return make_exponential(1.0 / cfg.get_double("target.mean"));
            return make_exponential(cfg.get_double("target.rate"));
        }
        if (family == "heavy_tail_ig") return make_heavy_tail_ig(cfg.get_double("target.lambda"));
        config_error("key target.family: unknown family " + family);
    });
}

SolverConfig solver_from(const ConfigFile& cfg) {
    SolverConfig s;
    s.horizon = cfg.get_double("solver.horizon");
    s.n_steps = static_cast<std::size_t>(cfg.get_u64("solver.n_steps"));
    s.mc_paths = get_count(cfg, "solver.mc_paths", s.mc_paths);
    s.refresh_every = get_count(cfg, "solver.refresh_every", s.refresh_every);
    s.min_records_per_bin = get_count(cfg, "solver.min_records_per_bin", s.min_records_per_bin);
    s.max_bracket_expansions = get_count(cfg, "solver.max_bracket_expansions", s.max_bracket_expansions);
    if (auto v = cfg.find_double("solver.bin_halfwidth")) s.bin_halfwidth = *v;
    if (auto v = cfg.find_double("solver.root_tol")) s.root_tol = *v;
    if (auto v = cfg.find_string("solver.fresh_streams")) {
        if (*v == "true") {
            s.fresh_streams = true;
        } else if (*v != "false") {
            config_error("key solver.fresh_streams: expected true or false");
        }
    }
    if (auto v = cfg.find_string("solver.mass_rule")) {
        if (*v == "pdf_euler") {
            s.mass_rule = MassRule::PdfEuler;
        } else if (*v == "cdf_increment") {
            s.mass_rule = MassRule::CdfIncrement;
        } else {
            config_error("key solver.mass_rule: expected pdf_euler or cdf_increment");
        }
    }
    s.exec.threads = static_cast<unsigned>(get_count(cfg, "threads", 0));
    as_config([&] {
        s.validate();
        return 0;
    });
    return s;
}

RunSettings settings_from(const ConfigFile& cfg) {
    RunSettings r;
    r.seed = cfg.find_u64("seed").value_or(0);
    r.out_dir = cfg.find_string("output.dir").value_or(".");
    r.verify_paths = get_count(cfg, "verify.paths", r.verify_paths);
    if (r.verify_paths == 0) config_error("key verify.paths: must be >= 1");
    r.sigma_level = cfg.find_double("transform.sigma_level");
    r.threads = static_cast<unsigned>(get_count(cfg, "threads", 0));
    return r;
}

}  // namespace ifpt
