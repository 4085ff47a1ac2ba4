#pragma once

// Flat "key = value" run configuration with dotted section names:
//
//   # comment
//   process.alpha = 0.33
//   process.beta = 0.2
//   process.mu = 0
//   process.sigma = 1
//   target.family = inverse_gaussian   # gamma | exponential | heavy_tail_ig
//   target.mean = 4
//   target.cv = 0.5
//   solver.horizon = 20
//   solver.n_steps = 200
//   seed = 7
//
// Sections are validated lazily: `moments` needs only the process block.

#include "ifpt/inverse_solver.hpp"
#include "ifpt/ou2d_model.hpp"
#include "ifpt/target_dists.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>

namespace ifpt {

class ConfigFile {
public:
    // Throws ConfigError on malformed lines, duplicates and unknown keys.
    static ConfigFile parse(const std::string& text);
    static ConfigFile load(const std::string& path);

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    // Missing or unparsable values throw ConfigError naming the key.
    std::string get_string(const std::string& key) const;
    double get_double(const std::string& key) const;
    std::uint64_t get_u64(const std::string& key) const;

    std::optional<double> find_double(const std::string& key) const;
    std::optional<std::uint64_t> find_u64(const std::string& key) const;
    std::optional<std::string> find_string(const std::string& key) const;

    const std::map<std::string, std::string>& values() const noexcept { return values_; }

private:
    std::map<std::string, std::string> values_;
};

// Module-level validation failures are reported as ConfigError too.
ModelParams process_from(const ConfigFile& cfg);
TargetDistribution target_from(const ConfigFile& cfg);
SolverConfig solver_from(const ConfigFile& cfg);

struct RunSettings {
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    std::size_t verify_paths = 100000;
    std::optional<double> sigma_level;
    unsigned threads = 0;
};

RunSettings settings_from(const ConfigFile& cfg);

}  // namespace ifpt
