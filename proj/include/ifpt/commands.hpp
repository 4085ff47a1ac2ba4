#pragma once

// Subcommands of the ifpt2d tool. Each returns the process exit status:
// 0 ok, 2 configuration error, 3 solver or data error, 4 verification failed.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ifpt {

enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 2,
    kExitSolver = 3,
    kExitVerifyFailed = 4,
};

struct CommandOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<double> ks_threshold;
    std::optional<unsigned> threads;
    std::optional<std::string> boundary_path;  // verify, transform
    std::optional<double> sigma_level;         // transform
    std::vector<double> times;                 // moments
};

// Output file names inside the output directory.
inline constexpr const char* kBoundaryCsv = "boundary.csv";
inline constexpr const char* kSolveSummary = "solve_summary.json";
inline constexpr const char* kVerifyReport = "verify_report.json";
inline constexpr const char* kDriftCsv = "drift.csv";
inline constexpr const char* kTransformReport = "transform_report.json";

inline constexpr double kDefaultVerifyKs = 0.05;
inline constexpr double kDefaultTransformKs = 0.02;

// Forward samples for verify/transform come from this seed so they never
// reuse the solver's Monte Carlo paths.
std::uint64_t verification_seed(std::uint64_t seed);

int cmd_solve(const CommandOptions& opt, std::ostream& out, std::ostream& err);
int cmd_verify(const CommandOptions& opt, std::ostream& out, std::ostream& err);
int cmd_transform(const CommandOptions& opt, std::ostream& out, std::ostream& err);
int cmd_moments(const CommandOptions& opt, std::ostream& out, std::ostream& err);

// "%.17g".
std::string format_double(double v);

struct BoundaryTable {
    std::vector<double> t;
    std::vector<double> s;
};

// Reads the t and S columns of a boundary CSV. Throws DataError.
BoundaryTable read_boundary_csv(const std::string& path);

}  // namespace ifpt
