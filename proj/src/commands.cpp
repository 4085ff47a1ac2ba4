#include "ifpt/commands.hpp"

#include "ifpt/config.hpp"
#include "ifpt/drift_transform.hpp"
#include "ifpt/error.hpp"
#include "ifpt/inverse_solver.hpp"
#include "ifpt/ou2d_model.hpp"
#include "ifpt/rng.hpp"
#include "ifpt/simulator.hpp"
#include "ifpt/stats.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace ifpt {

namespace {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

struct Loaded {
    ConfigFile file;
    RunSettings run;
};

Loaded load(const CommandOptions& opt) {
    Loaded l{ConfigFile::load(opt.config_path), {}};
    l.run = settings_from(l.file);
    if (opt.seed) l.run.seed = *opt.seed;
    if (opt.out_dir) l.run.out_dir = *opt.out_dir;
    if (opt.threads) l.run.threads = *opt.threads;
    return l;
}

SolverConfig solver_for(const Loaded& l) {
    SolverConfig s = solver_from(l.file);
    s.exec.threads = l.run.threads;
    return s;
}

fs::path prepare_out(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::DataError, "cannot create output directory " + dir + ": " + ec.message());
    return fs::path(dir);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::DataError, "cannot write " + path.string());
    f << text;
    if (!f) throw Error(ErrorCode::DataError, "write failed for " + path.string());
}

ordered_json params_json(const ModelParams& p) {
    return ordered_json{{"alpha", p.alpha}, {"beta", p.beta}, {"mu", p.mu}, {"sigma", p.sigma}};
}

ordered_json target_json(const TargetDistribution& d) {
    ordered_json j{{"family", d.family()}};
    std::visit(
        [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, InverseGaussian>) {
                j["rho"] = v.rho;
                j["lambda"] = v.lambda;
            } else if constexpr (std::is_same_v<T, HeavyTailIG>) {
                j["lambda"] = v.lambda;
            } else {
                j["kappa"] = v.kappa;
                j["rate"] = v.rate;
            }
        },
        d.variant());
    return j;
}

ordered_json grid_json(const SolverConfig& s) {
    return ordered_json{{"horizon", s.horizon}, {"n_steps", s.n_steps}, {"h", s.h()}};
}

// Boundary file must sit on the configured grid.
void check_grid(const BoundaryTable& b, const SolverConfig& s) {
    if (b.t.size() != s.n_steps + 1) {
        throw Error(ErrorCode::DataError, "boundary has " + std::to_string(b.t.size()) +
                                              " rows, config grid needs " + std::to_string(s.n_steps + 1));
    }
    for (std::size_t i = 0; i < b.t.size(); ++i) {
        const double want = s.time_at(i);
        if (std::abs(b.t[i] - want) > 1e-9 * std::max(1.0, s.horizon)) {
            throw Error(ErrorCode::DataError, "boundary time at row " + std::to_string(i) +
                                                  " does not match the config grid");
        }
    }
}

template <class F>
int guarded(std::ostream& err, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.code() == ErrorCode::ConfigError ? kExitConfig : kExitSolver;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitSolver;
    }
}

}  // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::uint64_t verification_seed(std::uint64_t seed) { return splitmix64(seed ^ 0x7665726966795eedULL); }

BoundaryTable read_boundary_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::DataError, "cannot open boundary file " + path);
    std::string line;
    if (!std::getline(in, line) || line.rfind("t,S", 0) != 0) {
        throw Error(ErrorCode::DataError, path + ": expected header starting with t,S");
    }
    BoundaryTable b;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::istringstream fields(line);
        std::string a;
        std::string c;
        if (!std::getline(fields, a, ',') || !std::getline(fields, c, ',')) {
            throw Error(ErrorCode::DataError, path + ": malformed row " + std::to_string(row));
        }
        try {
            std::size_t used_a = 0;
            std::size_t used_c = 0;
            const double t = std::stod(a, &used_a);
            const double s = std::stod(c, &used_c);
            if (used_a != a.size() || used_c != c.size() || !std::isfinite(t) || !std::isfinite(s)) {
                throw std::invalid_argument("bad number");
            }
            b.t.push_back(t);
            b.s.push_back(s);
        } catch (const std::logic_error&) {
            throw Error(ErrorCode::DataError, path + ": bad number in row " + std::to_string(row));
        }
    }
    if (b.t.empty()) throw Error(ErrorCode::DataError, path + ": no data rows");
    return b;
}

int cmd_solve(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Loaded l = load(opt);
        const ModelParams p = process_from(l.file);
        const TargetDistribution d = target_from(l.file);
        const SolverConfig s = solver_for(l);
        const fs::path dir = prepare_out(l.run.out_dir);

        const auto start = std::chrono::steady_clock::now();
        const BoundaryEstimate est = solve(p, d, s, l.run.seed);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        std::string csv = "t,S,residual,theta_bin_count\n";
        for (std::size_t i = 0; i < est.grid.size(); ++i) {
            csv += format_double(est.grid[i]) + ',' + format_double(est.values[i]) + ',' +
                   format_double(est.residuals[i]) + ',' + std::to_string(est.theta_counts[i]) + '\n';
        }
        write_text(dir / kBoundaryCsv, csv);

        std::size_t flagged = 0;
        for (std::uint32_t f : est.flags) flagged += f != kFlagNone;
        ordered_json summary{{"command", "solve"},
                             {"params", params_json(p)},
                             {"target", target_json(d)},
                             {"seed", l.run.seed},
                             {"grid", grid_json(s)},
                             {"mc_paths", s.mc_paths},
                             {"consumed_mass", est.consumed_mass},
                             {"flagged_steps", flagged},
                             {"wall_seconds", wall}};
        write_text(dir / kSolveSummary, summary.dump(2) + '\n');
        out << "wrote " << (dir / kBoundaryCsv).string() << " (" << est.grid.size() << " rows)\n";
        return kExitOk;
    });
}

int cmd_verify(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (!opt.boundary_path) throw Error(ErrorCode::ConfigError, "verify needs --boundary");
        const Loaded l = load(opt);
        const ModelParams p = process_from(l.file);
        const TargetDistribution d = target_from(l.file);
        const SolverConfig s = solver_for(l);
        const double threshold = opt.ks_threshold.value_or(kDefaultVerifyKs);
        const BoundaryTable table = read_boundary_csv(*opt.boundary_path);
        check_grid(table, s);
        const fs::path dir = prepare_out(l.run.out_dir);

        const std::uint64_t vseed = verification_seed(l.run.seed);
        const PiecewiseLinearBoundary b(table.t, table.s);
        const FptSampleSet sample = batch_fpt(p, b, s.horizon, s.h(), l.run.verify_paths, vseed, s.exec);
        const double ks = ks_censored(sample, d, table.t);
        const bool pass = ks <= threshold;

        ordered_json report{{"command", "verify"},
                            {"params", params_json(p)},
                            {"target", target_json(d)},
                            {"seed", l.run.seed},
                            {"verification_seed", vseed},
                            {"grid", grid_json(s)},
                            {"n_paths", sample.n_paths()},
                            {"crossed", sample.times.size()},
                            {"censored", sample.censored_count},
                            {"consumed_mass", d.cdf(s.horizon)},
                            {"ks", ks},
                            {"threshold", threshold},
                            {"pass", pass}};
        write_text(dir / kVerifyReport, report.dump(2) + '\n');
        out << "ks = " << format_double(ks) << (pass ? " <= " : " > ") << format_double(threshold) << '\n';
        return pass ? kExitOk : kExitVerifyFailed;
    });
}

int cmd_transform(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (!opt.boundary_path) throw Error(ErrorCode::ConfigError, "transform needs --boundary");
        const Loaded l = load(opt);
        const ModelParams p = process_from(l.file);
        const SolverConfig s = solver_for(l);
        const std::optional<double> level = opt.sigma_level ? opt.sigma_level : l.run.sigma_level;
        if (!level) throw Error(ErrorCode::ConfigError, "missing key transform.sigma_level (or --sigma-level)");
        if (!std::isfinite(*level)) throw Error(ErrorCode::ConfigError, "transform.sigma_level must be finite");
        const double threshold = opt.ks_threshold.value_or(kDefaultTransformKs);
        const BoundaryTable table = read_boundary_csv(*opt.boundary_path);
        check_grid(table, s);
        const fs::path dir = prepare_out(l.run.out_dir);

        const DriftSchedule ds = to_drift(table.t, table.s, *level, p);
        std::string csv = "t,mu1,mu2\n";
        for (std::size_t i = 0; i < ds.grid.size(); ++i) {
            csv += format_double(ds.grid[i]) + ',' + format_double(ds.mu1[i]) + ',' + format_double(ds.mu2[i]) + '\n';
        }
        write_text(dir / kDriftCsv, csv);

        const std::uint64_t vseed = verification_seed(l.run.seed);
        const PiecewiseLinearBoundary b(table.t, table.s);
        const FptSampleSet original = batch_fpt(p, b, s.horizon, s.h(), l.run.verify_paths, vseed, s.exec);
        const FptSampleSet transformed =
            simulate_transformed(ds, p, s.h(), s.horizon, l.run.verify_paths, vseed, s.exec);
        const TwoSampleKs ks = ks_two_sample(original, transformed);
        const bool pass = ks.statistic <= threshold;

        ordered_json report{{"command", "transform"},
                            {"params", params_json(p)},
                            {"seed", l.run.seed},
                            {"verification_seed", vseed},
                            {"grid", grid_json(s)},
                            {"sigma_level", *level},
                            {"n_paths", l.run.verify_paths},
                            {"crossed_original", original.times.size()},
                            {"crossed_transformed", transformed.times.size()},
                            {"ks", ks.statistic},
                            {"p_value", ks.p_value},
                            {"threshold", threshold},
                            {"pass", pass}};
        write_text(dir / kTransformReport, report.dump(2) + '\n');
        out << "two-sample ks = " << format_double(ks.statistic) << (pass ? " <= " : " > ")
            << format_double(threshold) << '\n';
        return pass ? kExitOk : kExitVerifyFailed;
    });
}

int cmd_moments(const CommandOptions& opt, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const ConfigFile file = ConfigFile::load(opt.config_path);
        const ModelParams p = process_from(file);
        if (opt.times.empty()) throw Error(ErrorCode::ConfigError, "moments needs --times");
        for (double t : opt.times) {
            if (!(t >= 0.0) || !std::isfinite(t)) {
                throw Error(ErrorCode::ConfigError, "--times entries must be finite and >= 0");
            }
        }
        std::string table = "t,m1,m2,Q11,Q12,Q22,quad_rel_err\n";
        for (double t : opt.times) {
            const Moments2 m = moments_at(t, p);
            const Mat2 q = covariance_by_quadrature(t, p);
            const double scale = std::max({std::abs(m.cov.a11), std::abs(m.cov.a12), std::abs(m.cov.a22)});
            const double diff = std::max({std::abs(m.cov.a11 - q.a11), std::abs(m.cov.a12 - q.a12),
                                          std::abs(m.cov.a22 - q.a22)});
            const double rel = scale > 0.0 ? diff / scale : diff;
            table += format_double(t) + ',' + format_double(m.mean[0]) + ',' + format_double(m.mean[1]) + ',' +
                     format_double(m.cov.a11) + ',' + format_double(m.cov.a12) + ',' +
                     format_double(m.cov.a22) + ',' + format_double(rel) + '\n';
        }
        out << table;
        return kExitOk;
    });
}

}  // namespace ifpt
