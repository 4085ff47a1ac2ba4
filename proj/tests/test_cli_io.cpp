#include "ifpt/commands.hpp"
#include "ifpt/config.hpp"
#include "ifpt/error.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace ifpt;
namespace fs = std::filesystem;

namespace {

const char* kProcess =
    "process.alpha = 0.33\n"
    "process.beta = 0.2\n"
    "process.mu = 0\n"
    "process.sigma = 1\n";

const char* kSmallSolver =
    "solver.horizon = 10\n"
    "solver.n_steps = 100\n"
    "solver.mc_paths = 2000\n"
    "verify.paths = 20000\n"
    "threads = 1\n"
    "seed = 7\n";

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("ifpt2d_cli_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string write_config(const fs::path& dir, const std::string& name, const std::string& text) {
    const fs::path path = dir / name;
    std::ofstream(path) << text;
    return path.string();
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

ErrorCode config_code(const std::string& text) {
    try {
        const ConfigFile f = ConfigFile::parse(text);
        process_from(f);
        target_from(f);
        solver_from(f);
        settings_from(f);
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::DataError;
}

struct Run {
    int rc = 0;
    std::string out;
    std::string err;
};

template <class F>
Run run(F cmd, const CommandOptions& opt) {
    std::ostringstream out;
    std::ostringstream err;
    const int rc = cmd(opt, out, err);
    return {rc, out.str(), err.str()};
}

}  // namespace

TEST_CASE("config parsing") {
    const std::string ok = std::string(kProcess) +
                           "target.family = gamma  # trailing comment\n"
                           "target.mean = 4\n"
                           "target.cv = 0.5\n" +
                           kSmallSolver + "solver.mass_rule = pdf_euler\nsolver.fresh_streams = true\n";
    const ConfigFile f = ConfigFile::parse(ok);
    CHECK(process_from(f).beta == 0.2);
    CHECK(target_from(f).family() == "gamma");
    const SolverConfig s = solver_from(f);
    CHECK(s.n_steps == 100);
    CHECK(s.mass_rule == MassRule::PdfEuler);
    CHECK(s.fresh_streams);
    CHECK(settings_from(f).seed == 7);
    CHECK(settings_from(f).verify_paths == 20000);

    SUBCASE("missing sigma names the field") {
        std::string text = ok;
        text.erase(text.find("process.sigma"), std::string("process.sigma = 1\n").size());
        try {
            process_from(ConfigFile::parse(text));
            FAIL("expected throw");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::ConfigError);
            CHECK(std::string(e.what()).find("process.sigma") != std::string::npos);
        }
    }
    SUBCASE("rejected inputs") {
        CHECK(config_code(ok + "process.gamma = 1\n") == ErrorCode::ConfigError);
        CHECK(config_code(ok + "process.alpha = 0.5\n") == ErrorCode::ConfigError);
        CHECK(config_code(ok + "just some words\n") == ErrorCode::ConfigError);
        CHECK(config_code(ok + "target.rate =\n") == ErrorCode::ConfigError);
        CHECK(config_code(std::string(kProcess) + kSmallSolver + "target.family = weibull\n") ==
              ErrorCode::ConfigError);
        std::string bad_alpha = ok;
        bad_alpha.replace(bad_alpha.find("0.33"), 4, "-1");
        CHECK(config_code(bad_alpha) == ErrorCode::ConfigError);
        std::string bad_number = ok;
        bad_number.replace(bad_number.find("0.33"), 4, "0.3x");
        CHECK(config_code(bad_number) == ErrorCode::ConfigError);
    }
    SUBCASE("errors carry the line number") {
        try {
            ConfigFile::parse("# header\nprocess.alpha = 1\nprocess.alpha = 2\n");
            FAIL("expected throw");
        } catch (const Error& e) {
            CHECK(std::string(e.what()).find('3') != std::string::npos);
        }
    }
}

TEST_CASE("format_double round-trips") {
    for (double v : {0.1, -2.5e-300, 1.0 / 3.0, 123456789.0}) CHECK(std::stod(format_double(v)) == v);
    CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("read_boundary_csv") {
    const fs::path dir = scratch("csv");
    const auto bad = [&](const std::string& text) {
        const std::string path = write_config(dir, "b.csv", text);
        try {
            read_boundary_csv(path);
        } catch (const Error& e) {
            return e.code() == ErrorCode::DataError;
        }
        return false;
    };
    CHECK(bad("x,y\n0,1\n"));
    CHECK(bad("t,S\n"));
    CHECK(bad("t,S\n0,abc\n"));
    CHECK(bad("t,S\n0\n"));
    CHECK(bad("t,S\n0,nan\n"));
    CHECK_THROWS_AS(read_boundary_csv((dir / "absent.csv").string()), Error);
    const BoundaryTable b = read_boundary_csv(write_config(dir, "b.csv", "t,S,residual\n0,1.5,0\n0.1,1.25,0\n"));
    CHECK(b.t == std::vector<double>{0.0, 0.1});
    CHECK(b.s == std::vector<double>{1.5, 1.25});
}

TEST_CASE("solve, verify and transform") {
    const fs::path dir = scratch("pipeline");
    const std::string cfg = write_config(dir, "run.cfg",
                                         std::string(kProcess) +
                                             "target.family = inverse_gaussian\n"
                                             "target.mean = 4\n"
                                             "target.cv = 1\n"
                                             "transform.sigma_level = 2\n" +
                                             kSmallSolver);
    CommandOptions opt;
    opt.config_path = cfg;
    opt.out_dir = (dir / "out").string();

    const Run solved = run(cmd_solve, opt);
    REQUIRE(solved.rc == kExitOk);
    const fs::path boundary = dir / "out" / kBoundaryCsv;
    CHECK(slurp(boundary).rfind("t,S,residual,theta_bin_count\n", 0) == 0);
    CHECK(read_boundary_csv(boundary.string()).t.size() == 101);
    CHECK(slurp(dir / "out" / kSolveSummary).find("\"consumed_mass\"") != std::string::npos);

    SUBCASE("verify accepts the solved boundary") {
        opt.boundary_path = boundary.string();
        const Run r = run(cmd_verify, opt);
        CHECK(r.rc == kExitOk);
        CHECK(slurp(dir / "out" / kVerifyReport).find("\"pass\": true") != std::string::npos);
    }
    SUBCASE("verify rejects a shifted boundary") {
        const BoundaryTable b = read_boundary_csv(boundary.string());
        std::string csv = "t,S\n";
        for (std::size_t i = 0; i < b.t.size(); ++i) csv += format_double(b.t[i]) + ',' + format_double(b.s[i] + 1.0) + '\n';
        opt.boundary_path = write_config(dir, "shifted.csv", csv);
        CHECK(run(cmd_verify, opt).rc == kExitVerifyFailed);
    }
    SUBCASE("verify of an unreachable boundary has no sample") {
        std::string csv = "t,S\n";
        for (int i = 0; i <= 100; ++i) csv += format_double(0.1 * i) + ",1000000\n";
        opt.boundary_path = write_config(dir, "far.csv", csv);
        const Run r = run(cmd_verify, opt);
        CHECK(r.rc == kExitSolver);
        CHECK(r.err.find("InsufficientMass") != std::string::npos);
    }
    SUBCASE("verify needs a grid that matches the config") {
        opt.boundary_path = write_config(dir, "short.csv", "t,S\n0,1\n0.1,1\n");
        CHECK(run(cmd_verify, opt).rc == kExitSolver);
    }
    SUBCASE("transform of a constant boundary") {
        std::string csv = "t,S\n";
        for (int i = 0; i <= 100; ++i) csv += format_double(0.1 * i) + ",2\n";
        opt.boundary_path = write_config(dir, "flat.csv", csv);
        const Run r = run(cmd_transform, opt);
        CHECK(r.rc == kExitOk);
        std::istringstream drift(slurp(dir / "out" / kDriftCsv));
        std::string line;
        std::getline(drift, line);
        CHECK(line == "t,mu1,mu2");
        int rows = 0;
        while (std::getline(drift, line)) {
            ++rows;
            const auto a = line.find(',');
            const auto b = line.find(',', a + 1);
            CHECK(std::abs(std::stod(line.substr(a + 1, b - a - 1))) <= 1e-12);
            CHECK(std::abs(std::stod(line.substr(b + 1))) <= 1e-12);
        }
        CHECK(rows == 101);
    }
    SUBCASE("transform of the solved boundary") {
        opt.boundary_path = boundary.string();
        CHECK(run(cmd_transform, opt).rc == kExitOk);
        opt.sigma_level = 3.0;
        CHECK(run(cmd_transform, opt).rc == kExitOk);
        CHECK(slurp(dir / "out" / kTransformReport).find("\"sigma_level\": 3") != std::string::npos);
    }
}

TEST_CASE("gamma with unit CV and the exponential write the same boundary") {
    const fs::path dir = scratch("gamma_exp");
    CommandOptions g;
    g.config_path = write_config(dir, "g.cfg",
                                 std::string(kProcess) + "target.family = gamma\ntarget.mean = 4\ntarget.cv = 1\n" +
                                     kSmallSolver);
    g.out_dir = (dir / "g").string();
    CommandOptions e;
    e.config_path = write_config(dir, "e.cfg",
                                 std::string(kProcess) + "target.family = exponential\ntarget.rate = 0.25\n" +
                                     kSmallSolver);
    e.out_dir = (dir / "e").string();
    REQUIRE(run(cmd_solve, g).rc == kExitOk);
    REQUIRE(run(cmd_solve, e).rc == kExitOk);
    CHECK(slurp(dir / "g" / kBoundaryCsv) == slurp(dir / "e" / kBoundaryCsv));
}

TEST_CASE("exit codes for bad configurations") {
    const fs::path dir = scratch("codes");
    CommandOptions opt;
    opt.out_dir = (dir / "out").string();
    opt.config_path = write_config(dir, "nosigma.cfg",
                                   "process.alpha = 0.33\nprocess.beta = 0.2\nprocess.mu = 0\n"
                                   "target.family = exponential\ntarget.rate = 0.25\n" +
                                       std::string(kSmallSolver));
    const Run r = run(cmd_solve, opt);
    CHECK(r.rc == kExitConfig);
    CHECK(r.err.find("process.sigma") != std::string::npos);

    opt.config_path = (dir / "absent.cfg").string();
    CHECK(run(cmd_solve, opt).rc == kExitConfig);

    opt.config_path = write_config(dir, "heavy.cfg",
                                   std::string(kProcess) + "target.family = heavy_tail_ig\ntarget.lambda = 1000\n" +
                                       kSmallSolver);
    const Run heavy = run(cmd_solve, opt);
    CHECK(heavy.rc == kExitSolver);
    CHECK(heavy.err.find("InsufficientMass") != std::string::npos);

    CHECK(run(cmd_verify, opt).rc == kExitConfig);
}

TEST_CASE("moments") {
    const fs::path dir = scratch("moments");
    CommandOptions opt;
    opt.config_path = write_config(dir, "p.cfg", std::string(kProcess) + "process.mu = 0.8\n");
    CHECK(run(cmd_moments, opt).rc == kExitConfig);

    opt.config_path = write_config(dir, "p.cfg", "process.alpha = 0.33\nprocess.beta = 0.2\nprocess.mu = 0.8\n"
                                                 "process.sigma = 1\n");
    CHECK(run(cmd_moments, opt).rc == kExitConfig);
    opt.times = {0.0, 1.0};
    const Run r = run(cmd_moments, opt);
    REQUIRE(r.rc == kExitOk);
    std::istringstream lines(r.out);
    std::string line;
    std::getline(lines, line);
    CHECK(line == "t,m1,m2,Q11,Q12,Q22,quad_rel_err");
    std::getline(lines, line);
    CHECK(line == "0,0,0,0,0,0,0");
    std::getline(lines, line);
    CHECK(line.rfind("1,", 0) == 0);
    opt.times = {-1.0};
    CHECK(run(cmd_moments, opt).rc == kExitConfig);
}
