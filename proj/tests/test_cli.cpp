#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "geoinv/cli.hpp"
#include "geoinv/csv.hpp"
#include "geoinv/error.hpp"
#include "oracles.hpp"

using namespace geoinv;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code = -1;
    std::string out;
    std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "geoinv");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    Outcome o;
    o.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    o.out = out.str();
    o.err = err.str();
    return o;
}

fs::path scratch() {
    static const fs::path dir = [] {
        auto p = fs::temp_directory_path() / ("geoinv_cli_" + std::to_string(::getpid()));
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

csv::Document read_doc(const fs::path& p) {
    std::ifstream in(p);
    return csv::read(in);
}

std::size_t column(const csv::Document& d, const std::string& name) {
    for (std::size_t i = 0; i < d.header.size(); ++i)
        if (d.header[i] == name) return i;
    FAIL("missing column " << name);
    return 0;
}

std::string meta(const csv::Document& d, const std::string& key) {
    for (const auto& [k, v] : d.metadata)
        if (k == key) return v;
    return {};
}

double summary_value(const std::string& text, const std::string& key) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
        if (line.rfind(key + ": ", 0) == 0) return std::stod(line.substr(key.size() + 2));
    FAIL("missing summary key " << key);
    return 0.0;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("selectors") {
    CHECK(std::holds_alternative<SechSquared>(cli::parse_shape("sech2")));
    CHECK(std::holds_alternative<Exponential>(cli::parse_shape("exp")));
    const auto p = std::get<ShiftedPower>(cli::parse_shape("power:-1,1,1.5"));
    CHECK(p.exponent == 1.5);
    const auto w = std::get<SquareWell>(cli::parse_shape("square_well:-1,1"));
    CHECK(w.half_width == 1.0);
    bool threw = false;
    try {
        cli::parse_shape("power:1,2");
    } catch (const Error& e) {
        threw = e.code() == ErrorCode::invalid_argument;
    }
    CHECK(threw);
    CHECK(cli::make_trajectory("numeric:sech2")->energy(2.0) == doctest::Approx(-1.0).epsilon(1e-6));
}

TEST_CASE("grids") {
    const auto lin = cli::parse_grid("0:1:5");
    REQUIRE(lin.size() == 5);
    CHECK(lin[2] == doctest::Approx(0.5));
    const auto lg = cli::parse_grid("0.01:100:5:log");
    REQUIRE(lg.size() == 5);
    CHECK(lg[1] == doctest::Approx(0.1));
    CHECK(lg[4] == doctest::Approx(100.0));
}

TEST_CASE("forward command") {
    const auto path = scratch() / "forward.csv";
    const auto o = run_cli({"forward", "--shape", "sech2", "--v", "2,0.75", "--out", path.string()});
    REQUIRE(o.code == 0);
    const auto d = read_doc(path);
    REQUIRE(d.rows.size() == 2);
    CHECK(std::abs(std::stod(d.rows[0][column(d, "E")]) + 1.0) < 1e-6);
    CHECK(std::abs(std::stod(d.rows[1][column(d, "E")]) + 0.25) < 1e-6);
    CHECK(meta(d, "shape") == "sech2");

    const auto p = run_cli({"forward", "--shape", "power:0,1,1.5", "--v", "1"});
    REQUIRE(p.code == 0);
    CHECK(p.out.find("1,1.00118") != std::string::npos);

    const auto w = scratch() / "well.csv";
    REQUIRE(run_cli({"forward", "--shape", "square_well:-1,1", "--v", "2", "--out", w.string()}).code == 0);
    const auto dw = read_doc(w);
    CHECK(std::stod(dw.rows[0][1]) == doctest::Approx(oracle::square_well_energy(-1.0, 1.0, 2.0)).epsilon(1e-6));
}

TEST_CASE("forward wavefunction dumps") {
    const auto prefix = (scratch() / "psi").string();
    REQUIRE(run_cli({"forward", "--shape", "sech2", "--v", "2", "--psi-prefix", prefix}).code == 0);
    const auto d = read_doc(prefix + "_0.csv");
    CHECK(d.header == std::vector<std::string>{"x", "psi"});
    CHECK(d.rows.size() > 100);
}

TEST_CASE("trajectory command") {
    const auto path = scratch() / "traj.csv";
    REQUIRE(run_cli({"trajectory", "--trajectory", "sech2", "--v-grid", "0.01:100:41:log", "--out",
                     path.string()}).code == 0);
    const auto d = read_doc(path);
    CHECK(d.header == std::vector<std::string>{"v", "F", "dF", "R", "s"});
    int small = 0;
    for (const auto& row : d.rows) {
        const double v = std::stod(row[0]);
        const double f = std::stod(row[1]);
        // F = -v^2 (1 - 2v + ...), so 5% holds below v = 0.025
        if (v <= 0.025) {
            ++small;
            CHECK(std::abs(f / (-v * v) - 1.0) < 0.05);
        }
    }
    CHECK(small > 0);

    const auto ex = run_cli({"trajectory", "--trajectory", "exponential", "--v", "100"});
    REQUIRE(ex.code == 0);
    std::istringstream in(ex.out);
    const auto de = csv::read(in);
    const double r = std::stod(de.rows[0][column(de, "R")]);
    CHECK(r > -1.0);
    CHECK(r < 0.0);

    const auto s = run_cli({"trajectory", "--trajectory", "sech2", "--v", "0.75,0"});
    REQUIRE(s.code == 0);
    CHECK(s.out.find("0.75,-0.25,") != std::string::npos);
    CHECK(s.out.find("0,nan") != std::string::npos);
}

TEST_CASE("invert command writes both files and a summary") {
    const auto prefix = (scratch() / "sech").string();
    const auto o = run_cli({"invert", "--trajectory", "sech2", "--out", prefix});
    REQUIRE(o.code == 0);
    CHECK(summary_value(o.out, "max_abs_error") <= 0.02);
    CHECK(summary_value(o.out, "knots") == 40);
    CHECK(summary_value(o.out, "solver_calls") > 40);
    CHECK(o.out.find("wall_time_s: ") != std::string::npos);

    const auto trace = read_doc(prefix + "_trace.csv");
    CHECK(trace.header.back() == "abs_err");
    CHECK(trace.rows.size() == 40);
    CHECK(meta(trace, "sigma") == "0.5");

    const auto cmp = run_cli({"compare", "--input", prefix + "_reconstruction.csv", "--exact", "sech2"});
    REQUIRE(cmp.code == 0);
    CHECK(summary_value(cmp.out, "max_abs_knots") <= 0.02);
    CHECK(summary_value(cmp.out, "max_abs_knots") == doctest::Approx(summary_value(o.out, "max_abs_error")));
}

TEST_CASE("invert summary reports the seed") {
    const auto prefix = (scratch() / "power").string();
    const auto o = run_cli({"invert", "--trajectory", "power:-1,1,1.5", "--steps", "2", "--out", prefix});
    REQUIRE(o.code == 0);
    CHECK(std::abs(summary_value(o.out, "seed.q") - 1.5) < 0.01);
    CHECK(std::abs(summary_value(o.out, "seed.b") - 0.072) < 0.005);

    const auto e = run_cli({"invert", "--trajectory", "exponential", "--steps", "1", "--out",
                            (scratch() / "exp").string()});
    REQUIRE(e.code == 0);
    CHECK(std::abs(summary_value(e.out, "seed.q") - 1.0) < 0.05);
    CHECK(std::abs(summary_value(e.out, "seed.b") - 0.048) < 0.01);
}

TEST_CASE("invert failure leaves partial files and exits 1") {
    // clipping a growing potential at zero caps G below the positive F(v) of small couplings
    const auto prefix = (scratch() / "broken").string();
    const auto o = run_cli({"invert", "--trajectory", "power:-1,1,1.5", "--cut-to-zero", "true", "--out", prefix});
    CHECK(o.code == 1);
    CHECK(o.err.find("invert: ") != std::string::npos);
    const auto trace = read_doc(prefix + "_trace.csv");
    CHECK_FALSE(meta(trace, "error").empty());
    CHECK(trace.rows.size() < 40);
    CHECK(fs::exists(prefix + "_reconstruction.csv"));
}

TEST_CASE("tails: fixed-energy columns agree up to x_a") {
    const auto path = scratch() / "tails.csv";
    const auto o = run_cli({"tails", "--out", path.string()});
    REQUIRE(o.code == 0);
    const auto d = read_doc(path);
    const double x_a = std::stod(meta(d, "x_a"));
    CHECK(std::stod(meta(d, "v")) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(oracle::sech2(0.5 * x_a) == doctest::Approx(-0.5).epsilon(1e-12));
    REQUIRE(d.header.size() == 11);
    for (const auto& row : d.rows) {
        const double x = std::stod(row[0]);
        if (x > x_a) break;
        const double ref = std::stod(row[1]);
        for (std::size_t c = 2; c <= 5; ++c) CHECK(std::abs(std::stod(row[c]) - ref) < 1e-4);
    }
}

TEST_CASE("tails: eigen mode, flat extension decays slowest") {
    const auto path = scratch() / "tails_eigen.csv";
    const auto o = run_cli({"tails", "--eigen", "--slopes", "0,1", "--out", path.string()});
    REQUIRE(o.code == 0);
    const auto d = read_doc(path);
    const double x_a = std::stod(meta(d, "x_a"));
    int tail_rows = 0;
    for (const auto& row : d.rows) {
        const double x = std::stod(row[0]);
        if (x < 1.5 * x_a) continue;
        ++tail_rows;
        CHECK(std::stod(row[1]) > std::stod(row[2]));
    }
    CHECK(tail_rows > 10);
}

TEST_CASE("compare") {
    const auto exact = scratch() / "exact.csv";
    {
        std::ofstream f(exact);
        f << "# b = 0.1\n# h = 0.05\n# knots = 2\nx,g\n";
        for (double x : {0.0, 0.05, 0.1, 0.15, 0.2}) f << csv::number(x) << ',' << csv::number(oracle::sech2(x)) << '\n';
    }
    const auto a = run_cli({"compare", "--input", exact.string(), "--exact", "sech2"});
    REQUIRE(a.code == 0);
    CHECK(summary_value(a.out, "max_abs") < 1e-14);

    const auto shifted = scratch() / "shifted.csv";
    {
        std::ofstream f(shifted);
        f << "# b = 0.1\n# h = 0.05\n# knots = 2\nx,g\n";
        for (double x : {0.0, 0.05, 0.1, 0.15, 0.2}) f << csv::number(x) << ',' << csv::number(oracle::sech2(x) + 0.01) << '\n';
    }
    const auto b = run_cli({"compare", "--input", shifted.string(), "--exact", "sech2", "--out",
                            (scratch() / "cmp.csv").string()});
    REQUIRE(b.code == 0);
    CHECK(summary_value(b.out, "max_abs") == doctest::Approx(0.01).epsilon(1e-9));
    CHECK(summary_value(b.out, "rms") == doctest::Approx(0.01).epsilon(1e-9));
    CHECK(read_doc(scratch() / "cmp.csv").rows.size() == 5);

    const auto mismatch = run_cli({"compare", "--input", exact.string(), "--exact", "sech2", "--grid", "0:0.3:5"});
    CHECK(mismatch.code == 1);
    CHECK(mismatch.err.find("grid") != std::string::npos);
}

TEST_CASE("exit codes") {
    CHECK(run_cli({}).code == 2);
    CHECK(run_cli({"forward"}).code == 2);
    CHECK(run_cli({"forward", "--shape", "banana", "--v", "1"}).code == 2);
    CHECK(run_cli({"forward", "--shape", "sech2"}).code == 2);
    CHECK(run_cli({"forward", "--shape", "sech2", "--v", "abc"}).code == 2);
    CHECK(run_cli({"invert", "--trajectory", "sech2", "--sigma", "1.5", "--out", (scratch() / "x").string()}).code == 2);
    CHECK(run_cli({"invert", "--trajectory", "sech2", "--cut-to-zero", "maybe", "--out", (scratch() / "x").string()}).code == 2);
    CHECK(run_cli({"forward", "--help"}).code == 0);
    CHECK(run_cli({"forward", "--shape", "sech2", "--v", "-1"}).code == 2);
}

TEST_CASE("byte-identical reruns") {
    const auto a = scratch() / "det_a";
    const auto b = scratch() / "det_b";
    REQUIRE(run_cli({"invert", "--trajectory", "sech2", "--steps", "4", "--out", a.string()}).code == 0);
    REQUIRE(run_cli({"invert", "--trajectory", "sech2", "--steps", "4", "--out", b.string()}).code == 0);
    CHECK(slurp(a.string() + "_trace.csv") == slurp(b.string() + "_trace.csv"));
    CHECK(slurp(a.string() + "_reconstruction.csv") == slurp(b.string() + "_reconstruction.csv"));

    const auto t1 = scratch() / "t1.csv";
    const auto t2 = scratch() / "t2.csv";
    REQUIRE(run_cli({"tails", "--out", t1.string()}).code == 0);
    REQUIRE(run_cli({"tails", "--out", t2.string()}).code == 0);
    CHECK(slurp(t1) == slurp(t2));
}

TEST_CASE("config file, overridden by flags") {
    const auto cfg = scratch() / "run.ini";
    {
        std::ofstream f(cfg);
        f << "[invert]\nsigma = 0.6\nsteps = 3\n";
    }
    const auto prefix = scratch() / "cfg";
    REQUIRE(run_cli({"--config", cfg.string(), "invert", "--trajectory", "sech2", "--steps", "2", "--out",
                     prefix.string()}).code == 0);
    const auto d = read_doc(prefix.string() + "_trace.csv");
    CHECK(meta(d, "sigma") == "0.6");
    CHECK(meta(d, "steps") == "2");
    CHECK(d.rows.size() == 2);
}

}
