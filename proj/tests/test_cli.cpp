#include "ksup/cli.hpp"
#include "ksup/serialize.hpp"

#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

using namespace ksup;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / "ksup_test_cli" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

void write(const fs::path& p, const std::string& text) {
    std::ofstream(p) << text;
}

std::string read(const fs::path& p) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

struct Ran {
    int code;
    std::string out;
    std::string err;
};

Ran approximate(const fs::path& dir, const std::string& body) {
    write(dir / "run.cfg", body + "output = " + (dir / "out").string() + "\n");
    std::ostringstream out, err;
    const int code = cli::cmd_approximate(dir / "run.cfg", out, err);
    return {code, out.str(), err.str()};
}

const fs::path& gauss_dir() {
    static const fs::path dir = [] {
        auto d = scratch_dir("gauss");
        const auto r = approximate(d, "n = 2\nm = 7\nlambda = 0.4, 0.6\ntarget = gauss-bump\nK_max = 1\n");
        REQUIRE(r.code == cli::kOk);
        return d / "out";
    }();
    return dir;
}

Ran check(const fs::path& p) {
    std::ostringstream out, err;
    const int code = cli::cmd_check(p, out, err);
    return {code, out.str(), err.str()};
}

} // namespace

TEST_CASE("config parsing") {
    std::istringstream is("# comment\nn = 3\nm = 11   # trailing\nlambda = auto\ntarget = runge\n"
                          "tol = 1e-4\nK_max = 2\nT_max = 2\nseed = 42\nvariant = standard\n"
                          "grid_res = 51\nmax_boxes = 1000\ndelta_rule = textbook\nmodulus = estimated\n");
    const auto c = cli::parse_config(is);
    CHECK(c.n == 3);
    CHECK(c.m == 11);
    CHECK(c.lambda.empty());
    CHECK(c.target == "runge");
    CHECK(c.tol == 1e-4);
    CHECK(c.k_max == 2);
    CHECK(c.t_max == 2);
    CHECK(c.seed == 42);
    CHECK(c.grid_res == 51);
    CHECK(c.max_boxes == 1000);
    CHECK(c.delta_rule == DeltaRule::Textbook);
    CHECK(c.modulus == ModulusSource::Estimated);

    std::istringstream l("lambda = 0.4, 0.6\n");
    CHECK(cli::parse_config(l).lambda == std::vector<double>{0.4, 0.6});

    for (const char* bad : {"colour = red\n", "n = 2\nn = 3\n", "m = seven\n", "K_max = 0\n",
                            "just text\n", "variant = sideways\n", "delta_rule = fast\n"}) {
        std::istringstream b(bad);
        CHECK_THROWS_AS(cli::parse_config(b), cli::ConfigError);
    }
}

TEST_CASE("m = 6 with n = 2 is a config error") {
    const auto dir = scratch_dir("m6");
    const auto r = approximate(dir, "n = 2\nm = 6\n");
    CHECK(r.code == cli::kConfigError);
    CHECK(r.err.find("level=error") != std::string::npos);
    CHECK(r.err.find("(2+sqrt 2) n") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "out" / "representation.json"));
}

TEST_CASE("zero target") {
    const auto dir = scratch_dir("zero");
    const auto r = approximate(dir, "target = zero\n");
    REQUIRE(r.code == cli::kOk);
    const auto out = dir / "out";
    for (const char* f : {"representation.json", "trace.csv", "report.json"})
        CHECK(fs::exists(out / f));
    const auto rep = representation_from_json(load_json(out / "representation.json"));
    CHECK(sup_norm(rep.g) == 0.0);

    write(dir / "pts.csv", "x1,x2\n0.1,0.2\n-3,4\n");
    std::ostringstream eo, ee;
    REQUIRE(cli::cmd_eval(out / "representation.json", dir / "pts.csv", {}, eo, ee) == cli::kOk);
    std::istringstream lines(eo.str());
    std::string line;
    std::getline(lines, line);
    CHECK(line == "x1,x2,value,target,error");
    while (std::getline(lines, line))
        CHECK(line.find(",0,0,0") != std::string::npos);

    CHECK(check(out / "report.json").code == cli::kOk);

    std::ostringstream po, pe;
    CHECK(cli::cmd_plot(out / "report.json", "residual-decay", dir / "plots", po, pe) == cli::kOk);
    const auto csv = read(dir / "plots" / "residual-decay.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
}

TEST_CASE("eval reports the bad row") {
    const auto dir = scratch_dir("badrow");
    write(dir / "pts.csv", "0.1,0.2\n0.3\n");
    std::ostringstream o, e;
    CHECK(cli::cmd_eval(gauss_dir() / "representation.json", dir / "pts.csv", {}, o, e) ==
          cli::kConfigError);
    CHECK(e.str().find("row 2") != std::string::npos);

    write(dir / "pts2.csv", "0.1,zz\n");
    std::ostringstream o2, e2;
    CHECK(cli::cmd_eval(gauss_dir() / "representation.json", dir / "pts2.csv", {}, o2, e2) ==
          cli::kConfigError);
    CHECK(e2.str().find("row 1") != std::string::npos);
}

TEST_CASE("eval reproduces the recorded Q_0 residual") {
    const auto dir = scratch_dir("evalq0");
    const auto rep = representation_from_json(load_json(gauss_dir() / "representation.json"));
    std::ostringstream pts;
    pts.precision(17);
    CubeGrid grid(2, 1.0, rep.options.grid_res);
    std::vector<double> x;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        grid.point(k, x);
        pts << x[0] << "," << x[1] << "\n";
    }
    write(dir / "pts.csv", pts.str());
    std::ostringstream o, e;
    REQUIRE(cli::cmd_eval(gauss_dir() / "representation.json", dir / "pts.csv", dir / "vals.csv", o,
                          e) == cli::kOk);
    std::ifstream is(dir / "vals.csv");
    std::string line;
    std::getline(is, line);
    double worst = 0.0;
    while (std::getline(is, line))
        worst = std::max(worst, std::stod(line.substr(line.rfind(',') + 1)));
    CHECK(worst == doctest::Approx(rep.final_M[0]).epsilon(1e-12));
}

TEST_CASE("fresh artifacts pass check") {
    const auto r = check(gauss_dir() / "representation.json");
    CHECK_MESSAGE(r.code == cli::kOk, r.out);
    CHECK(r.out.find("FAIL") == std::string::npos);
    CHECK(check(gauss_dir() / "report.json").code == cli::kOk);
}

TEST_CASE("a corrupted g knot fails the residual bound") {
    const auto dir = scratch_dir("corrupt_g");
    auto j = load_json(gauss_dir() / "representation.json");
    const auto rep = representation_from_json(j);
    // the knot nearest X_1 at the origin
    const double x0[] = {0.0, 0.0};
    const double u = rep.scheme.inner(1, rep.family[0], x0);
    const auto& bp = rep.g.breakpoints();
    std::size_t best = 0;
    for (std::size_t i = 0; i < bp.size(); ++i)
        if (std::abs(bp[i] - u) < std::abs(bp[best] - u))
            best = i;
    j["g"]["values"][best] = num(rep.g.values()[best] + 5.0);
    save_json(j, dir / "representation.json");
    const auto r = check(dir / "representation.json");
    CHECK(r.code == cli::kInvariantFailed);
    CHECK(r.out.find("FAIL residual bound") != std::string::npos);
    CHECK(r.err.find("residual bound") != std::string::npos);
}

TEST_CASE("a forged trace value fails the decay envelope") {
    const auto dir = scratch_dir("forged_M");
    auto j = load_json(gauss_dir() / "representation.json");
    j["trace"][0]["M"][2] = num(50.0);
    save_json(j, dir / "representation.json");
    const auto r = check(dir / "representation.json");
    CHECK(r.code == cli::kInvariantFailed);
    CHECK(r.out.find("FAIL decay envelope") != std::string::npos);
}

TEST_CASE("plots") {
    const auto dir = scratch_dir("plots");
    const auto report = gauss_dir() / "report.json";
    for (const char* kind : {"residual-decay", "h-gallery", "phi-gallery", "g"}) {
        std::ostringstream o, e;
        REQUIRE_MESSAGE(cli::cmd_plot(report, kind, dir, o, e) == cli::kOk, e.str());
        CHECK(fs::exists(dir / (std::string(kind) + ".svg")));
        CHECK(fs::exists(dir / (std::string(kind) + ".csv")));
        CHECK(read(dir / (std::string(kind) + ".svg")).rfind("<svg", 0) == 0);
        if (std::string(kind) == "g") {
            const auto rep =
                representation_from_json(load_json(gauss_dir() / "representation.json"));
            CHECK(o.str().find("g breakpoints: " + std::to_string(rep.g.size())) !=
                  std::string::npos);
            CHECK(rep.g.size() == rep.trace[0].knots + 2);
        }
    }
    std::ostringstream o, e;
    CHECK(cli::cmd_plot(report, "pie", dir, o, e) == cli::kConfigError);
}

TEST_CASE("identical configs give identical traces") {
    const auto a = scratch_dir("det_a");
    const auto b = scratch_dir("det_b");
    const std::string cfg = "target = runge\nK_max = 1\nlambda = 0.4, 0.6\n";
    REQUIRE(approximate(a, cfg).code == cli::kOk);
    REQUIRE(approximate(b, cfg).code == cli::kOk);
    CHECK(read(a / "out" / "trace.csv") == read(b / "out" / "trace.csv"));
    CHECK(read(a / "out" / "representation.json") == read(b / "out" / "representation.json"));
}

TEST_CASE("an aborting run exits 2 and keeps its artifacts") {
    const auto dir = scratch_dir("abort");
    const auto r = approximate(dir, "target = gauss-bump\nK_max = 2\ntol = 0\nlambda = 0.4, 0.6\n");
    CHECK(r.code == cli::kStageAbort);
    CHECK(r.err.find("boxes") != std::string::npos);
    CHECK(fs::exists(dir / "out" / "representation.json"));
    CHECK(check(dir / "out" / "representation.json").code == cli::kOk);
}
