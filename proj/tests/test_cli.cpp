#include "qfi/cli.hpp"

#include "unit.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "qfi");
    std::vector<const char*> argv;
    for (const std::string& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = qfi::cli::run(int(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch() {
    const fs::path dir = fs::temp_directory_path() / "qfi_cli_tests";
    fs::create_directories(dir);
    return dir;
}

std::string write(const std::string& name, const std::string& text) {
    const fs::path p = scratch() / name;
    std::ofstream(p) << text;
    return p.string();
}

nlohmann::json parse(const std::string& s) { return nlohmann::json::parse(s); }

const char* kQubitX =
    R"({"kind": "unitary", "rho0": {"dim": 2, "entries": [[0.75, 0], [0, 0.25]]},
        "generator": {"dim": 2, "entries": [[0, 0.5], [0.5, 0]]}})";
const char* kQubitZ =
    R"({"kind": "unitary", "rho0": [[0.75, 0], [0, 0.25]], "generator": [[0.5, 0], [0, -0.5]]})";
const char* kBernoulli =
    R"({"kind": "affine", "rho_const": [[0, 0], [0, 1]], "rho_linear": [[1, 0], [0, -1]], "domain": [0, 1]})";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("compute on the rotating qubit") {
    const std::string in = write("qx.json", kQubitX);
    for (const char* method : {"support", "sld", "matrix"}) {
        const Result r = run({"compute", "--input", in, "--method", method});
        REQUIRE(r.code == 0);
        const auto j = parse(r.out);
        CHECK(j["F"].get<double>() == doctest::Approx(0.25).epsilon(1e-12));
        CHECK(j["F_ct"].get<double>() == 0.0);
        CHECK(j["support_dim"] == 2);
    }
}

TEST_CASE("compute on the Bernoulli family") {
    const std::string in = write("bern.json", kBernoulli);
    const Result r = run({"compute", "--input", in, "--method", "sld", "--theta", "0.25"});
    REQUIRE(r.code == 0);
    const auto j = parse(r.out);
    CHECK(j["F"].get<double>() == doctest::Approx(16.0 / 3.0).epsilon(1e-12));
    CHECK(j["F_ct"].get<double>() == doctest::Approx(16.0 / 3.0).epsilon(1e-12));
    CHECK(std::abs(j["F_qt"].get<double>()) < 1e-12);

    const Result fd = run({"compute", "--input", in, "--method", "support", "--theta", "0.25", "--step", "1e-4"});
    REQUIRE(fd.code == 0);
    CHECK(parse(fd.out)["F"].get<double>() == doctest::Approx(16.0 / 3.0).epsilon(1e-6));
}

TEST_CASE("malformed JSON exits 2 without output") {
    const std::string in = write("bad.json", "{\"kind\": \"unitary\",\n \"rho0\": [[1, 0],\n");
    const Result r = run({"compute", "--input", in});
    CHECK(r.code == 2);
    CHECK(r.out.empty());
    CHECK(r.err.find("line") != std::string::npos);
}

TEST_CASE("validation failures exit 2 without output") {
    const std::string bad_trace =
        write("trace.json", R"({"kind": "unitary", "rho0": [[0.6, 0], [0, 0.6]], "generator": [[0, 1], [1, 0]]})");
    for (const std::vector<std::string>& args :
         {std::vector<std::string>{"compute", "--input", bad_trace},
          {"compute", "--input", "/nonexistent.json"},
          {"compute", "--input", write("qx.json", kQubitX), "--method", "nope"},
          {"compute", "--input", write("qx.json", kQubitX), "--threshold", "-1"},
          {"compute", "--input", write("qx.json", kQubitX), "--step", "0.5"},
          {"compute", "--input", write("qx.json", kQubitX), "--method", "block"},
          {"ensemble", "--input", write("bern.json", kBernoulli)},
          {"demo-mzi", "--photons", "5", "--truncation", "5"},
          {"compute"},
          {"frobnicate"}}) {
        const Result r = run(args);
        CHECK_MESSAGE(r.code == 2, args[0]);
        CHECK(r.out.empty());
    }
}

TEST_CASE("numerical failures exit 3") {
    const std::string in = write("cross.json", R"({"kind": "sampled_grid",
        "thetas": [-0.00001, 0, 0.00001],
        "matrices": [[[0.49999, 0], [0, 0.50001]], [[0.5, 0], [0, 0.5]], [[0.50001, 0], [0, 0.49999]]]})");
    const Result r = run({"compute", "--input", in, "--method", "support", "--theta", "0"});
    CHECK(r.code == 3);
    CHECK(r.out.empty());
}

TEST_CASE("compare agrees on the qubit and reports zero for a stationary state") {
    const Result r = run({"compare", "--input", write("qx.json", kQubitX)});
    REQUIRE(r.code == 0);
    const auto j = parse(r.out);
    CHECK(j["agree"] == true);
    CHECK(j["max_discrepancy"].get<double>() <= 1e-8);
    CHECK(j["reports"].size() == 3);
    CHECK_FALSE(j.contains("timing_seconds"));

    const Result z = run({"compare", "--input", write("zero.json", R"({"rho": [[0.7, 0], [0, 0.3]], "drho": [[0, 0], [0, 0]]})")});
    REQUIRE(z.code == 0);
    for (const auto& [name, rep] : parse(z.out)["reports"].items()) CHECK(rep["F"].get<double>() == 0.0);

    const Result t = run({"compare", "--input", write("qx.json", kQubitX), "--timing"});
    CHECK(parse(t.out).contains("timing_seconds"));
}

TEST_CASE("compare exits 4 when pathways disagree") {
    // A coarse grid: the finite-difference drho and finite-difference eigenvectors
    // disagree at O(h^2).
    const double h = 0.1;
    nlohmann::json j;
    j["kind"] = "sampled_grid";
    j["thetas"] = {-h, 0.0, h};
    for (double t : {-h, 0.0, h}) {
        const double c = std::cos(t), s = std::sin(t);
        // rotate diag(0.9, 0.1) by angle t
        const double a = 0.9 * c * c + 0.1 * s * s, b = 0.8 * c * s, d = 0.9 * s * s + 0.1 * c * c;
        j["matrices"].push_back({{a, b}, {b, d}});
    }
    const Result r = run({"compare", "--input", write("coarse.json", j.dump()), "--step", "0.1"});
    CHECK(r.code == 4);
    CHECK(parse(r.out)["agree"] == false);
}

TEST_CASE("compare includes the block pathway for blocked input") {
    const std::string in = write("blocks.json", R"({"blocks": [
        {"Q": 0.6, "rho": [[0.75, 0], [0, 0.25]], "generator": [[0, 0.5], [0.5, 0]]},
        {"Q": 0.4, "rho": [[1]], "generator": [[0.3]]}],
        "cross_generators": [{"from": 0, "to": 1, "entries": [[0.2], [[0, 0.1]]]}]})");
    const Result r = run({"compare", "--input", in});
    REQUIRE(r.code == 0);
    CHECK(parse(r.out)["reports"].contains("block"));
    const Result b = run({"compute", "--input", in, "--method", "block"});
    REQUIRE(b.code == 0);
    CHECK(parse(b.out)["method"] == "block");
}

TEST_CASE("ensemble reports") {
    const Result x = run({"ensemble", "--input", write("qx.json", kQubitX), "--samples", "50", "--seed", "3"});
    REQUIRE(x.code == 0);
    const auto jx = parse(x.out);
    CHECK(jx["verdict"]["optimal"] == false);
    CHECK(jx["verdict"]["witness"]["i"] == 1);
    CHECK(jx["verdict"]["witness"]["j"] == 2);
    CHECK(jx["verdict"]["witness"]["magnitude"].get<double>() == doctest::Approx(0.5));
    CHECK(jx["optimal_ensemble_variance"].get<double>() == doctest::Approx(0.25).epsilon(1e-8));
    CHECK(jx["sampled"]["min"].get<double>() >= 0.25 - 1e-9);

    const Result z = run({"ensemble", "--input", write("qz.json", kQubitZ), "--samples", "20", "--seed", "3"});
    REQUIRE(z.code == 0);
    const auto jz = parse(z.out);
    CHECK(jz["verdict"]["optimal"] == true);
    CHECK(jz["sampled"]["min"].get<double>() >= jz["F"].get<double>() - 1e-9);

    const Result p = run({"ensemble", "--input",
                          write("pure.json", R"({"rho": [[1, 0], [0, 0]], "generator": [[0, 0.5], [0.5, 0]]})")});
    REQUIRE(p.code == 0);
    const auto jp = parse(p.out);
    CHECK(jp["optimal_ensemble"]["members"].size() == 1);
    CHECK(jp["F"].get<double>() == doctest::Approx(1.0));
    CHECK(jp["verdict"]["witness"].is_null());
}

TEST_CASE("demo-mzi") {
    for (int n : {0, 1, 5}) {
        const Result r = run({"demo-mzi", "--photons", std::to_string(n), "--truncation", "8"});
        REQUIRE(r.code == 0);
        const auto j = parse(r.out);
        CHECK(std::abs(j["report"]["F"].get<double>() - n) < 1e-10);
        CHECK(j["verdict"]["optimal"] == true);
    }
    const Result full = run({"demo-mzi", "--photons", "3", "--truncation", "5", "--full-space"});
    REQUIRE(full.code == 0);
    CHECK(parse(full.out)["dim"] == 25);
}

TEST_CASE("repeated runs are byte-identical") {
    const std::string in = write("qx.json", kQubitX);
    for (const std::vector<std::string>& args :
         {std::vector<std::string>{"compute", "--input", in, "--theta", "0.3"},
          {"compare", "--input", in},
          {"ensemble", "--input", in, "--samples", "30", "--seed", "11"},
          {"demo-mzi", "--photons", "4", "--truncation", "6", "--full-space"}}) {
        const Result a = run(args);
        const Result b = run(args);
        CHECK(a.code == 0);
        CHECK(a.out == b.out);
    }
}

TEST_CASE("--output writes the file instead of standard output") {
    const std::string out = (scratch() / "report.json").string();
    fs::remove(out);
    const Result r = run({"compute", "--input", write("qx.json", kQubitX), "--output", out});
    REQUIRE(r.code == 0);
    CHECK(r.out.empty());
    std::ifstream f(out);
    std::stringstream ss;
    ss << f.rdbuf();
    CHECK(parse(ss.str())["F"].get<double>() == doctest::Approx(0.25));
}

TEST_CASE("threshold precedence: flag over environment over default") {
    const std::string in = write("small.json",
        R"({"kind": "unitary", "rho0": [[0.999999, 0], [0, 0.000001]], "generator": [[0, 0.5], [0.5, 0]]})");
    CHECK(parse(run({"compute", "--input", in}).out)["support_dim"] == 2);
    ::setenv("QFI_THRESHOLD", "1e-5", 1);
    CHECK(parse(run({"compute", "--input", in}).out)["support_dim"] == 1);
    CHECK(parse(run({"compute", "--input", in, "--threshold", "1e-12"}).out)["support_dim"] == 2);
    ::setenv("QFI_THRESHOLD", "abc", 1);
    CHECK(run({"compute", "--input", in}).code == 2);
    ::unsetenv("QFI_THRESHOLD");
}

}
