#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "resodyn/cli.hpp"
#include "resodyn/config.hpp"
#include "resodyn/error.hpp"

using namespace resodyn;
using nlohmann::json;

namespace {

const std::string kDefaultConfig = std::string(RESODYN_SOURCE_DIR) + "/configs/default.json";

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> v;
    std::istringstream is(s);
    for (std::string l; std::getline(is, l);) v.push_back(l);
    return v;
}

std::string config_error(const json& j) {
    try {
        parse_config(j);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ConfigError);
        return e.what();
    }
    FAIL("config accepted");
    return {};
}

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("resodyn_test_" + name);
}

}  // namespace

TEST_CASE("config errors name the offending key") {
    const json base = json::parse(std::ifstream(kDefaultConfig));
    json j = base;
    j["system"]["hs"][3] = 1.0;
    CHECK(config_error(j).find("system.hs[3]") != std::string::npos);
    j = base;
    j["system"]["dim"] = 3;
    CHECK(config_error(j).find("system") != std::string::npos);
    j = base;
    j["bath"]["beta"] = -1.0;
    CHECK(config_error(j).find("bath.beta") != std::string::npos);
    j = base;
    j["bath"]["form_factor"]["decay_m"] = 3;
    CHECK(config_error(j).find("decay_m") != std::string::npos);
    j = base;
    j["coupling"]["lambda"] = "x";
    CHECK(config_error(j).find("coupling.lambda") != std::string::npos);
    j = base;
    j["sweep"]["scale"] = "cubic";
    CHECK(config_error(j).find("sweep.scale") != std::string::npos);

    const auto cfg = parse_config(json::object());
    CHECK_FALSE(cfg.system.has_value());
    try {
        cfg.require_coupling();
        FAIL("expected ConfigError");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("coupling") != std::string::npos);
    }
}

TEST_CASE("sweep values and ranges") {
    CHECK(parse_range("0.01..100") == std::pair{0.01, 100.0});
    CHECK(parse_range("-1..2.5") == std::pair{-1.0, 2.5});
    CHECK_THROWS_AS(parse_range("1-2"), Error);
    CHECK(parse_scale("log") == Scale::Log);
    CHECK_THROWS_AS(parse_scale("cubic"), Error);

    SweepSpec lin{"sigma", 0.0, 1.0, 5, Scale::Linear};
    CHECK(lin.values() == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
    SweepSpec lg{"gamma", 0.01, 100.0, 5, Scale::Log};
    const auto v = lg.values();
    CHECK(v.front() == 0.01);
    CHECK(v.back() == 100.0);
    CHECK(v[2] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("spinboson sweep") {
    const auto r = run({"--config", kDefaultConfig, "--threads", "1", "spinboson", "sweep", "gamma", "0.01..100", "log", "200"});
    REQUIRE(r.code == cli::kOk);
    const auto ls = lines(r.out);
    REQUIRE(ls.size() == 201);
    CHECK(ls[0] == "gamma,re_w3,im_w3,re_w4,im_w4,re_r,im_r,regime");
    CHECK(ls[1].rfind("0.01,", 0) == 0);
    CHECK(ls[1].find("overlapping") != std::string::npos);
    CHECK(ls[200].find("isolated") != std::string::npos);

    SUBCASE("deterministic and independent of the thread count") {
        const auto again = run({"--config", kDefaultConfig, "--threads", "1", "spinboson", "sweep", "gamma", "0.01..100", "log", "200"});
        const auto many = run({"--config", kDefaultConfig, "--threads", "4", "spinboson", "sweep", "gamma", "0.01..100", "log", "200"});
        CHECK(again.out == r.out);
        CHECK(many.out == r.out);
    }
}

TEST_CASE("sweep and resonances subcommands") {
    const auto one = run({"--config", kDefaultConfig, "--threads", "1", "sweep"});
    const auto three = run({"--config", kDefaultConfig, "--threads", "3", "sweep"});
    REQUIRE(one.code == cli::kOk);
    CHECK(one.out == three.out);
    CHECK(lines(one.out).size() == 51);
    CHECK(lines(one.out)[0].rfind("gamma,re_eps_1_1,im_eps_1_1", 0) == 0);

    const auto res = run({"--config", kDefaultConfig, "resonances"});
    REQUIRE(res.code == cli::kOk);
    CHECK(lines(res.out).size() == 5);
    CHECK(lines(res.out)[0] == "a,b,re_eps,im_eps,re_parent,im_parent,re_approx,im_approx");

    const auto dyn = run({"--config", kDefaultConfig, "dynamics"});
    REQUIRE(dyn.code == cli::kOk);
    CHECK(lines(dyn.out).size() == 31);
}

TEST_CASE("describe-output covers every emitted column") {
    for (const std::string sub : {"resonances", "dynamics", "spinboson"}) {
        const auto desc = run({"--describe-output", sub});
        CHECK(desc.code == cli::kOk);
        std::vector<std::string> args{"--config", kDefaultConfig, sub};
        const auto header = lines(run(args).out).at(0);
        std::istringstream cols(header);
        for (std::string c; std::getline(cols, c, ',');) {
            // columns indexed by labels are documented through their pattern
            std::string pattern = c;
            if (sub == "dynamics" && c.rfind("re_rho_", 0) == 0) pattern = "re_rho_A_B";
            if (sub == "dynamics" && c.rfind("im_rho_", 0) == 0) pattern = "im_rho_A_B";
            INFO(sub << ": " << c);
            CHECK(desc.out.find(pattern) != std::string::npos);
        }
    }
    CHECK(run({"--describe-output"}).out.find("oracle-validate") != std::string::npos);
}

TEST_CASE("oracle-validate on the default configuration") {
    const auto r = run({"--config", kDefaultConfig, "oracle-validate"});
    CHECK(r.code == cli::kOk);
    const json j = json::parse(r.out);
    CHECK(j["all_passed"] == true);
    CHECK(j["checks"].size() >= 15);
}

TEST_CASE("malformed configuration exits with code 2") {
    const auto path = temp_path("bad.json");
    {
        std::ofstream f(path);
        f << "{ \"system\": { \"dim\": 2, ";
    }
    const auto r = run({"--config", path.string(), "resonances"});
    CHECK(r.code == cli::kConfigError);
    CHECK_FALSE(r.err.empty());
    CHECK(run({"--config", "/nonexistent/config.json", "resonances"}).code == cli::kConfigError);
    CHECK(run({"resonances"}).code == cli::kConfigError);
    CHECK(run({"--config", kDefaultConfig, "sweep", "mu", "0..1", "linear", "3"}).code == cli::kConfigError);
    std::filesystem::remove(path);
}

TEST_CASE("--out writes the table and a metadata sidecar") {
    const auto path = temp_path("sweep.csv");
    const auto r = run({"--config", kDefaultConfig, "--out", path.string(), "spinboson", "sweep", "gamma", "0.1..10", "linear", "7"});
    REQUIRE(r.code == cli::kOk);
    CHECK(r.out.empty());
    std::ifstream csv(path);
    std::stringstream body;
    body << csv.rdbuf();
    CHECK(lines(body.str()).size() == 8);
    const json meta = json::parse(std::ifstream(path.string() + ".meta.json"));
    CHECK(meta["software_version"] == cli::kVersion);
    CHECK(meta["subcommand"] == "spinboson");
    CHECK(meta["columns"].size() == 8);
    CHECK(meta.contains("quadrature"));
    CHECK(meta["config"]["coupling"]["lambda"] == 0.1);
    std::filesystem::remove(path);
    std::filesystem::remove(path.string() + ".meta.json");
}

TEST_CASE("parallel_rows keeps order and propagates failures") {
    const auto rows = cli::parallel_rows(100, 4, [](int i) { return std::to_string(i * i); });
    for (int i = 0; i < 100; ++i) CHECK(rows[i] == std::to_string(i * i));
    CHECK_THROWS_AS(cli::parallel_rows(10, 3, [](int i) -> std::string {
                        if (i == 7) throw Error(ErrorCode::ComputeError, "boom");
                        return "";
                    }),
                    Error);
}

TEST_CASE("installed binary smoke test") {
    const std::string cmd = std::string(RESODYN_CLI_PATH) + " --version";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    char buf[128] = {};
    const std::string got = fgets(buf, sizeof buf, pipe) ? buf : "";
    CHECK(pclose(pipe) == 0);
    CHECK(got.find(cli::kVersion) != std::string::npos);
}
