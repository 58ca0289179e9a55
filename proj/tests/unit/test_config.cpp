#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "qnls/cli.hpp"
#include "qnls/config.hpp"
#include "qnls/json_writer.hpp"

using namespace qnls;
using nlohmann::ordered_json;

namespace {

std::string error_of(const ordered_json& doc, const std::string& sub = "ground-state") {
    try {
        parse_config(doc, sub);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_SUITE("config") {

TEST_CASE("defaults parse") {
    const RunConfig c = parse_config(default_config_json(), "verify");
    CHECK(c.n == 5);
    CHECK(c.num_nodes == 2048);
    CHECK(c.r_max == 32.0);
    CHECK(c.system.kappa == 0.5);
    CHECK(c.ground_state.n == 5);
    CHECK(c.evolve.order == 4);
    CHECK(c.initial_data.scale_factor == 0.9);
    CHECK(c.output.csv);
    CHECK(c.output.json);
    CHECK(c.seed == 20240601u);
}

TEST_CASE("n out of range cites the bound") {
    ordered_json d = default_config_json();
    d["grid"]["n"] = 7;
    const std::string e = error_of(d);
    CHECK(e.find("grid.n") != std::string::npos);
    CHECK(e.find("n >= 6") != std::string::npos);
    d["grid"]["n"] = 0;
    CHECK(error_of(d).find("1..5") != std::string::npos);
}

TEST_CASE("unknown keys and type errors name the field") {
    ordered_json d = default_config_json();
    d["evolve"]["dtt"] = 1.0;
    CHECK(error_of(d).find("evolve.dtt") != std::string::npos);
    d = default_config_json();
    d["grid"]["num_nodes"] = "many";
    CHECK(error_of(d).find("grid.num_nodes") != std::string::npos);
    d = default_config_json();
    d["extra"] = 1;
    CHECK(error_of(d).find("extra") != std::string::npos);
    d = default_config_json();
    d["schema_version"] = 2;
    CHECK(error_of(d).find("schema_version") != std::string::npos);
    d = default_config_json();
    d["evolve"]["order"] = 3;
    CHECK(error_of(d).find("evolve") != std::string::npos);
    d = default_config_json();
    d["output"]["formats"] = {"csv", "png"};
    CHECK(error_of(d).find("output.formats") != std::string::npos);
    CHECK_THROWS_AS(parse_config(default_config_json(), "plot"), ConfigError);
}

TEST_CASE("dotted overrides") {
    ordered_json d = default_config_json();
    apply_override(d, "grid.n=3");
    apply_override(d, "system.kappa=1");
    apply_override(d, "evolve.dt=0.002");
    apply_override(d, "output.directory=results/a");
    apply_override(d, "initial_data.family=gaussian");
    const RunConfig c = parse_config(d, "evolve");
    CHECK(c.n == 3);
    CHECK(c.system.kappa == 1.0);
    CHECK(c.evolve.kappa == 1.0);
    CHECK(c.evolve.dt == 0.002);
    CHECK(c.output.directory == "results/a");
    CHECK(c.initial_data.family == "gaussian");
    CHECK_THROWS_AS(apply_override(d, "novalue"), ConfigError);
    CHECK_THROWS_AS(apply_override(d, "grid..n=1"), ConfigError);
    CHECK_THROWS_AS(apply_override(d, "grid.n.x=1"), ConfigError);
}

TEST_CASE("raw system constants") {
    ordered_json d = default_config_json();
    d["system"] = {{"m", 1.0}, {"M", 2.0}, {"lambda", {-2.0, 0.0}}, {"mu", {-1.0, 0.0}}, {"c", 2.0}};
    const RunConfig c = parse_config(d, "ground-state");
    CHECK(c.system.kappa == 0.5);
    REQUIRE(c.system.raw.has_value());
    CHECK(c.system.raw->M == 2.0);
    d["system"]["lambda"] = {3.0, 0.0};
    CHECK(error_of(d).find("system") != std::string::npos);
}

TEST_CASE("experiments array") {
    ordered_json d = default_config_json();
    d["experiments"] = ordered_json::array();
    d["experiments"].push_back({{"family", "scaled_ground_state"}, {"parameters", {{"scale_factor", 1.1}}}});
    d["experiments"].push_back({{"family", "gaussian"},
                                {"parameters", {{"amplitude_u", 2.0}, {"width", 1.5}}},
                                {"evolve", {{"t_max", 0.5}, {"r_max", 50.0}}},
                                {"label", "g"}});
    const RunConfig c = parse_config(d, "dichotomy");
    REQUIRE(c.experiments.size() == 2);
    CHECK(c.experiments[0].scale_factor == 1.1);
    CHECK(c.experiments[1].amplitude_u == 2.0);
    CHECK(c.experiments[1].evolve.t_max == 0.5);
    CHECK(c.experiments[1].r_max == 50.0);
    CHECK(c.experiments[1].label == "g");
    d["experiments"][1]["parameters"]["sigma"] = 1;
    CHECK(error_of(d, "dichotomy").find("experiments.1.parameters.sigma") != std::string::npos);
}

TEST_CASE("config files merge over the defaults") {
    const auto dir = std::filesystem::temp_directory_path() / "qnls_cfg_test";
    std::filesystem::create_directories(dir);
    const auto good = (dir / "good.json").string();
    const auto bad = (dir / "bad.json").string();
    std::ofstream(good) << R"({"grid": {"n": 4}, "seed": 5})";
    std::ofstream(bad) << "{\"grid\": {\n  \"n\": 4,,\n}}";
    cli::Options o;
    o.subcommand = "ground-state";
    o.config_path = good;
    o.sets = {"grid.num_nodes=1024"};
    o.seed = 9;
    const RunConfig c = cli::build_config(o);
    CHECK(c.n == 4);
    CHECK(c.num_nodes == 1024);
    CHECK(c.r_max == 32.0);
    CHECK(c.seed == 9u);
    o.config_path = bad;
    try {
        cli::build_config(o);
        FAIL("expected a ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    std::ostringstream out, err;
    CHECK(cli::main_entry(o, out, err) == 2);
    std::filesystem::remove_all(dir);
}

TEST_CASE("JSON writer: 17 significant digits, null for non-finite") {
    ordered_json j;
    j["a"] = 0.1;
    j["b"] = 1.0 / 3.0;
    j["c"] = std::numeric_limits<double>::quiet_NaN();
    j["d"] = 2.0;
    j["e"] = 7;
    j["f"] = ordered_json::array();
    const std::string s = dump_json(j);
    CHECK(s.find("\"a\": 0.10000000000000001") != std::string::npos);
    CHECK(s.find("\"b\": 0.33333333333333331") != std::string::npos);
    CHECK(s.find("\"c\": null") != std::string::npos);
    CHECK(s.find("\"d\": 2.0") != std::string::npos);
    CHECK(s.find("\"e\": 7") != std::string::npos);
    CHECK(s.find("\"f\": []") != std::string::npos);
    const ordered_json back = ordered_json::parse(s);
    CHECK(back["b"].get<double>() == 1.0 / 3.0);
    CHECK(dump_json(j) == s);
}

TEST_CASE("echo round trips through the schema") {
    const RunConfig c = parse_config(default_config_json(), "evolve");
    const ordered_json e = to_json(c);
    CHECK(e["schema_version"] == kSchemaVersion);
    CHECK(e["grid"]["n"] == 5);
    CHECK(e["evolve"]["order"] == 4);
}

}
