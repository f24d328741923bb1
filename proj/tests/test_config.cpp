#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cocycle/commands.hpp"
#include "cocycle/report.hpp"

using namespace cocycle;
namespace fs = std::filesystem;

namespace {

const char* kGolden = R"({
  "omega": {"periodic": [1], "depth": 30},
  "condition_A": {"gamma": "0.5", "C_omega": "4", "C_eps": "2", "C_delta": "0.5"},
  "phases": [{"phi": {"a0": "1", "sin": ["0.3"]}, "lambda": "1"}],
  "epsilon": {"values": ["0.15"]}
})";

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("cocycle_unit_" + name);
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("floats and unknown keys are rejected with a line") {
    const std::string bad = "{\n  \"omega\": {\"quotients\": [1, 2]},\n  \"eps0\": 0.5\n}";
    try {
        parse_config(bad, "bad.json");
        FAIL("accepted a float");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("bad.json:3") != std::string::npos);
        CHECK(std::string(e.what()).find("/eps0") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config(R"({"omega": {"quotients": [1]}, "colour": "1"})", "x"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"omega": {"quotients": [1, "a"]}, "phases": []})", "x"), ConfigError);
}

TEST_CASE("precision precedence and hash") {
    const std::string text = kGolden;
    ::unsetenv("COCYCLE_PRECISION_BITS");
    const RunConfig a = parse_config(text, "g");
    CHECK(a.precision_bits == 128);
    ::setenv("COCYCLE_PRECISION_BITS", "192", 1);
    const RunConfig b = parse_config(text, "g");
    CHECK(b.precision_bits == 192);
    Overrides ov;
    ov.precision_bits = 320;
    const RunConfig c = parse_config(text, "g", ov);
    ::unsetenv("COCYCLE_PRECISION_BITS");
    CHECK(c.precision_bits == 320);
    CHECK(a.hash != b.hash);
    CHECK(a.hash == parse_config(text, "other-name").hash);
}

TEST_CASE("report helpers") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(csv_escape("a,b") == "\"a,b\"");
    CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(csv_escape("plain") == "plain");
    CHECK(fmt(0.1) == "0.1");
}

TEST_CASE("cf writes Fibonacci convergents") {
    Overrides ov;
    ov.output = scratch("cf").string();
    const RunConfig cfg = parse_config(kGolden, "g", ov);
    std::ostringstream log;
    CHECK(cmd_cf(cfg, log) == kPass);
    const std::string csv = slurp(fs::path(*ov.output) / "convergents.csv");
    CHECK(csv.find("\r\n4,1,3,5,") != std::string::npos);
    CHECK(csv.find("\r\n9,1,34,55,") != std::string::npos);
    CHECK(slurp(fs::path(*ov.output) / "condition_A.json").find("\"pass\": false") != std::string::npos);
}

TEST_CASE("critical-set refuses a recurrence failure") {
    Overrides ov;
    ov.output = scratch("refuse").string();
    const RunConfig cfg = parse_config(kGolden, "g", ov);
    std::ostringstream log;
    const int rc = guarded(log, [&] { return cmd_critical_set(cfg, log); });
    CHECK(rc == kPipelineError);
    CHECK(log.str().find("recurrence") != std::string::npos);
}

TEST_CASE("empty sweep gives empty outputs") {
    std::string text = kGolden;
    text.replace(text.find("[\"0.15\"]"), 8, "[]");
    Overrides ov;
    ov.output = scratch("empty").string();
    ov.mode = "theorem3";
    RunConfig cfg = parse_config(text, "g", ov);
    cfg.phases = PhaseFamily({{TrigPoly::constant(1), TrigPoly::constant(1)}});
    std::ostringstream log;
    CHECK(cmd_scan(cfg, log) == kPass);
    const std::string csv = slurp(fs::path(*ov.output) / "verdict.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1);
}

TEST_CASE("schrodinger refuses a sign-definite potential") {
    const std::string text = R"({
  "omega": {"periodic": [1], "depth": 30},
  "potential": {"terms": [{"m1": 0, "m2": 0, "c": "2"}, {"m1": 0, "m2": 1, "c": "1"}]}
})";
    Overrides ov;
    ov.output = scratch("definite").string();
    const RunConfig cfg = parse_config(text, "p", ov);
    std::ostringstream log;
    CHECK(guarded(log, [&] { return cmd_schrodinger(cfg, log); }) == kPipelineError);
    CHECK(log.str().find("one sign") != std::string::npos);
}
