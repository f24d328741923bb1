#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cocycle/analysis.hpp"
#include "cocycle/torus.hpp"

namespace cocycle {

// JSON pointer -> 1-based line of the value, for error messages
std::map<std::string, int> locate_lines(const std::string& text);

struct OmegaConfig {
    enum class Kind { Quotients, Decimal, Builder } kind = Kind::Quotients;
    std::vector<std::int64_t> quotients;
    std::string decimal;
    std::size_t depth = 40;
    ConditionAConstants builder;
    SpacingPolicy spacing;
};

struct PotentialConfig {
    std::vector<TorusTerm> terms;
    std::size_t x_grid = 32;
    std::size_t max_degree = 4;
    bool chain = false;
};

struct RunConfig {
    nlohmann::json raw;
    std::string source;
    std::string hash;   // sha-256 of the canonical config plus overrides

    OmegaConfig omega;
    std::optional<ConditionAConstants> condition_A;
    std::optional<PhaseFamily> phases;
    std::optional<PotentialConfig> potential;

    std::vector<double> eps_grid;
    double eps0 = 1.0;
    int precision_bits = 128;
    Backend backend = Backend::Double;
    std::vector<std::int64_t> schedule;
    std::size_t grid_size = 16;
    UHThresholds thresholds;
    double slack = 0.9;
    double witness_ratio = 0.5;
    std::size_t max_level = 2;
    std::size_t samples = 1000;
    std::size_t exclusion_grid = 200;
    std::uint64_t seed = 1;
    std::string mode = "theorem3";
    std::string output = "out";

    RotationNumber build_omega() const;
    // constants for the recurrence check: explicit block, else the builder's
    std::optional<ConditionAConstants> condition_constants() const;
    void rehash();
};

struct Overrides {
    std::optional<int> precision_bits;
    std::optional<std::size_t> max_level;
    std::optional<std::string> mode;
    std::optional<std::string> output;
};

// precision: config < COCYCLE_PRECISION_BITS < --precision
RunConfig parse_config(const std::string& text, const std::string& source, const Overrides& o = {});
RunConfig load_config(const std::string& path, const Overrides& o = {});

}  // namespace cocycle
