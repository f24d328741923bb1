#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace cocycle {

std::string sha256_hex(const std::string& data);

// shortest round-trip decimal; "inf", "-inf", "nan" for the rest
std::string fmt(double v);

struct OutputContext {
    std::filesystem::path dir;
    std::string config_hash;
    int precision_bits = 0;
    std::string backend;
};

// RFC-4180 table; config_hash and precision_bits are appended to every row
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
    void row(std::vector<std::string> cells);
    std::size_t size() const { return rows_.size(); }
    void write(const OutputContext& ctx, const std::string& name) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

std::string csv_escape(const std::string& cell);

// adds config_hash, precision_bits, backend at top level
void write_json(const OutputContext& ctx, const std::string& name, nlohmann::json body);

}  // namespace cocycle
