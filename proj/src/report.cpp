#include "cocycle/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>

#include <openssl/evp.h>

#include "cocycle/errors.hpp"

namespace cocycle {

std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 15]);
    }
    return out;
}

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::string csv_escape(const std::string& cell) {
    if (cell.find_first_of(",\"\r\n") == std::string::npos) return cell;
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void CsvTable::row(std::vector<std::string> cells) {
    if (cells.size() != header_.size()) throw Error("CsvTable: row width does not match header");
    rows_.push_back(std::move(cells));
}

void CsvTable::write(const OutputContext& ctx, const std::string& name) const {
    std::filesystem::create_directories(ctx.dir);
    std::ofstream out(ctx.dir / name, std::ios::binary);
    if (!out) throw Error("cannot write " + (ctx.dir / name).string());
    auto line = [&](const std::vector<std::string>& cells, const std::string& h, const std::string& p) {
        for (const std::string& c : cells) out << csv_escape(c) << ',';
        out << csv_escape(h) << ',' << csv_escape(p) << "\r\n";
    };
    line(header_, "config_hash", "precision_bits");
    for (const auto& r : rows_) line(r, ctx.config_hash, std::to_string(ctx.precision_bits));
}

void write_json(const OutputContext& ctx, const std::string& name, nlohmann::json body) {
    std::filesystem::create_directories(ctx.dir);
    body["config_hash"] = ctx.config_hash;
    body["precision_bits"] = ctx.precision_bits;
    body["backend"] = ctx.backend;
    std::ofstream out(ctx.dir / name, std::ios::binary);
    if (!out) throw Error("cannot write " + (ctx.dir / name).string());
    out << body.dump(2) << '\n';
}

}  // namespace cocycle
