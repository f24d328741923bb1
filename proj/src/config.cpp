#include "cocycle/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "cocycle/report.hpp"

namespace cocycle {

using nlohmann::json;

namespace {

// Minimal JSON walk that only records where each value starts.
class LineScanner {
public:
    LineScanner(const std::string& s, std::map<std::string, int>& out) : s_(s), out_(out) {}

    void run() {
        ws();
        if (i_ < s_.size()) value("");
    }

private:
    const std::string& s_;
    std::map<std::string, int>& out_;
    std::size_t i_ = 0;
    int line_ = 1;

    void advance() {
        if (s_[i_] == '\n') ++line_;
        ++i_;
    }
    void ws() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) advance();
    }
    std::string string_token() {
        std::string v;
        advance();  // opening quote
        while (i_ < s_.size() && s_[i_] != '"') {
            if (s_[i_] == '\\' && i_ + 1 < s_.size()) {
                advance();
                v.push_back(s_[i_] == 'n' ? '\n' : s_[i_]);
            } else {
                v.push_back(s_[i_]);
            }
            advance();
        }
        if (i_ < s_.size()) advance();
        return v;
    }
    static std::string escape(const std::string& key) {
        std::string out;
        for (char c : key) {
            if (c == '~')
                out += "~0";
            else if (c == '/')
                out += "~1";
            else
                out.push_back(c);
        }
        return out;
    }
    void value(const std::string& ptr) {
        ws();
        if (i_ >= s_.size()) return;
        out_.emplace(ptr, line_);
        const char c = s_[i_];
        if (c == '{') {
            advance();
            ws();
            while (i_ < s_.size() && s_[i_] != '}') {
                if (s_[i_] != '"') return;
                const std::string key = string_token();
                ws();
                if (i_ < s_.size() && s_[i_] == ':') advance();
                value(ptr + "/" + escape(key));
                ws();
                if (i_ < s_.size() && s_[i_] == ',') advance();
                ws();
            }
            if (i_ < s_.size()) advance();
        } else if (c == '[') {
            advance();
            ws();
            std::size_t idx = 0;
            while (i_ < s_.size() && s_[i_] != ']') {
                value(ptr + "/" + std::to_string(idx++));
                ws();
                if (i_ < s_.size() && s_[i_] == ',') advance();
                ws();
            }
            if (i_ < s_.size()) advance();
        } else if (c == '"') {
            string_token();
        } else {
            while (i_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[i_])) && s_[i_] != ',' &&
                   s_[i_] != '}' && s_[i_] != ']')
                advance();
        }
    }
};

class Reader {
public:
    Reader(const json& root, const std::string& text, std::string source)
        : root_(root), lines_(locate_lines(text)), source_(std::move(source)) {}

    [[noreturn]] void fail(const std::string& ptr, const std::string& msg) const {
        std::string p = ptr;
        int line = 0;
        for (;;) {
            auto it = lines_.find(p);
            if (it != lines_.end()) {
                line = it->second;
                break;
            }
            if (p.empty()) break;
            p = p.substr(0, p.rfind('/'));
        }
        throw ConfigError(source_ + ":" + std::to_string(line) + ": " + (ptr.empty() ? "/" : ptr) + ": " + msg);
    }

    void reject_floats(const json& j, const std::string& ptr) const {
        if (j.is_number_float())
            fail(ptr, "raw floating-point number; write reals as decimal strings, e.g. \"0.1\"");
        if (j.is_object())
            for (auto it = j.begin(); it != j.end(); ++it) reject_floats(*it, ptr + "/" + it.key());
        if (j.is_array())
            for (std::size_t i = 0; i < j.size(); ++i) reject_floats(j[i], ptr + "/" + std::to_string(i));
    }

    void only_keys(const json& j, const std::string& ptr, const std::set<std::string>& keys) const {
        if (!j.is_object()) fail(ptr, "expected an object");
        for (auto it = j.begin(); it != j.end(); ++it)
            if (!keys.count(it.key())) fail(ptr + "/" + it.key(), "unknown field");
    }

    double real(const json& j, const std::string& ptr) const {
        if (j.is_number_integer() || j.is_number_unsigned()) return j.get<double>();
        if (!j.is_string()) fail(ptr, "expected a decimal string");
        const std::string s = j.get<std::string>();
        std::size_t used = 0;
        double v = 0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            fail(ptr, "not a decimal number: '" + s + "'");
        }
        if (used != s.size() || !std::isfinite(v)) fail(ptr, "not a finite decimal number: '" + s + "'");
        return v;
    }

    std::int64_t integer(const json& j, const std::string& ptr, std::int64_t min = 0) const {
        if (!(j.is_number_integer() || j.is_number_unsigned())) fail(ptr, "expected an integer");
        const auto v = j.get<std::int64_t>();
        if (v < min) fail(ptr, "must be at least " + std::to_string(min));
        return v;
    }

    std::string text(const json& j, const std::string& ptr) const {
        if (!j.is_string()) fail(ptr, "expected a string");
        return j.get<std::string>();
    }

    bool boolean(const json& j, const std::string& ptr) const {
        if (!j.is_boolean()) fail(ptr, "expected true or false");
        return j.get<bool>();
    }

    std::vector<std::int64_t> quotient_list(const json& j, const std::string& ptr) const {
        std::vector<std::int64_t> q;
        if (j.is_string()) {
            try {
                q = quotients_from_text(j.get<std::string>());
            } catch (const ConfigError& e) {
                fail(ptr, e.what());
            }
        } else if (j.is_array()) {
            for (std::size_t i = 0; i < j.size(); ++i) q.push_back(integer(j[i], ptr + "/" + std::to_string(i), 1));
        } else {
            fail(ptr, "expected a list of positive integers");
        }
        if (q.empty()) fail(ptr, "empty quotient list");
        return q;
    }

    TrigPoly trig(const json& j, const std::string& ptr) const {
        if (j.is_string() || j.is_number_integer()) return TrigPoly::constant(real(j, ptr));
        only_keys(j, ptr, {"a0", "cos", "sin"});
        TrigPoly f;
        if (j.contains("a0")) f.a0 = real(j["a0"], ptr + "/a0");
        for (const char* key : {"cos", "sin"}) {
            if (!j.contains(key)) continue;
            const std::string p = ptr + "/" + key;
            if (!j[key].is_array()) fail(p, "expected a list of decimal strings");
            auto& dst = std::string(key) == "cos" ? f.cos_coef : f.sin_coef;
            for (std::size_t i = 0; i < j[key].size(); ++i) dst.push_back(real(j[key][i], p + "/" + std::to_string(i)));
        }
        return f;
    }

    ConditionAConstants constants(const json& j, const std::string& ptr, const std::set<std::string>& extra) const {
        std::set<std::string> keys{"gamma", "C_omega", "C_eps", "C_delta"};
        keys.insert(extra.begin(), extra.end());
        only_keys(j, ptr, keys);
        ConditionAConstants c;
        for (const char* k : {"gamma", "C_omega", "C_eps", "C_delta"})
            if (!j.contains(k)) fail(ptr, std::string("missing field '") + k + "'");
        c.gamma = real(j["gamma"], ptr + "/gamma");
        c.C_omega = real(j["C_omega"], ptr + "/C_omega");
        c.C_eps = real(j["C_eps"], ptr + "/C_eps");
        c.C_delta = real(j["C_delta"], ptr + "/C_delta");
        if (!(c.gamma > 0 && c.C_omega > 0 && c.C_eps > 0 && c.C_delta > 0 && c.C_delta < 1))
            fail(ptr, "constants must be positive with C_delta < 1");
        return c;
    }

    const json& root() const { return root_; }

private:
    const json& root_;
    std::map<std::string, int> lines_;
    std::string source_;
};

}  // namespace

std::map<std::string, int> locate_lines(const std::string& text) {
    std::map<std::string, int> out;
    LineScanner(text, out).run();
    return out;
}

RotationNumber RunConfig::build_omega() const {
    switch (omega.kind) {
        case OmegaConfig::Kind::Decimal:
            return cf_expand(parse_decimal(omega.decimal, precision_bits), omega.depth, precision_bits);
        case OmegaConfig::Kind::Builder:
            return build_condition_A_omega(omega.builder, omega.spacing, omega.depth, precision_bits);
        default: return omega_from_quotients(omega.quotients, precision_bits);
    }
}

std::optional<ConditionAConstants> RunConfig::condition_constants() const {
    if (condition_A) return condition_A;
    if (omega.kind == OmegaConfig::Kind::Builder) return omega.builder;
    return std::nullopt;
}

void RunConfig::rehash() {
    std::ostringstream canon;
    canon << raw.dump() << "|precision_bits=" << precision_bits << "|max_level=" << max_level << "|mode=" << mode;
    hash = sha256_hex(canon.str());
}

RunConfig parse_config(const std::string& text, const std::string& source, const Overrides& ov) {
    RunConfig cfg;
    cfg.source = source;
    try {
        cfg.raw = json::parse(text);
    } catch (const json::parse_error& e) {
        const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
        throw ConfigError(source + ":" + std::to_string(line) + ": malformed JSON (" + e.what() + ")");
    }
    const Reader rd(cfg.raw, text, source);
    const json& j = cfg.raw;
    rd.reject_floats(j, "");
    rd.only_keys(j, "", {"omega", "condition_A", "phases", "potential", "epsilon", "eps0", "precision_bits",
                         "backend", "schedule", "grid_size", "thresholds", "max_level", "samples", "exclusion_grid",
                         "seed", "mode", "output"});

    if (j.contains("precision_bits")) cfg.precision_bits = static_cast<int>(rd.integer(j["precision_bits"], "/precision_bits", 53));
    if (const char* env = std::getenv("COCYCLE_PRECISION_BITS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 53) throw ConfigError("COCYCLE_PRECISION_BITS must be an integer >= 53");
        cfg.precision_bits = static_cast<int>(v);
    }
    if (ov.precision_bits) {
        if (*ov.precision_bits < 53) throw ConfigError("--precision must be at least 53");
        cfg.precision_bits = *ov.precision_bits;
    }

    if (!j.contains("omega")) rd.fail("", "missing field 'omega'");
    {
        const json& o = j["omega"];
        rd.only_keys(o, "/omega", {"quotients", "periodic", "decimal", "depth", "builder"});
        const int given = int(o.contains("quotients")) + int(o.contains("periodic")) + int(o.contains("decimal")) +
                          int(o.contains("builder"));
        if (given != 1) rd.fail("/omega", "give exactly one of quotients, periodic, decimal, builder");
        if (o.contains("depth")) cfg.omega.depth = static_cast<std::size_t>(rd.integer(o["depth"], "/omega/depth", 1));
        if (o.contains("quotients")) {
            cfg.omega.kind = OmegaConfig::Kind::Quotients;
            cfg.omega.quotients = rd.quotient_list(o["quotients"], "/omega/quotients");
        } else if (o.contains("periodic")) {
            cfg.omega.kind = OmegaConfig::Kind::Quotients;
            const auto period = rd.quotient_list(o["periodic"], "/omega/periodic");
            for (std::size_t i = 0; i < cfg.omega.depth; ++i) cfg.omega.quotients.push_back(period[i % period.size()]);
        } else if (o.contains("decimal")) {
            cfg.omega.kind = OmegaConfig::Kind::Decimal;
            cfg.omega.decimal = rd.text(o["decimal"], "/omega/decimal");
        } else {
            cfg.omega.kind = OmegaConfig::Kind::Builder;
            const json& b = o["builder"];
            cfg.omega.builder = rd.constants(b, "/omega/builder", {"stride", "filler", "leading", "depth"});
            if (b.contains("stride")) cfg.omega.spacing.stride = static_cast<std::size_t>(rd.integer(b["stride"], "/omega/builder/stride", 1));
            if (b.contains("filler")) cfg.omega.spacing.filler = rd.integer(b["filler"], "/omega/builder/filler", 1);
            if (b.contains("leading")) cfg.omega.spacing.leading = rd.quotient_list(b["leading"], "/omega/builder/leading");
            if (b.contains("depth")) cfg.omega.depth = static_cast<std::size_t>(rd.integer(b["depth"], "/omega/builder/depth", 1));
        }
    }
    if (j.contains("condition_A")) cfg.condition_A = rd.constants(j["condition_A"], "/condition_A", {});

    const bool has_phases = j.contains("phases"), has_potential = j.contains("potential");
    if (has_phases && has_potential) rd.fail("", "give either 'phases' or 'potential', not both");
    if (has_phases) {
        const json& p = j["phases"];
        if (!p.is_array() || p.empty()) rd.fail("/phases", "expected a non-empty list of {phi, lambda}");
        std::vector<PhaseEntry> entries;
        for (std::size_t i = 0; i < p.size(); ++i) {
            const std::string ptr = "/phases/" + std::to_string(i);
            rd.only_keys(p[i], ptr, {"phi", "lambda"});
            if (!p[i].contains("phi") || !p[i].contains("lambda")) rd.fail(ptr, "needs both 'phi' and 'lambda'");
            entries.push_back({rd.trig(p[i]["phi"], ptr + "/phi"), rd.trig(p[i]["lambda"], ptr + "/lambda")});
        }
        try {
            cfg.phases = PhaseFamily(std::move(entries));
        } catch (const DomainError& e) {
            rd.fail("/phases", e.what());
        }
    }
    if (has_potential) {
        const json& p = j["potential"];
        rd.only_keys(p, "/potential", {"terms", "x_grid", "max_degree", "chain"});
        PotentialConfig pc;
        if (!p.contains("terms") || !p["terms"].is_array() || p["terms"].empty())
            rd.fail("/potential", "expected a non-empty 'terms' list");
        for (std::size_t i = 0; i < p["terms"].size(); ++i) {
            const std::string ptr = "/potential/terms/" + std::to_string(i);
            const json& t = p["terms"][i];
            rd.only_keys(t, ptr, {"m1", "m2", "c", "s"});
            TorusTerm term;
            if (t.contains("m1")) term.m1 = static_cast<int>(rd.integer(t["m1"], ptr + "/m1", -1000000));
            if (t.contains("m2")) term.m2 = static_cast<int>(rd.integer(t["m2"], ptr + "/m2", -1000000));
            if (t.contains("c")) term.c = rd.real(t["c"], ptr + "/c");
            if (t.contains("s")) term.s = rd.real(t["s"], ptr + "/s");
            pc.terms.push_back(term);
        }
        if (p.contains("x_grid")) pc.x_grid = static_cast<std::size_t>(rd.integer(p["x_grid"], "/potential/x_grid", 1));
        if (p.contains("max_degree")) pc.max_degree = static_cast<std::size_t>(rd.integer(p["max_degree"], "/potential/max_degree", 0));
        if (p.contains("chain")) pc.chain = rd.boolean(p["chain"], "/potential/chain");
        cfg.potential = pc;
    }
    if (!has_phases && !has_potential) rd.fail("", "give one of 'phases' or 'potential'");

    if (j.contains("eps0")) cfg.eps0 = rd.real(j["eps0"], "/eps0");
    if (!(cfg.eps0 > 0)) rd.fail("/eps0", "must be positive");
    if (j.contains("epsilon")) {
        const json& e = j["epsilon"];
        rd.only_keys(e, "/epsilon", {"from", "to", "count", "values"});
        if (e.contains("values")) {
            if (!e["values"].is_array()) rd.fail("/epsilon/values", "expected a list of decimal strings");
            for (std::size_t i = 0; i < e["values"].size(); ++i)
                cfg.eps_grid.push_back(rd.real(e["values"][i], "/epsilon/values/" + std::to_string(i)));
        } else {
            if (!e.contains("from") || !e.contains("to") || !e.contains("count"))
                rd.fail("/epsilon", "needs 'values' or all of 'from', 'to', 'count'");
            const double lo = rd.real(e["from"], "/epsilon/from"), hi = rd.real(e["to"], "/epsilon/to");
            const auto n = static_cast<std::size_t>(rd.integer(e["count"], "/epsilon/count", 0));
            if (!(hi >= lo)) rd.fail("/epsilon/to", "must not be below 'from'");
            for (std::size_t i = 0; i < n; ++i)
                cfg.eps_grid.push_back(n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
        }
        for (double eps : cfg.eps_grid)
            if (!(eps > 0 && eps < cfg.eps0)) rd.fail("/epsilon", "every epsilon must lie in (0, eps0)");
    }
    if (j.contains("backend")) {
        try {
            cfg.backend = parse_backend(rd.text(j["backend"], "/backend"));
        } catch (const ConfigError& e) {
            rd.fail("/backend", e.what());
        }
    }
    if (j.contains("schedule")) {
        if (!j["schedule"].is_array()) rd.fail("/schedule", "expected a list of step counts");
        for (std::size_t i = 0; i < j["schedule"].size(); ++i)
            cfg.schedule.push_back(rd.integer(j["schedule"][i], "/schedule/" + std::to_string(i), 1));
    }
    if (j.contains("grid_size")) cfg.grid_size = static_cast<std::size_t>(rd.integer(j["grid_size"], "/grid_size", 1));
    if (j.contains("thresholds")) {
        const json& t = j["thresholds"];
        rd.only_keys(t, "/thresholds", {"growth", "jump", "margin", "slack", "witness_ratio"});
        if (t.contains("growth")) cfg.thresholds.growth = rd.real(t["growth"], "/thresholds/growth");
        if (t.contains("jump")) cfg.thresholds.jump = rd.real(t["jump"], "/thresholds/jump");
        if (t.contains("margin")) cfg.thresholds.margin = rd.real(t["margin"], "/thresholds/margin");
        if (t.contains("slack")) cfg.slack = rd.real(t["slack"], "/thresholds/slack");
        if (t.contains("witness_ratio")) cfg.witness_ratio = rd.real(t["witness_ratio"], "/thresholds/witness_ratio");
    }
    if (j.contains("max_level")) cfg.max_level = static_cast<std::size_t>(rd.integer(j["max_level"], "/max_level", 0));
    if (ov.max_level) cfg.max_level = *ov.max_level;
    if (j.contains("samples")) cfg.samples = static_cast<std::size_t>(rd.integer(j["samples"], "/samples", 1));
    if (j.contains("exclusion_grid"))
        cfg.exclusion_grid = static_cast<std::size_t>(rd.integer(j["exclusion_grid"], "/exclusion_grid", 2));
    if (j.contains("seed")) cfg.seed = static_cast<std::uint64_t>(rd.integer(j["seed"], "/seed", 0));
    if (j.contains("mode")) cfg.mode = rd.text(j["mode"], "/mode");
    if (ov.mode) cfg.mode = *ov.mode;
    if (cfg.mode != "theorem3" && cfg.mode != "theorem4")
        rd.fail("/mode", "mode must be theorem3 or theorem4");
    if (j.contains("output")) cfg.output = rd.text(j["output"], "/output");
    if (ov.output) cfg.output = *ov.output;
    cfg.rehash();
    return cfg;
}

RunConfig load_config(const std::string& path, const Overrides& o) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open config");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path, o);
}

}  // namespace cocycle
