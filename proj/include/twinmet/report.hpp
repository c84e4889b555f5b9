#pragma once

#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

namespace twinmet {

/// One executed check: named residuals against named tolerances.
struct CheckResult {
    std::string name;
    std::string type;
    std::map<std::string, double> residuals;
    std::map<std::string, double> tolerances;
    bool pass = false;
    std::uint64_t plan_seed = 0;
    double wall_seconds = 0.0; // shown in the text rendering only; the
                               // structured document stays byte-stable
};

struct ReportDocument {
    std::string suite;
    std::uint64_t seed = 0;
    std::vector<CheckResult> checks;
    bool pass = true;

    std::string to_structured() const;
    std::string to_text() const;
};

namespace detail {

inline std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string json_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out;
}

} // namespace detail

/// Deterministic structured rendering: sorted keys, 17 significant digits,
/// LF line endings. Identical (config, seed) inputs give identical bytes.
inline std::string ReportDocument::to_structured() const {
    std::string o;
    o += "{\n";
    o += "  \"schema\": \"twinmet-report/1\",\n";
    o += "  \"suite\": \"" + detail::json_escape(suite) + "\",\n";
    o += "  \"seed\": " + std::to_string(seed) + ",\n";
    o += "  \"pass\": " + std::string(pass ? "true" : "false") + ",\n";
    o += "  \"checks\": [\n";
    for (std::size_t i = 0; i < checks.size(); ++i) {
        const auto& c = checks[i];
        o += "    {\n";
        o += "      \"name\": \"" + detail::json_escape(c.name) + "\",\n";
        o += "      \"type\": \"" + detail::json_escape(c.type) + "\",\n";
        o += "      \"pass\": " + std::string(c.pass ? "true" : "false") + ",\n";
        o += "      \"plan_seed\": " + std::to_string(c.plan_seed) + ",\n";
        o += "      \"residuals\": {";
        std::size_t k = 0;
        for (const auto& [key, val] : c.residuals) {
            o += (k++ ? ", " : "");
            o += "\"" + detail::json_escape(key) + "\": " + detail::fmt17(val);
        }
        o += "},\n";
        o += "      \"tolerances\": {";
        k = 0;
        for (const auto& [key, val] : c.tolerances) {
            o += (k++ ? ", " : "");
            o += "\"" + detail::json_escape(key) + "\": " + detail::fmt17(val);
        }
        o += "}\n";
        o += (i + 1 < checks.size()) ? "    },\n" : "    }\n";
    }
    o += "  ]\n";
    o += "}\n";
    return o;
}

inline std::string ReportDocument::to_text() const {
    std::string o;
    o += "suite: " + suite + "  (seed " + std::to_string(seed) + ")\n";
    for (const auto& c : checks) {
        o += std::string(c.pass ? "  pass  " : "  FAIL  ") + c.name + " [" + c.type + "]";
        char buf[64];
        std::snprintf(buf, sizeof(buf), "  (%.3f s)", c.wall_seconds);
        o += buf;
        o += "\n";
        for (const auto& [key, val] : c.residuals) {
            o += "          " + key + " = " + detail::fmt17(val);
            auto it = c.tolerances.find(key);
            if (it != c.tolerances.end()) o += "   vs " + detail::fmt17(it->second);
            o += "\n";
        }
    }
    o += pass ? "overall: pass\n" : "overall: FAIL\n";
    return o;
}

} // namespace twinmet
