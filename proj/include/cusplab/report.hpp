#pragma once

// Report assembly: verdict bookkeeping, report.json, and plot-ready CSV
// series with a fixed column order and 17-significant-digit floats.

#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cusplab/config.hpp"

namespace cusplab {

inline constexpr const char* kToolVersion = "0.1.0";

/// One named outcome; every verdict carries the tolerance that produced it.
struct Verdict {
    std::string name;
    bool pass = false;
    double tolerance = 0.0;
    std::string detail;
};

/// 17 significant digits: round-trips any double.
inline std::string format_float(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

struct CsvSeries {
    std::string filename;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row) {
        require(row.size() == columns.size(), "csv: row width mismatch");
        rows.push_back(std::move(row));
    }
};

struct Report {
    Json config_echo;
    Json results = Json::object();
    std::vector<Verdict> verdicts;
    std::vector<CsvSeries> series;

    void add_verdict(const std::string& name, bool pass, double tol, const std::string& detail) {
        verdicts.push_back({name, pass, tol, detail});
    }

    bool all_pass() const {
        for (const auto& v : verdicts)
            if (!v.pass) return false;
        return true;
    }

    Json to_json(bool with_timestamp = true) const {
        Json j;
        j["tool_version"] = kToolVersion;
        if (with_timestamp) {
            std::time_t now = std::time(nullptr);
            char buf[32];
            std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
            j["timestamp"] = buf;
        }
        j["config_echo"] = config_echo;
        j["results"] = results;
        j["verdicts"] = Json::array();
        for (const auto& v : verdicts) {
            Json vj;
            vj["name"] = v.name;
            vj["pass"] = v.pass;
            vj["tolerance"] = v.tolerance;
            vj["detail"] = v.detail;
            j["verdicts"].push_back(vj);
        }
        return j;
    }

    /// report.json plus one CSV per series; returns the report path.
    std::string write(const std::string& dir) const {
        namespace fs = std::filesystem;
        fs::create_directories(dir);
        std::string path = (fs::path(dir) / "report.json").string();
        {
            std::ofstream out(path);
            require(out.good(), "report: cannot write " + path);
            out << to_json().dump(2) << "\n";
        }
        for (const auto& s : series) {
            std::ofstream out((fs::path(dir) / s.filename).string());
            require(out.good(), "report: cannot write " + s.filename);
            for (size_t i = 0; i < s.columns.size(); ++i)
                out << (i ? "," : "") << s.columns[i];
            out << "\n";
            for (const auto& row : s.rows) {
                for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
                out << "\n";
            }
        }
        return path;
    }
};

}  // namespace cusplab
