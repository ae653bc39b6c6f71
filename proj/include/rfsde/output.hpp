#pragma once

// Result files: locale-independent CSV with 17 significant digits, JSON
// summaries, a run manifest with SHA-256 checksums, and optional SVG charts.

#include "rfsde/experiments.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace rfsde::out {

/// "%.17g"-style rendering via std::to_chars, independent of the C locale.
std::string format_double(double v);

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    void add_row(const std::vector<double>& values);
    void add_row(const std::vector<std::string>& cells);
    std::string str() const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

std::string csv_path(const ReflectedPath& path);
std::string csv_trend(const TrendSolution& sol);
std::string csv_risk_curve(const RiskReport& report);
std::string csv_state_scaling(const StateScalingReport& report);

nlohmann::json to_json(const SlopeFit& fit);
nlohmann::json to_json(const RiskReport& report);
nlohmann::json to_json(const StateScalingReport& report);
nlohmann::json to_json(const AsymptoticReport& report);
nlohmann::json to_json(const ErrorDecomposition& d);

/// Log-log line chart of a risk curve with the fitted and target slopes.
std::string svg_risk_curve(const RiskReport& report);

std::string sha256_hex(const std::string& bytes);

/// Collects written files and timings; `write` emits run_manifest.json.
class RunManifest {
public:
    RunManifest(std::string command, std::string canonical_config, std::uint64_t seed);

    void set_grid(double H, double T, std::size_t n);
    void add_timing(const std::string& phase, double seconds);
    /// Writes `content` to dir / name and records its checksum.
    void write_file(const std::filesystem::path& dir, const std::string& name, const std::string& content);
    void write(const std::filesystem::path& dir) const;
    const nlohmann::json& document() const { return doc_; }

private:
    nlohmann::json doc_;
};

inline constexpr const char* kToolVersion = "1.0.0";

} // namespace rfsde::out
