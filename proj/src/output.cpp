#include "rfsde/output.hpp"

#include "rfsde/errors.hpp"
#include "rfsde/fbm.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>

namespace rfsde::out {

using nlohmann::json;

std::string format_double(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
    return std::string(buf.data(), res.ptr);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(const std::vector<double>& values)
{
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_double(v));
    add_row(cells);
}

void CsvTable::add_row(const std::vector<std::string>& cells)
{
    if (cells.size() != header_.size()) throw Error("CSV row width does not match the header");
    rows_.push_back(cells);
}

std::string CsvTable::str() const
{
    std::string s;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) s += ',';
            s += cells[i];
        }
        s += '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return s;
}

std::string csv_path(const ReflectedPath& path)
{
    CsvTable t({"t", "X", "Y", "W", "l", "u"});
    for (Eigen::Index k = 0; k < path.X.size(); ++k)
        t.add_row(std::vector<double>{path.grid.t(static_cast<std::size_t>(k)), path.X[k], path.Y[k], path.W[k],
                                      path.lower[k], path.upper[k]});
    return t.str();
}

std::string csv_trend(const TrendSolution& sol)
{
    CsvTable t({"t", "x", "y", "tau", "regime"});
    for (Eigen::Index k = 0; k < sol.x.size(); ++k) {
        const auto kk = static_cast<std::size_t>(k);
        t.add_row(std::vector<std::string>{format_double(sol.grid.t(kk)), format_double(sol.x[k]),
                                           format_double(sol.y[k]), format_double(sol.tau[k]),
                                           regime_name(sol.regime[kk])});
    }
    return t.str();
}

std::string csv_risk_curve(const RiskReport& report)
{
    CsvTable t({"epsilon", "bandwidth", "risk", "risk_se", "pointwise_sup_risk", "eps_over_h_pow", "h_over_dt",
                "ms_alpha", "ms_beta", "ms_gamma", "ms_zeta", "ms_eta"});
    for (const auto& p : report.points)
        t.add_row(std::vector<double>{p.epsilon, p.bandwidth, p.sup_risk.mean, p.sup_risk.standard_error,
                                      p.pointwise_sup_risk, p.bandwidth_ratio, p.h_over_dt, p.component_ms[0],
                                      p.component_ms[1], p.component_ms[2], p.component_ms[3],
                                      p.component_ms[4]});
    return t.str();
}

std::string csv_state_scaling(const StateScalingReport& report)
{
    CsvTable t({"epsilon", "state_risk", "state_se", "reflection_risk", "reflection_se"});
    for (std::size_t i = 0; i < report.epsilons.size(); ++i)
        t.add_row(std::vector<double>{report.epsilons[i], report.state[i].mean, report.state[i].standard_error,
                                      report.reflection[i].mean, report.reflection[i].standard_error});
    return t.str();
}

json to_json(const SlopeFit& fit)
{
    return json{{"slope", fit.slope},   {"intercept", fit.intercept}, {"slope_se", fit.slope_se},
                {"ci95_low", fit.ci_low}, {"ci95_high", fit.ci_high},   {"points", fit.points}};
}

json to_json(const ErrorDecomposition& d)
{
    return json{{"t", d.t},       {"alpha", d.alpha}, {"beta", d.beta}, {"gamma", d.gamma},
                {"zeta", d.zeta}, {"eta", d.eta},     {"sum", d.sum},   {"error", d.error}};
}

json to_json(const RiskReport& report)
{
    json pts = json::array();
    for (const auto& p : report.points)
        pts.push_back({{"epsilon", p.epsilon},
                       {"bandwidth", p.bandwidth},
                       {"risk", p.sup_risk.mean},
                       {"risk_se", p.sup_risk.standard_error},
                       {"pointwise_sup_risk", p.pointwise_sup_risk},
                       {"eps_over_h_pow", p.bandwidth_ratio},
                       {"h_over_dt", p.h_over_dt},
                       {"component_mean_squares",
                        {{"alpha", p.component_ms[0]},
                         {"beta", p.component_ms[1]},
                         {"gamma", p.component_ms[2]},
                         {"zeta", p.component_ms[3]},
                         {"eta", p.component_ms[4]}}}});
    json j{{"points", pts},
           {"target_slope", report.target_slope},
           {"decomposition_time", report.decomposition_time},
           {"eval_times", report.eval_times}};
    j["slope"] = report.slope_available ? to_json(report.slope) : json(nullptr);
    return j;
}

json to_json(const StateScalingReport& report)
{
    json pts = json::array();
    for (std::size_t i = 0; i < report.epsilons.size(); ++i)
        pts.push_back({{"epsilon", report.epsilons[i]},
                       {"state_risk", report.state[i].mean},
                       {"state_se", report.state[i].standard_error},
                       {"reflection_risk", report.reflection[i].mean},
                       {"reflection_se", report.reflection[i].standard_error}});
    json j{{"points", pts}, {"target_slope", report.target_slope}, {"state_slope", to_json(report.state_slope)}};
    j["reflection_slope"] = report.reflection_slope_available ? to_json(report.reflection_slope) : json(nullptr);
    return j;
}

json to_json(const AsymptoticReport& report)
{
    json pts = json::array();
    for (const auto& p : report.points)
        pts.push_back({{"epsilon", p.epsilon},
                       {"bandwidth", p.bandwidth},
                       {"h_over_dt", p.h_over_dt},
                       {"scaled_variance", p.scaled_variance},
                       {"variance_ratio", p.variance_ratio},
                       {"scaled_bias_mean", p.scaled_bias.mean},
                       {"scaled_bias_se", p.scaled_bias.standard_error},
                       {"gamma_dot_sample_variance", p.gamma_dot_sample_variance},
                       {"ks_statistic", p.ks.statistic},
                       {"ks_p_value", p.ks.p_value}});
    return json{{"t", report.t},
                {"sigma2_HK", report.sigma2},
                {"kernel_first_moment", report.first_moment},
                {"ydot_t", report.ydot_t},
                {"ydot_0", report.ydot_0},
                {"mu", report.mu},
                {"extrapolated_mu", report.extrapolated_mu},
                {"mu_relative_error", report.mu_relative_error},
                {"bias_extrapolation", to_json(report.bias_extrapolation)},
                {"worst_variance_ratio_error", report.worst_variance_ratio_error},
                {"min_ks_p_value", report.min_ks_p_value},
                {"points", pts}};
}

std::string svg_risk_curve(const RiskReport& report)
{
    std::vector<std::pair<double, double>> pts;
    for (const auto& p : report.points)
        if (p.epsilon > 0.0 && p.sup_risk.mean > 0.0)
            pts.emplace_back(std::log10(p.epsilon), std::log10(p.sup_risk.mean));

    constexpr double W = 480, H = 360, pad = 48;
    std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"360\">\n";
    s += "<rect width=\"480\" height=\"360\" fill=\"white\"/>\n";
    if (pts.size() < 2) return s + "</svg>\n";

    double x0 = pts.front().first, x1 = x0, y0 = pts.front().second, y1 = y0;
    for (const auto& [x, y] : pts) {
        x0 = std::min(x0, x);
        x1 = std::max(x1, x);
        y0 = std::min(y0, y);
        y1 = std::max(y1, y);
    }
    if (x1 == x0) x1 = x0 + 1;
    if (y1 == y0) y1 = y0 + 1;
    auto px = [&](double x) { return pad + (x - x0) / (x1 - x0) * (W - 2 * pad); };
    auto py = [&](double y) { return H - pad - (y - y0) / (y1 - y0) * (H - 2 * pad); };

    s += "<line x1=\"48\" y1=\"312\" x2=\"432\" y2=\"312\" stroke=\"black\"/>\n";
    s += "<line x1=\"48\" y1=\"48\" x2=\"48\" y2=\"312\" stroke=\"black\"/>\n";
    s += "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    for (const auto& [x, y] : pts) s += format_double(px(x)) + "," + format_double(py(y)) + " ";
    s += "\"/>\n";
    for (const auto& [x, y] : pts)
        s += "<circle cx=\"" + format_double(px(x)) + "\" cy=\"" + format_double(py(y)) +
             "\" r=\"3\" fill=\"steelblue\"/>\n";
    if (report.slope_available) {
        // Fitted line through the data (log10 scale keeps the slope).
        const double b = report.slope.intercept / std::log(10.0);
        auto fit = [&](double x) { return b + report.slope.slope * x; };
        s += "<line x1=\"" + format_double(px(x0)) + "\" y1=\"" + format_double(py(fit(x0))) + "\" x2=\"" +
             format_double(px(x1)) + "\" y2=\"" + format_double(py(fit(x1))) +
             "\" stroke=\"orange\" stroke-dasharray=\"4 3\"/>\n";
    }
    s += "<text x=\"240\" y=\"345\" text-anchor=\"middle\" font-size=\"12\">log10 eps</text>\n";
    s += "<text x=\"14\" y=\"180\" font-size=\"12\" transform=\"rotate(-90 14 180)\">log10 risk</text>\n";
    s += "<text x=\"240\" y=\"28\" text-anchor=\"middle\" font-size=\"13\">slope " +
         format_double(std::round(report.slope.slope * 1000) / 1000) + " (target " +
         format_double(std::round(report.target_slope * 1000) / 1000) + ")</text>\n";
    return s + "</svg>\n";
}

std::string sha256_hex(const std::string& bytes)
{
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
        throw Error("SHA-256 digest failed");
    static constexpr char hex[] = "0123456789abcdef";
    std::string s;
    for (unsigned int i = 0; i < len; ++i) {
        s += hex[md[i] >> 4];
        s += hex[md[i] & 0xF];
    }
    return s;
}

RunManifest::RunManifest(std::string command, std::string canonical_config, std::uint64_t seed)
{
    doc_["tool"] = "rfsde";
    doc_["tool_version"] = kToolVersion;
    doc_["command"] = std::move(command);
    doc_["config_sha256"] = sha256_hex(canonical_config);
    doc_["master_seed"] = seed;
    doc_["prng"] = std::string(kGeneratorName);
    doc_["timings_seconds"] = json::object();
    doc_["outputs"] = json::array();
}

void RunManifest::set_grid(double H, double T, std::size_t n) { doc_["grid"] = {{"H", H}, {"T", T}, {"n", n}}; }

void RunManifest::add_timing(const std::string& phase, double seconds) { doc_["timings_seconds"][phase] = seconds; }

void RunManifest::write_file(const std::filesystem::path& dir, const std::string& name, const std::string& content)
{
    std::filesystem::create_directories(dir);
    const auto path = dir / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write '" + path.string() + "'");
    f << content;
    if (!f) throw Error("failed writing '" + path.string() + "'");
    doc_["outputs"].push_back({{"file", name}, {"sha256", sha256_hex(content)}, {"bytes", content.size()}});
}

void RunManifest::write(const std::filesystem::path& dir) const
{
    std::filesystem::create_directories(dir);
    std::ofstream f(dir / "run_manifest.json", std::ios::binary);
    if (!f) throw Error("cannot write the run manifest in '" + dir.string() + "'");
    f << doc_.dump(2) << '\n';
}

} // namespace rfsde::out
