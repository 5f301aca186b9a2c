#pragma once

// Subcommand bodies for the jdcompact driver. Each writes one CSV into the
// configured output directory and returns the rows it wrote.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "jdcompact/analysis.hpp"
#include "jdcompact/config.hpp"
#include "jdcompact/errors.hpp"
#include "jdcompact/model.hpp"
#include "jdcompact/solver.hpp"

namespace jdcompact {

inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string format_optional(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::string& header) : path_(path) {
        if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
        out_.open(path, std::ios::binary | std::ios::trunc);
        if (!out_) throw std::runtime_error("cannot write " + path.string());
        out_ << header << '\n';
    }

    template <class... Cells>
    void row(const Cells&... cells) {
        bool first = true;
        ((out_ << (first ? "" : ",") << cell(cells), first = false), ...);
        out_ << '\n';
    }

    const std::filesystem::path& path() const { return path_; }

private:
    static std::string cell(double v) { return format_number(v); }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(const std::string& v) { return v; }
    static std::string cell(const char* v) { return v; }
    static std::string cell(const std::optional<double>& v) { return format_optional(v); }

    std::filesystem::path path_;
    std::ofstream out_;
};

// ---------------------------------------------------------------------------
// Reference values for the double-exponential example: sigma 0.15, r 0.05,
// lambda 0.1, up rate 3.0465, down rate 3.0775, up probability 0.3445,
// K = 100, T = 0.25.

inline std::optional<double> kou_reference(const ModelParams& params, const Contract& c, double spot) {
    const auto* k = std::get_if<KouJumps>(&params.jumps());
    if (k == nullptr) return std::nullopt;
    const KouJumps d{};
    const bool table = params.volatility() == 0.15 && params.rate() == 0.05 && params.intensity() == 0.10 &&
                       k->up_rate == d.up_rate && k->down_rate == d.down_rate &&
                       k->up_probability == d.up_probability && c.strike == 100.0 && c.spot_anchor == 100.0 &&
                       c.maturity == 0.25;
    if (!table) return std::nullopt;
    static constexpr double spots[] = {90.0, 100.0, 110.0};
    static constexpr double puts[] = {9.430457, 2.731259, 0.552363};
    static constexpr double calls[] = {0.672677, 3.973479, 11.794583};
    for (int i = 0; i < 3; ++i)
        if (spot == spots[i]) return c.side == OptionSide::Put ? puts[i] : calls[i];
    return std::nullopt;
}

/// Analytic series for Merton, literature table for Kou, nothing otherwise.
inline std::optional<double> reference_price(const ModelParams& params, const Contract& c, double spot) {
    if (params.is_merton()) return merton_series_price(c, params, spot);
    return kou_reference(params, c, spot);
}

struct PriceRow {
    double spot;
    double price;
    std::optional<double> reference;
    std::optional<double> abs_diff;
};

struct PriceOutput {
    std::vector<PriceRow> rows;
    SolveResult result;
};

inline std::filesystem::path output_path(const RunConfig& cfg, const char* name) {
    return std::filesystem::path(cfg.output_dir) / name;
}

inline PriceOutput cmd_price(const RunConfig& cfg) {
    cfg.validate();
    const auto params = cfg.params();
    PriceOutput out{{}, solve(params, cfg.contract, cfg.grid_spec(), cfg.options)};
    CsvWriter csv(output_path(cfg, "prices.csv"),
                  "spot[currency],price[currency],reference[currency],abs_diff[currency]");
    for (double s : cfg.spots) {
        PriceRow row{s, price_at(out.result, cfg.contract, s), reference_price(params, cfg.contract, s), {}};
        if (row.reference) row.abs_diff = std::abs(row.price - *row.reference);
        csv.row(row.spot, row.price, row.reference, row.abs_diff);
        out.rows.push_back(row);
    }
    return out;
}

inline ConvergenceReport cmd_converge(const RunConfig& cfg) {
    cfg.validate();
    auto report = estimate_order(cfg.params(), cfg.contract, cfg.grid.sequence, cfg.grid.mesh_ratio,
                                 cfg.grid.half_width, cfg.options);
    CsvWriter csv(output_path(cfg, "convergence.csv"),
                  "N[intervals],dx[log-price],dtau[years],l2_diff[currency],order[1]");
    for (const auto& r : report.rows) csv.row(r.intervals, r.dx, r.dtau, r.l2_diff, r.order);
    return report;
}

/// Stability grid: configured N and L, dtau from the config or the step limit.
inline GridSpec stability_grid(const RunConfig& cfg) {
    const auto params = cfg.params();
    const double dt = cfg.stability.dtau.value_or(stable_step_limit(params));
    if (!std::isfinite(dt)) throw ConfigError("stability.dtau is required when lambda = r = 0");
    return {cfg.grid.half_width, cfg.grid.intervals, 2, 2.0 * dt};
}

inline StabilitySweep cmd_stability(const RunConfig& cfg) {
    cfg.validate();
    const auto params = cfg.params();
    auto sweep = stability_sweep(params, stability_grid(cfg), cfg.stability.points);
    CsvWriter csv(output_path(cfg, "stability.csv"), "theta[rad],abs_p1[1],abs_p2[1],bound[1]");
    for (const auto& s : sweep.samples) csv.row(s.theta, std::abs(s.p1), std::abs(s.p2), s.bound);
    if (!sweep.samples.empty()) csv.row("max_excess", sweep.max_excess, "", "");
    return sweep;
}

inline WavenumberCurve cmd_wavenumber(const RunConfig& cfg) {
    cfg.validate();
    auto curve = wavenumber_curves(wavenumber_grid(cfg.wavenumber.points));
    CsvWriter csv(output_path(cfg, "wavenumber.csv"),
                  "theta[rad],exact_first[1],fd_first[1],compact_first[1],"
                  "exact_second[1],fd_second[1],compact_second[1]");
    for (std::size_t i = 0; i < curve.theta.size(); ++i)
        csv.row(curve.theta[i], curve.exact_first[i], curve.fd_first[i], curve.compact_first[i],
                curve.exact_second[i], curve.fd_second[i], curve.compact_second[i]);
    return curve;
}

inline EfficiencyReport cmd_efficiency(const RunConfig& cfg) {
    cfg.validate();
    auto report = efficiency_comparison(cfg.params(), cfg.contract, cfg.efficiency.intervals,
                                        cfg.efficiency.targets, cfg.grid.mesh_ratio, cfg.grid.half_width,
                                        cfg.efficiency.window, cfg.efficiency.repeats, cfg.options);
    CsvWriter csv(output_path(cfg, "efficiency.csv"), "scheme,N[intervals],l2_error[currency],wall_clock[s]");
    for (const auto& r : report.rows) csv.row(to_string(r.scheme), r.intervals, r.error, r.wall_seconds);
    return report;
}

}  // namespace jdcompact
