// jdcompact: price options and run the verification experiments.
//
//   jdcompact price      --model kou --side call --N 512
//   jdcompact converge   --config run.json --out results
//   jdcompact stability | wavenumber | efficiency

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include "jdcompact/commands.hpp"

namespace {

using namespace jdcompact;

struct Overrides {
    std::string config;
    std::optional<std::string> model, side, smoothing, scheme, out;
    std::vector<int> N;
    std::optional<double> L, rho;
};

RunConfig resolve(const Overrides& o) {
    RunConfig cfg = o.config.empty() ? RunConfig{} : load_config(o.config);
    if (o.model) {
        if (*o.model != "merton" && *o.model != "kou") throw ConfigError("--model must be merton or kou");
        cfg.model.type = *o.model;
    }
    if (o.side) cfg.contract.side = parse_side(*o.side);
    if (o.smoothing) {
        if (*o.smoothing != "on" && *o.smoothing != "off") throw ConfigError("--smoothing must be on or off");
        cfg.options.smoothing = *o.smoothing == "on";
    }
    if (o.scheme) cfg.options.scheme = parse_scheme(*o.scheme);
    if (o.out) cfg.output_dir = *o.out;
    if (o.N.size() == 1) cfg.grid.intervals = o.N.front();
    if (o.N.size() > 1) cfg.grid.sequence = o.N;
    if (o.L) cfg.grid.half_width = *o.L;
    if (o.rho) cfg.grid.mesh_ratio = *o.rho;
    cfg.validate();
    return cfg;
}

void report_price(const RunConfig& cfg) {
    const auto out = cmd_price(cfg);
    std::printf("%s %s, N=%d, M=%d, %.2f inner iterations/step, %.3f s\n", describe(cfg.params()).c_str(),
                to_string(cfg.contract.side).c_str(), out.result.grid.intervals, out.result.grid.steps,
                out.result.average_iterations(), out.result.wall_seconds);
    for (const auto& r : out.rows)
        std::printf("  S=%-8g %.6f%s\n", r.spot, r.price,
                    r.reference ? (" (ref " + format_number(*r.reference) + ")").c_str() : "");
}

void report_converge(const RunConfig& cfg) {
    const auto rep = cmd_converge(cfg);
    for (const auto& r : rep.rows)
        std::printf("  N=%-6d l2=%.3e order=%s\n", r.intervals, r.l2_diff, format_optional(r.order).c_str());
}

void report_stability(const RunConfig& cfg) {
    const auto sweep = cmd_stability(cfg);
    std::printf("  %zu phases, max |p| - bound = %.3e\n", sweep.samples.size(), sweep.max_excess);
}

void report_wavenumber(const RunConfig& cfg) {
    const auto c = cmd_wavenumber(cfg);
    std::printf("  %zu phases written\n", c.theta.size());
}

void report_efficiency(const RunConfig& cfg) {
    const auto rep = cmd_efficiency(cfg);
    for (const auto& t : rep.reach) {
        if (t.intervals)
            std::printf("  %-7s reaches %.1e at N=%d in %.4f s\n", to_string(t.scheme).c_str(), t.target,
                        *t.intervals, *t.wall_seconds);
        else
            std::printf("  %-7s does not reach %.1e\n", to_string(t.scheme).c_str(), t.target);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Compact finite-difference pricer for jump-diffusion PIDEs"};
    app.require_subcommand(1);
    Overrides o;
    auto opt = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "JSON configuration file")->check(CLI::ExistingFile);
        sub->add_option("--model", o.model, "merton | kou");
        sub->add_option("--side", o.side, "call | put");
        sub->add_option("--N", o.N, "space intervals; several values set the refinement sequence");
        sub->add_option("--L", o.L, "half-width of the log-price domain");
        sub->add_option("--rho", o.rho, "mesh ratio dtau/dx^2");
        sub->add_option("--smoothing", o.smoothing, "on | off");
        sub->add_option("--scheme", o.scheme, "compact | fd2");
        sub->add_option("--out", o.out, "output directory");
    };
    struct Entry {
        const char* name;
        const char* help;
        void (*run)(const RunConfig&);
    };
    const Entry entries[] = {
        {"price", "price the option at the configured spots (prices.csv)", report_price},
        {"converge", "observed order on doubling grids (convergence.csv)", report_converge},
        {"stability", "amplification roots over a phase sweep (stability.csv)", report_stability},
        {"wavenumber", "modified wavenumber curves (wavenumber.csv)", report_wavenumber},
        {"efficiency", "compact vs second-order error and time (efficiency.csv)", report_efficiency},
    };
    for (const auto& e : entries) opt(app.add_subcommand(e.name, e.help));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        const RunConfig cfg = resolve(o);
        for (const auto& e : entries)
            if (app.got_subcommand(e.name)) e.run(cfg);
        return 0;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 2;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
