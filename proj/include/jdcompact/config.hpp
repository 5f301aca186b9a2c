#pragma once

// Run configuration for the command-line driver, stored as JSON.
//
//   {
//     "model":    {"type": "merton", "volatility": 0.15, "rate": 0.05, "intensity": 0.1,
//                  "merton": {"mean": -0.9, "stddev": 0.45},
//                  "kou": {"up_rate": 3.0465, "down_rate": 3.0775, "up_probability": 0.3445}},
//     "contract": {"side": "put", "strike": 100, "spot_anchor": 100, "maturity": 0.25},
//     "grid":     {"half_width": 2, "intervals": 1536, "sequence": [128, 256, 512, 1024],
//                  "mesh_ratio": 0.4},
//     "options":  {"smoothing": true, "epsilon": 1e-12, "max_iter": 100, "scheme": "compact"},
//     "spots": [90, 100, 110],
//     "output_dir": ".",
//     "stability":  {"dtau": null, "points": 1024},
//     "wavenumber": {"points": 256},
//     "efficiency": {"intervals": [32, 64, 128, 256, 512], "targets": [0.001],
//                    "window": 1, "repeats": 3}
//   }
//
// Every key is optional. Unknown keys are rejected so typos do not pass silently.

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "jdcompact/errors.hpp"
#include "jdcompact/model.hpp"
#include "jdcompact/operators.hpp"
#include "jdcompact/solver.hpp"

namespace jdcompact {

struct ModelConfig {
    std::string type = "merton";
    double volatility = 0.15;
    double rate = 0.05;
    double intensity = 0.10;
    MertonJumps merton{};
    KouJumps kou{};

    ModelParams params() const {
        if (type == "merton") return {volatility, rate, intensity, merton};
        if (type == "kou") return {volatility, rate, intensity, kou};
        throw ConfigError("model.type must be \"merton\" or \"kou\"");
    }
};

struct GridConfig {
    double half_width = 2.0;
    int intervals = 1536;
    std::vector<int> sequence{128, 256, 512, 1024};
    double mesh_ratio = 0.4;
};

struct StabilityConfig {
    std::optional<double> dtau;  // default: 1/(4 lambda + 2 r)
    int points = 1024;
};

struct WavenumberConfig {
    int points = 256;
};

struct EfficiencyConfig {
    std::vector<int> intervals{32, 64, 128, 256, 512};
    std::vector<double> targets{1e-3};
    double window = 1.0;
    int repeats = 3;
};

struct RunConfig {
    ModelConfig model;
    Contract contract;
    GridConfig grid;
    SolveOptions options;
    std::vector<double> spots{90.0, 100.0, 110.0};
    std::string output_dir = ".";
    StabilityConfig stability;
    WavenumberConfig wavenumber;
    EfficiencyConfig efficiency;

    ModelParams params() const { return model.params(); }

    GridSpec grid_spec() const {
        return GridSpec::from_mesh_ratio(grid.half_width, grid.intervals, contract.maturity, grid.mesh_ratio);
    }

    void validate() const {
        params();
        contract.validate();
        grid_spec();
        if (!(options.epsilon > 0.0)) throw ConfigError("options.epsilon must be positive");
        if (options.max_iter < 1) throw ConfigError("options.max_iter must be >= 1");
        for (double s : spots)
            if (!(s > 0.0)) throw ConfigError("spots must be positive");
        if (stability.points < 0) throw ConfigError("stability.points must be >= 0");
        if (stability.dtau && !(*stability.dtau > 0.0)) throw ConfigError("stability.dtau must be positive");
        if (wavenumber.points < 0) throw ConfigError("wavenumber.points must be >= 0");
        if (efficiency.repeats < 1) throw ConfigError("efficiency.repeats must be >= 1");
        if (!(efficiency.window > 0.0)) throw ConfigError("efficiency.window must be positive");
    }
};

inline Scheme parse_scheme(const std::string& s) {
    if (s == "compact") return Scheme::Compact;
    if (s == "fd2") return Scheme::SecondOrder;
    throw ConfigError("scheme must be \"compact\" or \"fd2\", got \"" + s + "\"");
}

inline OptionSide parse_side(const std::string& s) {
    if (s == "put") return OptionSide::Put;
    if (s == "call") return OptionSide::Call;
    throw ConfigError("side must be \"call\" or \"put\", got \"" + s + "\"");
}

using nlohmann::json;

inline json to_json(const RunConfig& c) {
    json j;
    j["model"] = {{"type", c.model.type},
                  {"volatility", c.model.volatility},
                  {"rate", c.model.rate},
                  {"intensity", c.model.intensity},
                  {"merton", {{"mean", c.model.merton.mean}, {"stddev", c.model.merton.stddev}}},
                  {"kou",
                   {{"up_rate", c.model.kou.up_rate},
                    {"down_rate", c.model.kou.down_rate},
                    {"up_probability", c.model.kou.up_probability}}}};
    j["contract"] = {{"side", to_string(c.contract.side)},
                     {"strike", c.contract.strike},
                     {"spot_anchor", c.contract.spot_anchor},
                     {"maturity", c.contract.maturity}};
    j["grid"] = {{"half_width", c.grid.half_width},
                 {"intervals", c.grid.intervals},
                 {"sequence", c.grid.sequence},
                 {"mesh_ratio", c.grid.mesh_ratio}};
    j["options"] = {{"smoothing", c.options.smoothing},
                    {"epsilon", c.options.epsilon},
                    {"max_iter", c.options.max_iter},
                    {"scheme", to_string(c.options.scheme)},
                    {"kernel_resolution", c.options.kernel_resolution}};
    j["spots"] = c.spots;
    j["output_dir"] = c.output_dir;
    j["stability"] = {{"dtau", c.stability.dtau ? json(*c.stability.dtau) : json(nullptr)},
                      {"points", c.stability.points}};
    j["wavenumber"] = {{"points", c.wavenumber.points}};
    j["efficiency"] = {{"intervals", c.efficiency.intervals},
                       {"targets", c.efficiency.targets},
                       {"window", c.efficiency.window},
                       {"repeats", c.efficiency.repeats}};
    return j;
}

namespace detail {

// 1-based line of the first match of the quoted path components, in order.
inline int line_of_path(const std::string& text, const std::vector<std::string>& path) {
    std::size_t pos = 0;
    for (const auto& key : path) {
        const auto found = text.find("\"" + key + "\"", pos);
        if (found == std::string::npos) return 0;
        pos = found + 1;
    }
    if (path.empty()) return 0;
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

class Reader {
public:
    explicit Reader(const std::string& text) : text_(text) {}

    [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& what) const {
        std::string dotted;
        for (const auto& p : path) dotted += (dotted.empty() ? "" : ".") + p;
        const int line = line_of_path(text_, path);
        std::string where = line > 0 ? "line " + std::to_string(line) + ": " : "";
        throw ConfigError("config " + where + (dotted.empty() ? "" : dotted + ": ") + what);
    }

    void only_keys(const json& obj, const std::vector<std::string>& path,
                   std::initializer_list<const char*> allowed) const {
        if (!obj.is_object()) fail(path, "expected an object");
        for (const auto& [key, value] : obj.items()) {
            bool known = false;
            for (const char* a : allowed) known = known || key == a;
            if (!known) {
                auto p = path;
                p.push_back(key);
                fail(p, "unknown key");
            }
        }
    }

    template <class T>
    void read(const json& obj, std::vector<std::string> path, const char* key, T& out) const {
        if (!obj.contains(key)) return;
        path.push_back(key);
        const json& v = obj.at(key);
        try {
            if constexpr (std::is_same_v<T, int>) {
                if (!v.is_number_integer()) fail(path, "expected an integer");
                out = v.get<int>();
            } else if constexpr (std::is_same_v<T, double>) {
                if (!v.is_number()) fail(path, "expected a number");
                out = v.get<double>();
            } else if constexpr (std::is_same_v<T, bool>) {
                if (!v.is_boolean()) fail(path, "expected true or false");
                out = v.get<bool>();
            } else if constexpr (std::is_same_v<T, std::string>) {
                if (!v.is_string()) fail(path, "expected a string");
                out = v.get<std::string>();
            } else if constexpr (std::is_same_v<T, std::vector<int>>) {
                if (!v.is_array()) fail(path, "expected an array of integers");
                out.clear();
                for (const auto& e : v) {
                    if (!e.is_number_integer()) fail(path, "expected an array of integers");
                    out.push_back(e.get<int>());
                }
            } else if constexpr (std::is_same_v<T, std::vector<double>>) {
                if (!v.is_array()) fail(path, "expected an array of numbers");
                out.clear();
                for (const auto& e : v) {
                    if (!e.is_number()) fail(path, "expected an array of numbers");
                    out.push_back(e.get<double>());
                }
            } else {
                static_assert(sizeof(T) == 0, "unsupported config field type");
            }
        } catch (const json::exception& e) {
            fail(path, e.what());
        }
    }

    template <class Fn>
    void wrap(const std::vector<std::string>& path, Fn&& fn) const {
        try {
            fn();
        } catch (const ConfigError& e) {
            const std::string msg = e.what();
            if (msg.rfind("config ", 0) == 0) throw;
            fail(path, msg);
        }
    }

private:
    const std::string& text_;
};

}  // namespace detail

/// Parses JSON text over the defaults. Errors carry the offending line.
inline RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto upto = std::min<std::size_t>(e.byte, text.size());
        const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n'));
        throw ConfigError("config line " + std::to_string(line) + ": malformed JSON (" + e.what() + ")");
    }
    const detail::Reader rd(text);
    RunConfig c;
    rd.only_keys(j, {}, {"model", "contract", "grid", "options", "spots", "output_dir", "stability", "wavenumber",
                         "efficiency"});
    if (j.contains("model")) {
        const json& m = j["model"];
        rd.only_keys(m, {"model"}, {"type", "volatility", "rate", "intensity", "merton", "kou"});
        rd.read(m, {"model"}, "type", c.model.type);
        if (c.model.type != "merton" && c.model.type != "kou") rd.fail({"model", "type"}, "expected \"merton\" or \"kou\"");
        rd.read(m, {"model"}, "volatility", c.model.volatility);
        rd.read(m, {"model"}, "rate", c.model.rate);
        rd.read(m, {"model"}, "intensity", c.model.intensity);
        if (m.contains("merton")) {
            rd.only_keys(m["merton"], {"model", "merton"}, {"mean", "stddev"});
            rd.read(m["merton"], {"model", "merton"}, "mean", c.model.merton.mean);
            rd.read(m["merton"], {"model", "merton"}, "stddev", c.model.merton.stddev);
        }
        if (m.contains("kou")) {
            rd.only_keys(m["kou"], {"model", "kou"}, {"up_rate", "down_rate", "up_probability"});
            rd.read(m["kou"], {"model", "kou"}, "up_rate", c.model.kou.up_rate);
            rd.read(m["kou"], {"model", "kou"}, "down_rate", c.model.kou.down_rate);
            rd.read(m["kou"], {"model", "kou"}, "up_probability", c.model.kou.up_probability);
        }
        rd.wrap({"model"}, [&] { c.model.params(); });
    }
    if (j.contains("contract")) {
        const json& k = j["contract"];
        rd.only_keys(k, {"contract"}, {"side", "strike", "spot_anchor", "maturity"});
        std::string side = to_string(c.contract.side);
        rd.read(k, {"contract"}, "side", side);
        rd.wrap({"contract", "side"}, [&] { c.contract.side = parse_side(side); });
        rd.read(k, {"contract"}, "strike", c.contract.strike);
        rd.read(k, {"contract"}, "spot_anchor", c.contract.spot_anchor);
        rd.read(k, {"contract"}, "maturity", c.contract.maturity);
        rd.wrap({"contract"}, [&] { c.contract.validate(); });
    }
    if (j.contains("grid")) {
        const json& g = j["grid"];
        rd.only_keys(g, {"grid"}, {"half_width", "intervals", "sequence", "mesh_ratio"});
        rd.read(g, {"grid"}, "half_width", c.grid.half_width);
        rd.read(g, {"grid"}, "intervals", c.grid.intervals);
        rd.read(g, {"grid"}, "sequence", c.grid.sequence);
        rd.read(g, {"grid"}, "mesh_ratio", c.grid.mesh_ratio);
        rd.wrap({"grid"}, [&] { c.grid_spec(); });
    }
    if (j.contains("options")) {
        const json& o = j["options"];
        rd.only_keys(o, {"options"}, {"smoothing", "epsilon", "max_iter", "scheme", "kernel_resolution"});
        rd.read(o, {"options"}, "smoothing", c.options.smoothing);
        rd.read(o, {"options"}, "epsilon", c.options.epsilon);
        rd.read(o, {"options"}, "max_iter", c.options.max_iter);
        rd.read(o, {"options"}, "kernel_resolution", c.options.kernel_resolution);
        std::string scheme = to_string(c.options.scheme);
        rd.read(o, {"options"}, "scheme", scheme);
        rd.wrap({"options", "scheme"}, [&] { c.options.scheme = parse_scheme(scheme); });
    }
    rd.read(j, {}, "spots", c.spots);
    rd.read(j, {}, "output_dir", c.output_dir);
    if (j.contains("stability")) {
        const json& s = j["stability"];
        rd.only_keys(s, {"stability"}, {"dtau", "points"});
        if (s.contains("dtau") && !s["dtau"].is_null()) {
            double dt = 0.0;
            rd.read(s, {"stability"}, "dtau", dt);
            c.stability.dtau = dt;
        }
        rd.read(s, {"stability"}, "points", c.stability.points);
    }
    if (j.contains("wavenumber")) {
        rd.only_keys(j["wavenumber"], {"wavenumber"}, {"points"});
        rd.read(j["wavenumber"], {"wavenumber"}, "points", c.wavenumber.points);
    }
    if (j.contains("efficiency")) {
        const json& e = j["efficiency"];
        rd.only_keys(e, {"efficiency"}, {"intervals", "targets", "window", "repeats"});
        rd.read(e, {"efficiency"}, "intervals", c.efficiency.intervals);
        rd.read(e, {"efficiency"}, "targets", c.efficiency.targets);
        rd.read(e, {"efficiency"}, "window", c.efficiency.window);
        rd.read(e, {"efficiency"}, "repeats", c.efficiency.repeats);
    }
    rd.wrap({}, [&] { c.validate(); });
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

inline std::string serialize_config(const RunConfig& c) { return to_json(c).dump(2) + "\n"; }

}  // namespace jdcompact
