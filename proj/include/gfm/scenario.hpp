#pragma once

// Scripted grid disturbances and the TOML scenario file format.
//
//   [plant]            scr | x_g, x_f, r_f, r_g, v_g0
//   [operating_point]  p_m
//   [[events]]         at, kind = "phase_jump" | "rocof" | "voltage_dip", plus
//                      delta_theta [deg] | rate [Hz/s], duration [s] | level [p.u.], duration [s]
//   [sim]              t_end, dt, variant
//
// Frequency ramps hold their final value; phase jumps are permanent steps;
// voltage dips are rectangular and restore v_g0.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include <toml.hpp>

#include "gfm/controller.hpp"
#include "gfm/dq.hpp"
#include "gfm/network.hpp"

namespace gfm {

struct PhaseJump {
    double delta_theta_deg = 0.0;
};

struct Rocof {
    double rate_hz_per_s = 0.0;
    double duration = 0.0;
};

struct VoltageDip {
    double level = 0.0;
    double duration = 0.0;
};

using EventKind = std::variant<PhaseJump, Rocof, VoltageDip>;

struct DisturbanceEvent {
    double at = 0.0;
    EventKind kind;
};

struct Scenario {
    std::string name;
    PlantParams plant;
    std::optional<double> scr;
    double p_m = 0.0;
    double v_g0 = 1.0;
    std::vector<DisturbanceEvent> events;
    double t_end = 5.0;
    std::optional<double> dt;
    ControlVariant variant = ControlVariant::Adaptive;
};

/// Invalid scenario content. `field` names the offending key, `line` is 1-based (0 if unknown).
class ScenarioError : public Error {
public:
    ScenarioError(std::string field, std::string message, std::size_t line = 0)
        : Error(format(field, message, line)), field_(std::move(field)), line_(line) {}

    const std::string& field() const { return field_; }
    std::size_t line() const { return line_; }

private:
    static std::string format(const std::string& field, const std::string& message, std::size_t line) {
        std::string out;
        if (line != 0) out += "line " + std::to_string(line) + ": ";
        if (!field.empty()) out += field + ": ";
        return out + message;
    }

    std::string field_;
    std::size_t line_ = 0;
};

inline void validate(const Scenario& sc) {
    try {
        validate(sc.plant);
    } catch (const InvalidPlant& e) {
        throw ScenarioError("plant", e.what());
    }
    if (sc.scr && !(*sc.scr > 0.0)) throw ScenarioError("plant.scr", "must be > 0");
    if (!(sc.p_m >= 0.0 && sc.p_m <= 1.0)) throw ScenarioError("operating_point.p_m", "must be within [0, 1]");
    if (!(sc.v_g0 >= 0.0)) throw ScenarioError("plant.v_g0", "must be >= 0");
    if (!(sc.t_end > 0.0)) throw ScenarioError("sim.t_end", "must be > 0");
    if (sc.dt && !(*sc.dt > 0.0)) throw ScenarioError("sim.dt", "must be > 0");

    double prev_at = 0.0;
    std::vector<std::pair<double, double>> dips;
    for (std::size_t k = 0; k < sc.events.size(); ++k) {
        const auto& ev = sc.events[k];
        const std::string where = "events[" + std::to_string(k) + "]";
        if (!(ev.at >= 0.0)) throw ScenarioError(where + ".at", "must be >= 0");
        if (ev.at < prev_at) throw ScenarioError(where + ".at", "events must be sorted by time");
        prev_at = ev.at;
        std::visit(
            [&](const auto& e) {
                using T = std::decay_t<decltype(e)>;
                if constexpr (std::is_same_v<T, Rocof>) {
                    if (!(e.duration > 0.0)) throw ScenarioError(where + ".duration", "must be > 0");
                    if (!std::isfinite(e.rate_hz_per_s)) throw ScenarioError(where + ".rate", "must be finite");
                } else if constexpr (std::is_same_v<T, VoltageDip>) {
                    if (!(e.duration > 0.0)) throw ScenarioError(where + ".duration", "must be > 0");
                    if (!(e.level >= 0.0)) throw ScenarioError(where + ".level", "must be >= 0");
                    dips.emplace_back(ev.at, ev.at + e.duration);
                } else {
                    if (!std::isfinite(e.delta_theta_deg)) {
                        throw ScenarioError(where + ".delta_theta", "must be finite");
                    }
                }
            },
            ev.kind);
    }
    std::sort(dips.begin(), dips.end());
    for (std::size_t k = 1; k < dips.size(); ++k) {
        if (dips[k].first < dips[k - 1].second) throw ScenarioError("events", "overlapping voltage_dip events");
    }
}

/// Grid state at scenario time t. Times before 0 give the undisturbed grid, which
/// the simulator uses for its settling pre-roll.
inline GridState grid_state_at(const Scenario& sc, double t) {
    GridState g;
    g.v_g = sc.v_g0;
    double df = 0.0;        // frequency deviation [Hz]
    double df_int = 0.0;    // integral of df [Hz s]
    double jumps = 0.0;     // [rad]
    for (const auto& ev : sc.events) {
        std::visit(
            [&](const auto& e) {
                using T = std::decay_t<decltype(e)>;
                if constexpr (std::is_same_v<T, PhaseJump>) {
                    if (t >= ev.at) jumps += deg2rad(e.delta_theta_deg);
                } else if constexpr (std::is_same_v<T, Rocof>) {
                    if (t > ev.at) {
                        const double ramp = std::min(t - ev.at, e.duration);
                        df += e.rate_hz_per_s * ramp;
                        df_int += 0.5 * e.rate_hz_per_s * ramp * ramp;
                        if (t - ev.at > e.duration) df_int += e.rate_hz_per_s * e.duration * (t - ev.at - e.duration);
                    }
                } else {
                    if (t >= ev.at && t < ev.at + e.duration) g.v_g = e.level;
                }
            },
            ev.kind);
    }
    g.omega_g = 1.0 + df / kNominalFrequencyHz;
    g.theta_g = kOmegaBase * t + 2.0 * std::numbers::pi * df_int + jumps;
    return g;
}

namespace detail {

inline std::size_t line_of(const toml::node& n) { return n.source().begin.line; }

inline void reject_unknown(const toml::table& tbl, std::initializer_list<std::string_view> allowed,
                           const std::string& prefix) {
    for (const auto& [key, node] : tbl) {
        if (std::find(allowed.begin(), allowed.end(), key.str()) == allowed.end()) {
            throw ScenarioError(prefix + std::string(key.str()), "unknown key", line_of(node));
        }
    }
}

inline std::optional<double> get_number(const toml::table& tbl, std::string_view key, const std::string& prefix) {
    const toml::node* n = tbl.get(key);
    if (!n) return std::nullopt;
    if (auto v = n->value<double>()) return *v;
    throw ScenarioError(prefix + std::string(key), "expected a number", line_of(*n));
}

inline double require_number(const toml::table& tbl, std::string_view key, const std::string& prefix,
                             std::size_t line) {
    if (auto v = get_number(tbl, key, prefix)) return *v;
    throw ScenarioError(prefix + std::string(key), "missing required key", line);
}

inline const toml::table* get_table(const toml::table& root, std::string_view key) {
    const toml::node* n = root.get(key);
    if (!n) return nullptr;
    if (const auto* t = n->as_table()) return t;
    throw ScenarioError(std::string(key), "expected a table", line_of(*n));
}

}  // namespace detail

/// Parses and validates TOML scenario text.
inline Scenario parse_scenario(std::string_view text, std::string_view source_name = "scenario") {
    using namespace detail;
    toml::table root;
    try {
        root = toml::parse(text, source_name);
    } catch (const toml::parse_error& e) {
        throw ScenarioError("", std::string(e.description()), e.source().begin.line);
    }

    reject_unknown(root, {"name", "plant", "operating_point", "events", "sim"}, "");

    Scenario sc;
    if (const toml::node* n = root.get("name")) {
        auto s = n->value<std::string>();
        if (!s) throw ScenarioError("name", "expected a string", line_of(*n));
        sc.name = *s;
    }

    const toml::table* plant = get_table(root, "plant");
    if (!plant) throw ScenarioError("plant", "missing required table");
    reject_unknown(*plant, {"scr", "x_g", "x_f", "r_f", "r_g", "v_g0"}, "plant.");
    sc.plant.x_f = get_number(*plant, "x_f", "plant.").value_or(0.1);
    sc.plant.r_f = get_number(*plant, "r_f", "plant.").value_or(0.0);
    sc.plant.r_g = get_number(*plant, "r_g", "plant.").value_or(0.0);
    sc.v_g0 = get_number(*plant, "v_g0", "plant.").value_or(1.0);
    const auto scr = get_number(*plant, "scr", "plant.");
    const auto x_g = get_number(*plant, "x_g", "plant.");
    if (scr && x_g) throw ScenarioError("plant.scr", "give either scr or x_g, not both", line_of(*plant->get("scr")));
    if (scr) {
        if (!(*scr > 0.0)) throw ScenarioError("plant.scr", "must be > 0", line_of(*plant->get("scr")));
        sc.scr = *scr;
        sc.plant.x_g = 1.0 / *scr;
    } else if (x_g) {
        sc.plant.x_g = *x_g;
    } else {
        throw ScenarioError("plant.scr", "one of scr or x_g is required", line_of(*plant));
    }

    if (const toml::table* op = get_table(root, "operating_point")) {
        reject_unknown(*op, {"p_m"}, "operating_point.");
        sc.p_m = get_number(*op, "p_m", "operating_point.").value_or(0.0);
    }

    if (const toml::node* evs = root.get("events")) {
        const toml::array* arr = evs->as_array();
        if (!arr) throw ScenarioError("events", "expected an array of tables", line_of(*evs));
        for (std::size_t k = 0; k < arr->size(); ++k) {
            const toml::node& node = *arr->get(k);
            const toml::table* ev = node.as_table();
            const std::string prefix = "events[" + std::to_string(k) + "].";
            if (!ev) throw ScenarioError("events[" + std::to_string(k) + "]", "expected a table", line_of(node));
            const std::size_t line = line_of(node);
            const toml::node* kind_node = ev->get("kind");
            if (!kind_node) throw ScenarioError(prefix + "kind", "missing required key", line);
            const auto kind = kind_node->value<std::string>();
            if (!kind) throw ScenarioError(prefix + "kind", "expected a string", line_of(*kind_node));

            DisturbanceEvent out;
            out.at = require_number(*ev, "at", prefix, line);
            if (*kind == "phase_jump") {
                reject_unknown(*ev, {"at", "kind", "delta_theta"}, prefix);
                out.kind = PhaseJump{require_number(*ev, "delta_theta", prefix, line)};
            } else if (*kind == "rocof") {
                reject_unknown(*ev, {"at", "kind", "rate", "duration"}, prefix);
                out.kind = Rocof{require_number(*ev, "rate", prefix, line), require_number(*ev, "duration", prefix, line)};
            } else if (*kind == "voltage_dip") {
                reject_unknown(*ev, {"at", "kind", "level", "duration"}, prefix);
                out.kind = VoltageDip{require_number(*ev, "level", prefix, line),
                                      require_number(*ev, "duration", prefix, line)};
            } else {
                throw ScenarioError(prefix + "kind", "unknown event kind '" + *kind + "'", line_of(*kind_node));
            }
            sc.events.push_back(out);
        }
        std::stable_sort(sc.events.begin(), sc.events.end(),
                         [](const DisturbanceEvent& a, const DisturbanceEvent& b) { return a.at < b.at; });
    }

    if (const toml::table* sim = get_table(root, "sim")) {
        reject_unknown(*sim, {"t_end", "dt", "variant"}, "sim.");
        sc.t_end = get_number(*sim, "t_end", "sim.").value_or(5.0);
        sc.dt = get_number(*sim, "dt", "sim.");
        if (const toml::node* v = sim->get("variant")) {
            auto s = v->value<std::string>();
            if (!s) throw ScenarioError("sim.variant", "expected a string", line_of(*v));
            auto parsed = parse_control_variant(*s);
            if (!parsed) throw ScenarioError("sim.variant", "unknown variant '" + *s + "'", line_of(*v));
            sc.variant = *parsed;
        }
    }

    validate(sc);
    return sc;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScenarioError("", "cannot open scenario file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    Scenario sc = parse_scenario(buf.str(), path.string());
    if (sc.name.empty()) sc.name = path.stem().string();
    return sc;
}

}  // namespace gfm
