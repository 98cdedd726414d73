// gfm: run scenarios, sweep control variants, and tabulate design curves.

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "gfm/gfm.hpp"
#include "gfm/report_io.hpp"

namespace fs = std::filesystem;
using namespace gfm;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitLos = 2;

ControlParams params_for(const Scenario& sc, std::optional<double> dt_override) {
    ControlParams p;
    if (sc.dt) p.dt = *sc.dt;
    if (dt_override) p.dt = *dt_override;
    return p;
}

ControlVariant variant_or(const Scenario& sc, const std::string& name) {
    if (name.empty()) return sc.variant;
    auto v = parse_control_variant(name);
    if (!v) throw Error("unknown variant '" + name + "' (expected slow, fast, adaptive-nodroop or adaptive)");
    return *v;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << content;
}

std::string scenario_label(const Scenario& sc, const fs::path& path) {
    return sc.name.empty() ? path.stem().string() : sc.name;
}

struct RunOptions {
    std::string scenario;
    std::string variant;
    std::string out = "out";
    std::optional<double> dt;
    std::size_t every = 1;
};

int cmd_run(const RunOptions& o) {
    const Scenario sc = load_scenario(o.scenario);
    const ControlVariant variant = variant_or(sc, o.variant);
    const SimResult res = run(sc, variant, params_for(sc, o.dt));

    fs::create_directories(o.out);
    {
        std::ofstream csv(fs::path(o.out) / "trace.csv", std::ios::binary);
        if (!csv) throw Error("cannot write trace.csv in '" + o.out + "'");
        io::write_trace_csv(csv, res.trace, o.every);
    }
    write_file(fs::path(o.out) / "report.json", io::to_json(res.report).dump(2) + "\n");
    write_file(fs::path(o.out) / "quicklook.svg", io::quicklook_svg(res.trace));

    std::cout << scenario_label(sc, o.scenario) << " [" << to_string(variant) << "]: " << to_string(res.report.verdict)
              << ", pole slips " << res.report.pole_slips << ", final delta "
              << rad2deg(res.report.delta_final) << " deg\n";
    return res.report.verdict == Verdict::LOS ? kExitLos : kExitOk;
}

struct MatrixOptions {
    std::vector<std::string> scenarios;
    std::vector<std::string> variants{"slow", "fast", "adaptive-nodroop", "adaptive"};
    std::string csv = "matrix.csv";
    std::optional<double> dt;
    unsigned jobs = 0;
};

int cmd_matrix(const MatrixOptions& o) {
    std::vector<ControlVariant> variants;
    for (const auto& name : o.variants) {
        auto v = parse_control_variant(name);
        if (!v) throw Error("unknown variant '" + name + "'");
        variants.push_back(*v);
    }
    std::vector<Scenario> scenarios;
    for (const auto& path : o.scenarios) scenarios.push_back(load_scenario(path));

    const std::size_t n = scenarios.size() * variants.size();
    std::vector<io::MatrixRow> rows(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < n; k = next++) {
            const Scenario& sc = scenarios[k / variants.size()];
            const ControlVariant v = variants[k % variants.size()];
            io::MatrixRow& row = rows[k];
            row.scenario = scenario_label(sc, o.scenarios[k / variants.size()]);
            row.variant = to_string(v);
            try {
                const SimResult res = run(sc, v, params_for(sc, o.dt));
                row.verdict = res.report.verdict;
                row.pole_slips = res.report.pole_slips;
                row.peak_event_power = res.report.peak_event_power;
            } catch (const std::exception& e) {
                row.error = e.what();
            }
        }
    };
    unsigned jobs = o.jobs ? o.jobs : std::max(1u, std::thread::hardware_concurrency());
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, std::max<std::size_t>(n, 1)));
    std::vector<std::jthread> pool;
    for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    pool.clear();

    {
        std::ofstream csv(o.csv, std::ios::binary);
        if (!csv) throw Error("cannot write '" + o.csv + "'");
        io::write_matrix_csv(csv, rows);
    }
    std::cout << io::matrix_table(rows);
    const bool failed = std::any_of(rows.begin(), rows.end(), [](const auto& r) { return !r.error.empty(); });
    return failed ? kExitError : kExitOk;
}

struct CurveOptions {
    std::string kind;
    std::optional<double> scr;
    std::optional<double> x;
    double e_ref = 1.1;
    double v_g = 1.0;
    double x_f = 0.1;
    double x_g_max = 1.0;
    double from = 0.0;
    double to = 180.0;
    std::size_t points = 181;
    std::string out = "curves";
};

int cmd_curves(const CurveOptions& o) {
    analysis::CurveParams p{o.e_ref, o.v_g, o.x_f, 1.0};
    analysis::CurveKind kind;
    if (o.kind == "ithmin") {
        kind = analysis::CurveKind::IThMin;
        p.x_g = o.x_g_max;
    } else if (o.kind == "idelta") {
        kind = analysis::CurveKind::IDelta;
        p.x_g = 1.0 / o.scr.value_or(10.0);
    } else if (o.kind == "pdelta") {
        kind = analysis::CurveKind::PDelta;
        // --x is the total branch reactance.
        if (o.x) {
            p.x_f = *o.x;
            p.x_g = 0.0;
        } else {
            p.x_g = 1.0 / o.scr.value_or(10.0);
        }
    } else {
        throw Error("unknown curve kind '" + o.kind + "' (expected ithmin, idelta or pdelta)");
    }
    if (o.points < 2 || !(o.to > o.from)) throw Error("need at least two points on an increasing range");

    const auto grid = analysis::uniform_grid(o.from, o.to, o.points);
    const auto table = analysis::curve_table(kind, p, grid);
    fs::create_directories(o.out);
    const fs::path csv_path = fs::path(o.out) / (o.kind + ".csv");
    {
        std::ofstream csv(csv_path, std::ios::binary);
        if (!csv) throw Error("cannot write '" + csv_path.string() + "'");
        io::write_curve_csv(csv, kind, table);
    }
    write_file(fs::path(o.out) / (o.kind + ".svg"), io::curve_svg(kind, table));

    const auto peak = std::max_element(table.begin(), table.end(),
                                       [](const auto& a, const auto& b) { return a.y < b.y; });
    std::cout << csv_path.string() << ": " << table.size() << " points, max " << peak->y << " at "
              << peak->x_deg << " deg\n";
    return kExitOk;
}

int cmd_validate(const std::string& path) {
    const Scenario sc = load_scenario(path);
    std::cout << path << ": ok (" << sc.events.size() << " events, t_end " << sc.t_end << " s, variant "
              << to_string(sc.variant) << ")\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Grid-forming converter with adaptive fast/slow internal-voltage control"};
    app.require_subcommand(1);

    RunOptions run_opt;
    auto* run_cmd = app.add_subcommand("run", "simulate one scenario");
    run_cmd->add_option("scenario", run_opt.scenario, "scenario TOML file")->required()->check(CLI::ExistingFile);
    run_cmd->add_option("--variant", run_opt.variant, "slow | fast | adaptive-nodroop | adaptive (default: from file)");
    run_cmd->add_option("--out", run_opt.out, "output directory")->capture_default_str();
    run_cmd->add_option("--dt", run_opt.dt, "step size override [s]")->check(CLI::PositiveNumber);
    run_cmd->add_option("--every", run_opt.every, "write every N-th trace row")->check(CLI::PositiveNumber)->capture_default_str();

    MatrixOptions mat_opt;
    auto* mat_cmd = app.add_subcommand("matrix", "run every scenario against every variant");
    mat_cmd->add_option("scenarios", mat_opt.scenarios, "scenario TOML files")->check(CLI::ExistingFile);
    mat_cmd->add_option("--variants", mat_opt.variants, "variants to run")->delimiter(',')->capture_default_str();
    mat_cmd->add_option("--csv", mat_opt.csv, "CSV output path")->capture_default_str();
    mat_cmd->add_option("--dt", mat_opt.dt, "step size override [s]")->check(CLI::PositiveNumber);
    mat_cmd->add_option("--jobs,-j", mat_opt.jobs, "parallel runs (default: hardware threads)");

    CurveOptions cur_opt;
    auto* cur_cmd = app.add_subcommand("curves", "tabulate a design curve as CSV and SVG");
    cur_cmd->add_option("kind", cur_opt.kind, "ithmin | idelta | pdelta")->required();
    cur_cmd->add_option("--scr", cur_opt.scr, "short-circuit ratio (idelta, pdelta)")->check(CLI::PositiveNumber);
    cur_cmd->add_option("--x", cur_opt.x, "total branch reactance (pdelta)")->check(CLI::PositiveNumber);
    cur_cmd->add_option("--e-ref", cur_opt.e_ref, "internal voltage")->capture_default_str();
    cur_cmd->add_option("--vg", cur_opt.v_g, "grid voltage")->capture_default_str();
    cur_cmd->add_option("--xf", cur_opt.x_f, "filter reactance")->capture_default_str();
    cur_cmd->add_option("--xg-max", cur_opt.x_g_max, "largest grid reactance (ithmin)")->capture_default_str();
    cur_cmd->add_option("--from", cur_opt.from, "first angle [deg]")->capture_default_str();
    cur_cmd->add_option("--to", cur_opt.to, "last angle [deg]")->capture_default_str();
    cur_cmd->add_option("--points", cur_opt.points, "number of samples")->capture_default_str();
    cur_cmd->add_option("--out", cur_opt.out, "output directory")->capture_default_str();

    std::string val_path;
    auto* val_cmd = app.add_subcommand("validate", "parse and check a scenario file");
    val_cmd->add_option("scenario", val_path, "scenario TOML file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run_cmd) return cmd_run(run_opt);
        if (*mat_cmd) return cmd_matrix(mat_opt);
        if (*cur_cmd) return cmd_curves(cur_opt);
        if (*val_cmd) return cmd_validate(val_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}
