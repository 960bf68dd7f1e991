#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <thread>
#include <vector>

#include "mfboost/scenario_io.hpp"
#include "mfboost/sim.hpp"

namespace mfboost::cli {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view sweep_params[] = {"r", "alpha", "kp", "ki", "e"};

std::optional<std::string> read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void print_summary(const Summary& s, std::size_t records, std::ostream& out) {
    out << "steady_state_error = " << format_double(s.steady_state_error) << '\n';
    out << "settled = " << (s.settled_at ? "yes" : "no") << '\n';
    out << "settling_time = " << (s.settled_at ? format_double(*s.settled_at) : "none") << '\n';
    out << "max_deviation = " << format_double(s.max_deviation) << '\n';
    for (std::size_t i = 0; i < s.event_times.size(); ++i) {
        out << "event_" << i + 1 << "_time = " << format_double(s.event_times[i]) << '\n';
        out << "event_" << i + 1 << "_max_deviation = " << format_double(s.event_deviation[i])
            << '\n';
    }
    out << "mode_switches = " << s.mode_switches << '\n';
    out << "records = " << records << '\n';
}

void write_csv_file(const fs::path& path, const std::vector<TimeSeriesRecord>& records) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot open " + path.string() + " for writing");
    write_csv(records, file);
}

fs::path write_plot(const fs::path& csv, const Scenario& scenario) {
    fs::path script = csv;
    script.replace_extension(".gp");
    fs::path svg = csv;
    svg.replace_extension(".svg");
    std::vector<double> times;
    for (const auto& ev : scenario.events) times.push_back(ev.time);
    std::ofstream file(script, std::ios::binary);
    file << emit_plot_script(csv.string(), svg.string(), times);
    if (!file) throw std::runtime_error("cannot write " + script.string());
    return script;
}

int simulate_and_report(const Scenario& scenario, const fs::path& out_csv, bool emit_plot,
                        double band, std::ostream& out, std::ostream& err) {
    if (!(band > 0.0 && band < 1.0)) {
        err << "error: band must lie in (0, 1)\n";
        return usage_or_parse;
    }
    std::vector<TimeSeriesRecord> records;
    try {
        records = run_closed_loop(scenario);
    } catch (const SimulationAbort& e) {
        err << "simulation aborted: " << e.what() << '\n';
        return simulation_abort;
    }
    const fs::path csv = resolve_output(out_csv);
    try {
        write_csv_file(csv, records);
        if (emit_plot) out << "plot_script = " << write_plot(csv, scenario).string() << '\n';
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return usage_or_parse;
    }
    print_summary(metrics(records, band), records.size(), out);
    out << "csv = " << csv.string() << '\n';
    return ok;
}

std::optional<Scenario> load_scenario(const fs::path& path, std::ostream& err) {
    const auto text = read_file(path);
    if (!text) {
        err << "error: cannot read scenario file " << path.string() << '\n';
        return std::nullopt;
    }
    try {
        return parse_scenario(*text);
    } catch (const ParseError& e) {
        err << path.string() << ": " << e.what() << '\n';
        return std::nullopt;
    }
}

void apply_param(Scenario& s, std::string_view param, double value) {
    if (param == "r") s.plant.resistance = value;
    else if (param == "alpha") s.controller.alpha = value;
    else if (param == "kp") s.controller.kp = value;
    else if (param == "ki") s.controller.ki = value;
    else if (param == "e") s.plant.input_voltage = value;
}

struct SweepRow {
    double value;
    std::string csv_name;
    std::optional<Summary> summary;
    std::string failure;
};

}  // namespace

fs::path resolve_output(const fs::path& path) {
    const char* dir = std::getenv("MFBOOST_OUTPUT_DIR");
    if (dir == nullptr || *dir == '\0' || path.is_absolute()) return path;
    return fs::path(dir) / path;
}

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err) {
    const auto scenario = load_scenario(options.scenario, err);
    if (!scenario) return usage_or_parse;
    return simulate_and_report(*scenario, options.out_csv, options.emit_plot, options.band, out,
                               err);
}

int cmd_preset(const PresetOptions& options, std::ostream& out, std::ostream& err) {
    Scenario scenario;
    try {
        scenario = preset(options.name);
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return usage_or_parse;
    }
    if (options.export_scenario) {
        const fs::path path = resolve_output(*options.export_scenario);
        if (path.has_parent_path()) fs::create_directories(path.parent_path());
        std::ofstream file(path, std::ios::binary);
        file << "# preset " << options.name << '\n' << print_scenario(scenario);
        if (!file) {
            err << "error: cannot write " << path.string() << '\n';
            return usage_or_parse;
        }
        out << "scenario = " << path.string() << '\n';
        return ok;
    }
    if (!options.out_csv) {
        err << "error: preset needs --out or --export-scenario\n";
        return usage_or_parse;
    }
    return simulate_and_report(scenario, *options.out_csv, options.emit_plot, options.band, out,
                               err);
}

int cmd_sweep(const SweepOptions& options, std::ostream& out, std::ostream& err) {
    if (std::find(std::begin(sweep_params), std::end(sweep_params), options.param) ==
        std::end(sweep_params)) {
        err << "error: unknown sweep parameter `" << options.param
            << "` (expected r, alpha, kp, ki or e)\n";
        return usage_or_parse;
    }
    if (options.steps < 2) {
        err << "error: sweep needs at least 2 steps\n";
        return usage_or_parse;
    }
    if (!(options.band > 0.0 && options.band < 1.0)) {
        err << "error: band must lie in (0, 1)\n";
        return usage_or_parse;
    }
    if (options.scenario.has_value() == options.preset.has_value()) {
        err << "error: sweep needs exactly one of --scenario or --preset\n";
        return usage_or_parse;
    }
    Scenario base;
    if (options.scenario) {
        auto loaded = load_scenario(*options.scenario, err);
        if (!loaded) return usage_or_parse;
        base = *loaded;
    } else {
        try {
            base = preset(*options.preset);
        } catch (const std::invalid_argument& e) {
            err << "error: " << e.what() << '\n';
            return usage_or_parse;
        }
    }

    const fs::path dir = resolve_output(options.out_dir);
    fs::create_directories(dir);

    std::vector<SweepRow> rows(static_cast<std::size_t>(options.steps));
    for (int i = 0; i < options.steps; ++i) {
        const double value = i + 1 == options.steps
                                 ? options.to
                                 : options.from + (options.to - options.from) * i /
                                                      (options.steps - 1);
        rows[i].value = value;
        rows[i].csv_name = options.param + "_" + format_double(value) + ".csv";
    }

    auto run_one = [&](SweepRow& row) {
        Scenario s = base;
        apply_param(s, options.param, row.value);
        try {
            const auto records = run_closed_loop(s);
            write_csv_file(dir / row.csv_name, records);
            row.summary = metrics(records, options.band);
        } catch (const std::exception& e) {
            row.failure = e.what();
        }
    };

    // Runs share nothing; each worker owns one row at a time.
    const unsigned jobs =
        options.jobs > 0 ? options.jobs : std::max(1u, std::thread::hardware_concurrency());
    for (std::size_t start = 0; start < rows.size(); start += jobs) {
        std::vector<std::future<void>> batch;
        for (std::size_t i = start; i < std::min(rows.size(), start + jobs); ++i) {
            batch.push_back(std::async(std::launch::async, run_one, std::ref(rows[i])));
        }
        for (auto& f : batch) f.get();
    }

    std::ofstream summary(dir / "summary.csv", std::ios::binary);
    summary << "param,value,steady_state_error,settled,settling_time,max_deviation,mode_switches,"
               "csv\n";
    int status = ok;
    for (const auto& row : rows) {
        if (!row.summary) {
            err << "error: " << options.param << " = " << format_double(row.value) << ": "
                << row.failure << '\n';
            status = std::max(status, static_cast<int>(simulation_abort));
            continue;
        }
        const Summary& s = *row.summary;
        summary << options.param << ',' << format_double(row.value) << ','
                << format_double(s.steady_state_error) << ',' << (s.settled_at ? "yes" : "no")
                << ',' << (s.settled_at ? format_double(*s.settled_at) : "none") << ','
                << format_double(s.max_deviation) << ',' << s.mode_switches << ','
                << row.csv_name << '\n';
        out << options.param << " = " << format_double(row.value) << ": steady_state_error = "
            << format_double(s.steady_state_error)
            << ", settled = " << (s.settled_at ? "yes" : "no") << '\n';
    }
    out << "summary = " << (dir / "summary.csv").string() << '\n';
    return status;
}

int cmd_validate(const ValidationOptions& options, std::ostream& out, std::ostream& err) {
    const auto results = run_validation(options);
    std::size_t failed = 0;
    for (const auto& r : results) {
        out << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << r.detail << ")\n";
        if (!r.passed) ++failed;
    }
    out << results.size() - failed << " of " << results.size() << " checks passed\n";
    if (failed == 0) return ok;
    err << "failed checks:";
    for (const auto& r : results) {
        if (!r.passed) err << ' ' << r.name;
    }
    err << '\n';
    return validation_failed;
}

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Model-free (intelligent PI) control of an averaged boost converter"};
    app.name("mfboost");
    app.require_subcommand(1);

    RunOptions run;
    auto* run_cmd = app.add_subcommand("run", "Simulate a scenario file");
    run_cmd->add_option("scenario", run.scenario, "Scenario file")->required();
    run_cmd->add_option("-o,--out", run.out_csv, "CSV output path")->required();
    run_cmd->add_flag("--plot", run.emit_plot, "Also write a gnuplot script next to the CSV");
    run_cmd->add_option("--band", run.band, "Settling band as a fraction of the reference");

    PresetOptions pre;
    std::string pre_out, pre_export;
    auto* pre_cmd = app.add_subcommand("preset", "Simulate a built-in scenario");
    pre_cmd->add_option("name", pre.name, "fig2, fig3, fig4 or fig5")->required();
    auto* pre_out_opt = pre_cmd->add_option("-o,--out", pre_out, "CSV output path");
    auto* pre_export_opt = pre_cmd->add_option("--export-scenario", pre_export,
                                               "Write the preset as a scenario file instead");
    auto* pre_plot = pre_cmd->add_flag("--plot", pre.emit_plot, "Also write a gnuplot script");
    pre_cmd->add_option("--band", pre.band, "Settling band as a fraction of the reference");
    pre_export_opt->excludes(pre_out_opt);
    pre_export_opt->excludes(pre_plot);

    SweepOptions sweep;
    std::string sweep_scenario, sweep_preset;
    auto* sweep_cmd = app.add_subcommand("sweep", "Run a scenario over a parameter range");
    auto* sweep_file = sweep_cmd->add_option("--scenario", sweep_scenario, "Base scenario file");
    auto* sweep_pre = sweep_cmd->add_option("--preset", sweep_preset, "Base preset name");
    sweep_file->excludes(sweep_pre);
    sweep_cmd->add_option("--param", sweep.param, "r, alpha, kp, ki or e")->required();
    sweep_cmd->add_option("--from", sweep.from, "First value")->required();
    sweep_cmd->add_option("--to", sweep.to, "Last value")->required();
    sweep_cmd->add_option("--steps", sweep.steps, "Number of values (>= 2)")->required();
    sweep_cmd->add_option("--out-dir", sweep.out_dir, "Directory for CSVs and summary.csv")
        ->required();
    sweep_cmd->add_option("--band", sweep.band, "Settling band as a fraction of the reference");
    sweep_cmd->add_option("-j,--jobs", sweep.jobs, "Concurrent runs (0: hardware threads)");

    ValidationOptions validation;
    auto* validate_cmd = app.add_subcommand("validate", "Run the built-in oracle checks");
    validate_cmd->add_option("--perturb-alpha", validation.alpha_perturbation,
                             "Relative alpha perturbation for the control-law check");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return usage_or_parse;
    }

    if (*run_cmd) return cmd_run(run, out, err);
    if (*pre_cmd) {
        if (*pre_out_opt) pre.out_csv = pre_out;
        if (*pre_export_opt) pre.export_scenario = pre_export;
        return cmd_preset(pre, out, err);
    }
    if (*sweep_cmd) {
        if (*sweep_file) sweep.scenario = sweep_scenario;
        if (*sweep_pre) sweep.preset = sweep_preset;
        return cmd_sweep(sweep, out, err);
    }
    return cmd_validate(validation, out, err);
}

}  // namespace mfboost::cli
