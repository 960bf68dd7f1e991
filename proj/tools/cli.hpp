#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "mfboost/validation.hpp"

namespace mfboost::cli {

/// Process exit codes.
enum Exit : int {
    ok = 0,
    usage_or_parse = 1,
    simulation_abort = 2,
    validation_failed = 3,
};

struct RunOptions {
    std::filesystem::path scenario;
    std::filesystem::path out_csv;
    bool emit_plot = false;
    double band = 0.02;
};

struct PresetOptions {
    std::string name;
    std::optional<std::filesystem::path> out_csv;
    std::optional<std::filesystem::path> export_scenario;
    bool emit_plot = false;
    double band = 0.02;
};

struct SweepOptions {
    std::optional<std::filesystem::path> scenario;
    std::optional<std::string> preset;
    std::string param;
    double from = 0.0;
    double to = 0.0;
    int steps = 0;
    std::filesystem::path out_dir;
    double band = 0.02;
    unsigned jobs = 0;  ///< 0: one per hardware thread
};

int cmd_run(const RunOptions& options, std::ostream& out, std::ostream& err);
int cmd_preset(const PresetOptions& options, std::ostream& out, std::ostream& err);
int cmd_sweep(const SweepOptions& options, std::ostream& out, std::ostream& err);
int cmd_validate(const ValidationOptions& options, std::ostream& out, std::ostream& err);

/// Relative output paths are placed under $MFBOOST_OUTPUT_DIR when it is set.
std::filesystem::path resolve_output(const std::filesystem::path& path);

/// Full command-line entry point.
int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mfboost::cli
