#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mfboost/sim.hpp"

namespace mfboost {

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& message);
    /// 1-based; 0 when no single line is responsible.
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Line-oriented scenario document:
///
///     # comment
///     [plant]        l c r e fc
///     [controller]   alpha kp ki tc u_min u_max filter_window
///     [reference]    kind = constant|exponential, level | v0 vf tau
///     [events]       at <seconds> set_r <ohms>
///     [sim]          t_end substeps_per_period x0_il x0_vc
///
/// Missing keys keep the defaults of default_scenario(); tc defaults to 1/fc.
Scenario parse_scenario(std::string_view text);

/// Defaults for every key: reference design at 100 ohm, gains 30/2/10,
/// constant 24 V reference, 0.1 s horizon, converter starting at (0 A, E).
Scenario default_scenario();

/// Inverse of parse_scenario; every key is written explicitly.
std::string print_scenario(const Scenario& scenario);

std::string format_double(double value);

inline constexpr std::string_view csv_header = "t,v_ref,v_out,i_l,duty,mode,r";

std::size_t write_csv(std::span<const TimeSeriesRecord> series, std::ostream& out);
std::vector<TimeSeriesRecord> read_csv(std::istream& in);

/// gnuplot script drawing v_ref and v_out against t with duty on a second
/// axis, one dashed marker per event time; renders to `out_path` as SVG.
std::string emit_plot_script(std::string_view csv_path, std::string_view out_path,
                             std::span<const double> event_times = {});

inline constexpr std::string_view preset_names[] = {"fig2", "fig3", "fig4", "fig5"};

/// Built-in demonstration scenarios. Throws
/// std::invalid_argument for an unknown name.
Scenario preset(std::string_view name);

}  // namespace mfboost
