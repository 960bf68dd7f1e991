#include "mfboost/scenario_io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <initializer_list>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

namespace mfboost {

ParseError::ParseError(std::size_t line, const std::string& message)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + message : message),
      line_(line) {}

std::string format_double(double value) {
    std::array<char, 64> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), end);
}

Scenario default_scenario() {
    Scenario s;
    s.x0 = {0.0, s.plant.input_voltage};
    s.controller.tc = s.plant.period();
    return s;
}

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::optional<double> to_double(std::string_view s) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return value;
}

template <class Int>
std::optional<Int> to_integer(std::string_view s) {
    Int value{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return value;
}

std::vector<std::string_view> split_words(std::string_view s) {
    std::vector<std::string_view> words;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        const std::size_t start = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
        if (i > start) words.push_back(s.substr(start, i - start));
    }
    return words;
}

const std::map<std::string_view, std::vector<std::string_view>>& known_keys() {
    static const std::map<std::string_view, std::vector<std::string_view>> keys{
        {"plant", {"l", "c", "r", "e", "fc"}},
        {"controller", {"alpha", "kp", "ki", "tc", "u_min", "u_max", "filter_window"}},
        {"reference", {"kind", "level", "v0", "vf", "tau"}},
        {"events", {}},
        {"sim", {"t_end", "substeps_per_period", "x0_il", "x0_vc"}},
    };
    return keys;
}

struct Entry {
    std::string_view value;
    std::size_t line;
};

class ScenarioParser {
public:
    Scenario parse(std::string_view text) {
        std::size_t line_no = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            const std::size_t nl = text.find('\n', pos);
            std::string_view line =
                text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
            ++line_no;
            parse_line(line, line_no);
            if (nl == std::string_view::npos) break;
            pos = nl + 1;
        }
        return build();
    }

private:
    void parse_line(std::string_view line, std::size_t n) {
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) return;

        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError(n, "malformed section header");
            const auto name = trim(line.substr(1, line.size() - 2));
            if (!known_keys().contains(name)) {
                throw ParseError(n, "unknown section [" + std::string(name) + "]");
            }
            section_ = std::string(name);
            return;
        }
        if (section_.empty()) throw ParseError(n, "entry outside of any section");
        if (section_ == "events") {
            parse_event(line, n);
            return;
        }

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw ParseError(n, "expected `key = value`");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        const auto& allowed = known_keys().at(section_);
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw ParseError(n, "unknown key `" + std::string(key) + "` in [" + section_ + "]");
        }
        if (value.empty()) throw ParseError(n, "missing value for `" + std::string(key) + "`");
        const std::string full = section_ + "." + std::string(key);
        if (entries_.contains(full)) {
            throw ParseError(n, "duplicate key `" + std::string(key) + "`");
        }
        entries_.emplace(full, Entry{value, n});
    }

    void parse_event(std::string_view line, std::size_t n) {
        const auto words = split_words(line);
        if (words.size() != 4 || words[0] != "at" || words[2] != "set_r") {
            throw ParseError(n, "expected `at <seconds> set_r <ohms>`");
        }
        const auto time = to_double(words[1]);
        const auto load = to_double(words[3]);
        if (!time) throw ParseError(n, "event time is not a number");
        if (!load) throw ParseError(n, "event load is not a number");
        if (!std::isfinite(*time) || *time < 0.0) throw ParseError(n, "event time must be >= 0");
        if (!std::isfinite(*load) || *load <= 0.0) throw ParseError(n, "event load must be > 0");
        if (!events_.empty() && !(*time > events_.back().time)) {
            throw ParseError(n, "event times must be strictly increasing");
        }
        events_.push_back({*time, *load});
        event_lines_.push_back(n);
    }

    std::optional<double> number(const std::string& key) {
        const auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        const auto v = to_double(it->second.value);
        if (!v) throw ParseError(it->second.line, "`" + key + "` is not a number");
        return v;
    }

    template <class Int>
    std::optional<Int> integer(const std::string& key) {
        const auto it = entries_.find(key);
        if (it == entries_.end()) return std::nullopt;
        const auto v = to_integer<Int>(it->second.value);
        if (!v) throw ParseError(it->second.line, "`" + key + "` is not a non-negative integer");
        return v;
    }

    std::size_t line_of(const std::string& key) const {
        const auto it = entries_.find(key);
        return it == entries_.end() ? 0 : it->second.line;
    }

    Scenario build() {
        Scenario s = default_scenario();
        auto set = [this](const std::string& key, double& field) {
            if (auto v = number(key)) field = *v;
        };

        set("plant.l", s.plant.inductance);
        set("plant.c", s.plant.capacitance);
        set("plant.r", s.plant.resistance);
        set("plant.e", s.plant.input_voltage);
        set("plant.fc", s.plant.switching_frequency);

        set("controller.alpha", s.controller.alpha);
        set("controller.kp", s.controller.kp);
        set("controller.ki", s.controller.ki);
        s.controller.tc = 1.0 / s.plant.switching_frequency;
        set("controller.tc", s.controller.tc);
        set("controller.u_min", s.controller.u_min);
        set("controller.u_max", s.controller.u_max);
        if (auto w = integer<std::size_t>("controller.filter_window")) {
            s.controller.filter_window = *w;
        }

        s.reference = build_reference(s.plant.input_voltage);
        s.events = events_;

        set("sim.t_end", s.t_end);
        if (auto n = integer<int>("sim.substeps_per_period")) s.substeps_per_period = *n;
        s.x0 = {0.0, s.plant.input_voltage};
        set("sim.x0_il", s.x0.inductor_current);
        set("sim.x0_vc", s.x0.capacitor_voltage);

        for (const auto& v : check(s)) {
            std::size_t line = line_of(v.key);
            if (v.key == "events" && !event_lines_.empty()) line = event_lines_.front();
            if (v.key == "controller.u_max" && line == 0) line = line_of("controller.u_min");
            throw ParseError(line, v.message);
        }
        if (s.t_end <= 0.0) throw ParseError(line_of("sim.t_end"), "t_end must be > 0");
        return s;
    }

    ReferenceSpec build_reference(double input_voltage) {
        std::string_view kind = "constant";
        if (const auto it = entries_.find("reference.kind"); it != entries_.end()) {
            kind = it->second.value;
        }
        auto reject = [this](std::initializer_list<const char*> keys, std::string_view kind_name) {
            for (const char* k : keys) {
                const std::string full = std::string("reference.") + k;
                if (entries_.contains(full)) {
                    throw ParseError(line_of(full), "`" + std::string(k) + "` does not apply to " +
                                                        std::string(kind_name) + " references");
                }
            }
        };
        if (kind == "constant") {
            reject({"v0", "vf", "tau"}, kind);
            ConstantReference c;
            if (auto v = number("reference.level")) c.level = *v;
            return c;
        }
        if (kind == "exponential") {
            reject({"level"}, kind);
            ExponentialReference e;
            e.v0 = input_voltage;
            if (auto v = number("reference.v0")) e.v0 = *v;
            if (auto v = number("reference.vf")) e.vf = *v;
            if (auto v = number("reference.tau")) e.tau = *v;
            return e;
        }
        throw ParseError(line_of("reference.kind"),
                         "unknown reference kind `" + std::string(kind) + "`");
    }

    std::string section_;
    std::map<std::string, Entry> entries_;
    std::vector<LoadEvent> events_;
    std::vector<std::size_t> event_lines_;
};

}  // namespace

Scenario parse_scenario(std::string_view text) { return ScenarioParser{}.parse(text); }

std::string print_scenario(const Scenario& s) {
    std::ostringstream out;
    auto kv = [&out](std::string_view key, double value) {
        out << key << " = " << format_double(value) << '\n';
    };
    out << "[plant]\n";
    kv("l", s.plant.inductance);
    kv("c", s.plant.capacitance);
    kv("r", s.plant.resistance);
    kv("e", s.plant.input_voltage);
    kv("fc", s.plant.switching_frequency);

    out << "\n[controller]\n";
    kv("alpha", s.controller.alpha);
    kv("kp", s.controller.kp);
    kv("ki", s.controller.ki);
    kv("tc", s.controller.tc);
    kv("u_min", s.controller.u_min);
    kv("u_max", s.controller.u_max);
    out << "filter_window = " << s.controller.filter_window << '\n';

    out << "\n[reference]\n";
    if (const auto* c = std::get_if<ConstantReference>(&s.reference)) {
        out << "kind = constant\n";
        kv("level", c->level);
    } else {
        const auto& e = std::get<ExponentialReference>(s.reference);
        out << "kind = exponential\n";
        kv("v0", e.v0);
        kv("vf", e.vf);
        kv("tau", e.tau);
    }

    out << "\n[events]\n";
    for (const auto& ev : s.events) {
        out << "at " << format_double(ev.time) << " set_r " << format_double(ev.resistance) << '\n';
    }

    out << "\n[sim]\n";
    kv("t_end", s.t_end);
    out << "substeps_per_period = " << s.substeps_per_period << '\n';
    kv("x0_il", s.x0.inductor_current);
    kv("x0_vc", s.x0.capacitor_voltage);
    return out.str();
}

std::size_t write_csv(std::span<const TimeSeriesRecord> series, std::ostream& out) {
    std::string text(csv_header);
    text += '\n';
    for (const auto& r : series) {
        text += format_double(r.t);
        text += ',';
        text += format_double(r.v_ref);
        text += ',';
        text += format_double(r.v_out);
        text += ',';
        text += format_double(r.i_l);
        text += ',';
        text += format_double(r.duty);
        text += ',';
        text += to_string(r.mode);
        text += ',';
        text += format_double(r.resistance);
        text += '\n';
    }
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error("failed to write CSV output");
    return text.size();
}

std::vector<TimeSeriesRecord> read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != csv_header) {
        throw std::runtime_error("CSV header mismatch");
    }
    std::vector<TimeSeriesRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::array<std::string_view, 7> fields;
        std::string_view rest = line;
        for (std::size_t i = 0; i < fields.size(); ++i) {
            const auto comma = rest.find(',');
            if ((comma == std::string_view::npos) != (i + 1 == fields.size())) {
                throw ParseError(line_no, "expected 7 CSV fields");
            }
            fields[i] = rest.substr(0, comma);
            if (comma != std::string_view::npos) rest.remove_prefix(comma + 1);
        }
        auto num = [&](std::string_view f) {
            const auto v = to_double(f);
            if (!v) throw ParseError(line_no, "bad number `" + std::string(f) + "`");
            return *v;
        };
        TimeSeriesRecord r{};
        r.t = num(fields[0]);
        r.v_ref = num(fields[1]);
        r.v_out = num(fields[2]);
        r.i_l = num(fields[3]);
        r.duty = num(fields[4]);
        if (fields[5] == "CCM") {
            r.mode = ConductionMode::ccm;
        } else if (fields[5] == "DCM") {
            r.mode = ConductionMode::dcm;
        } else {
            throw ParseError(line_no, "bad mode `" + std::string(fields[5]) + "`");
        }
        r.resistance = num(fields[6]);
        records.push_back(r);
    }
    return records;
}

namespace {

std::string gnuplot_quote(std::string_view s) {
    std::string out = "'";
    for (char ch : s) {
        if (ch == '\'') out += "''";
        else out += ch;
    }
    out += '\'';
    return out;
}

}  // namespace

std::string emit_plot_script(std::string_view csv_path, std::string_view out_path,
                             std::span<const double> event_times) {
    std::ostringstream s;
    s << "#!/usr/bin/env gnuplot\n"
      << "# Output voltage, reference and duty cycle of a closed-loop boost run.\n"
      << "set datafile separator ','\n"
      << "set key autotitle columnhead\n"
      << "set terminal svg size 960,540 dynamic\n"
      << "set output " << gnuplot_quote(out_path) << "\n"
      << "set xlabel 't [s]'\n"
      << "set ylabel 'voltage [V]'\n"
      << "set y2label 'duty'\n"
      << "set ytics nomirror\n"
      << "set y2tics\n"
      << "set y2range [0:1]\n"
      << "set grid\n";
    for (const double t : event_times) {
        s << "set arrow from " << format_double(t) << ", graph 0 to " << format_double(t)
          << ", graph 1 nohead dashtype 2 lc rgb 'gray40'\n"
          << "set label 'load step " << format_double(t) << " s' at " << format_double(t)
          << ", graph 0.97 offset 0.5,0 font ',9'\n";
    }
    const std::string data = gnuplot_quote(csv_path);
    s << "plot " << data << " using 't':'v_ref' with lines lw 2 title 'v_ref', \\\n"
      << "     " << data << " using 't':'v_out' with lines lw 1.5 title 'v_out', \\\n"
      << "     " << data << " using 't':'duty' axes x1y2 with steps lc rgb 'gray60' title 'duty'\n";
    return s.str();
}

Scenario preset(std::string_view name) {
    Scenario s = default_scenario();
    if (name == "fig2") return s;

    const ExponentialReference ramp{s.plant.input_voltage, 24.0, 0.01};
    s.reference = ramp;
    s.t_end = 0.12;
    if (name == "fig3") {
        s.plant.resistance = 100.0;
        s.events = {{0.06, 50.0}};
    } else if (name == "fig4") {
        s.plant.resistance = 60.0;
        s.events = {{0.06, 100.0}};
    } else if (name == "fig5") {
        s.plant.resistance = 100.0;
        s.events = {{0.01, 200.0}};
    } else {
        throw std::invalid_argument("unknown preset `" + std::string(name) + "`");
    }
    return s;
}

}  // namespace mfboost
