#include "trisplit/report.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace trisplit::report {

namespace {

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string exact(double v) { return fmt("%.17g", v); }

void check_field(const std::string& s, const char* what) {
    if (s.find_first_of(",\n\r\"") != std::string::npos) {
        throw ReportError(std::string("csv: ") + what + " '" + s + "' contains a separator or quote");
    }
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    for (;;) {
        const auto c = line.find(',');
        out.push_back(line.substr(0, c));
        if (c == std::string_view::npos) break;
        line.remove_prefix(c + 1);
    }
    return out;
}

template <class T>
T number(std::string_view s, int line, const char* column) {
    T v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw ReportError("csv line " + std::to_string(line) + ": bad " + column + " '" + std::string(s) + "'");
    }
    return v;
}

std::string escape_xml(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::map<std::string, Series> group(const std::vector<WorkPrecisionRecord>& records, bool by_wall) {
    std::map<std::string, Series> g;
    for (const auto& r : records) {
        auto& s = g[r.method];
        s.name = r.method;
        s.points.emplace_back(by_wall ? r.wall_seconds : r.dt, r.error);
    }
    for (auto& [_, s] : g) std::sort(s.points.begin(), s.points.end());
    return g;
}

}  // namespace

std::string records_csv(const std::vector<WorkPrecisionRecord>& records) {
    std::string out(records_header);
    out += '\n';
    for (const auto& r : records) {
        check_field(r.method, "method");
        check_field(r.metric, "metric");
        out += r.method + ',' + exact(r.dt) + ',' + std::to_string(r.steps) + ',' + r.metric + ',' + exact(r.error) +
               ',' + exact(r.wall_seconds) + ',' + std::to_string(r.repeats) + '\n';
    }
    return out;
}

std::vector<WorkPrecisionRecord> parse_records_csv(std::string_view text) {
    std::vector<WorkPrecisionRecord> out;
    int line_no = 0;
    bool header_seen = false;
    while (!text.empty()) {
        const auto eol = text.find('\n');
        std::string_view line = text.substr(0, eol);
        text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (!header_seen) {
            if (line != records_header) throw ReportError("csv: unexpected header '" + std::string(line) + "'");
            header_seen = true;
            continue;
        }
        const auto f = split(line);
        if (f.size() != 7) {
            throw ReportError("csv line " + std::to_string(line_no) + ": expected 7 fields, got " +
                              std::to_string(f.size()));
        }
        WorkPrecisionRecord r;
        r.method = std::string(f[0]);
        r.dt = number<double>(f[1], line_no, "dt");
        r.steps = number<long>(f[2], line_no, "steps");
        r.metric = std::string(f[3]);
        r.error = number<double>(f[4], line_no, "error");
        r.wall_seconds = number<double>(f[5], line_no, "wall_seconds");
        r.repeats = number<int>(f[6], line_no, "repeats");
        out.push_back(std::move(r));
    }
    if (!header_seen) throw ReportError("csv: missing header");
    return out;
}

std::string brusselator_csv(const std::vector<WorkPrecisionRecord>& records) {
    std::string out(brusselator_header);
    out += '\n';
    for (const auto& r : records) {
        check_field(r.method, "method");
        out += r.method + ',' + exact(r.dt) + ',' + std::to_string(r.steps) + ',' + exact(r.error) + ',' +
               exact(r.wall_seconds) + '\n';
    }
    return out;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw ReportError("cannot write " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ReportError("cannot read " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::optional<double> loglog_slope(const std::vector<std::pair<double, double>>& points) {
    double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto [x, y] : points) {
        if (!(x > 0.0) || !(y > 0.0) || !std::isfinite(x) || !std::isfinite(y)) continue;
        const double lx = std::log(x), ly = std::log(y);
        n += 1;
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double den = n * sxx - sx * sx;
    if (n < 2 || den <= 1e-300) return std::nullopt;
    return (n * sxy - sx * sy) / den;
}

std::string render_svg(const Plot& plot) {
    constexpr double W = 720, H = 500, left = 80, right = 200, top = 40, bottom = 60;
    constexpr std::array<const char*, 8> colors = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                   "#9467bd", "#8c564b", "#e377c2", "#17becf"};

    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (const auto& s : plot.series) {
        for (auto [x, y] : s.points) {
            if (!(x > 0.0) || !(y > 0.0)) continue;
            xmin = std::min(xmin, std::log10(x));
            xmax = std::max(xmax, std::log10(x));
            ymin = std::min(ymin, std::log10(y));
            ymax = std::max(ymax, std::log10(y));
        }
    }
    if (!std::isfinite(xmin)) throw ReportError("svg: no positive data to plot");
    xmin = std::floor(xmin);
    xmax = std::max(std::ceil(xmax), xmin + 1);
    ymin = std::floor(ymin);
    ymax = std::max(std::ceil(ymax), ymin + 1);

    const double pw = W - left - right, ph = H - top - bottom;
    auto px = [&](double x) { return left + (std::log10(x) - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return top + (ymax - std::log10(y)) / (ymax - ymin) * ph; };

    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << left + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
      << escape_xml(plot.title) << "</text>\n";

    for (int d = static_cast<int>(xmin); d <= static_cast<int>(xmax); ++d) {
        const double x = px(std::pow(10.0, d));
        o << "<line x1=\"" << x << "\" y1=\"" << top << "\" x2=\"" << x << "\" y2=\"" << top + ph
          << "\" stroke=\"#ddd\"/>\n";
        o << "<text x=\"" << x << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">1e" << d << "</text>\n";
    }
    for (int d = static_cast<int>(ymin); d <= static_cast<int>(ymax); ++d) {
        const double y = py(std::pow(10.0, d));
        o << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << left + pw << "\" y2=\"" << y
          << "\" stroke=\"#ddd\"/>\n";
        o << "<text x=\"" << left - 8 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">1e" << d << "</text>\n";
    }
    o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    o << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">"
      << escape_xml(plot.x_label) << "</text>\n";
    o << "<text transform=\"translate(20," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape_xml(plot.y_label) << "</text>\n";

    for (std::size_t i = 0; i < plot.series.size(); ++i) {
        const auto& s = plot.series[i];
        const char* c = colors[i % colors.size()];
        std::string pts;
        for (auto [x, y] : s.points) {
            if (!(x > 0.0) || !(y > 0.0)) continue;
            pts += fmt("%.2f", px(x)) + ',' + fmt("%.2f", py(y)) + ' ';
        }
        o << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"" << pts << "\"/>\n";
        for (auto [x, y] : s.points) {
            if (!(x > 0.0) || !(y > 0.0)) continue;
            o << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"" << c << "\"/>\n";
        }

        const double ly = top + 16 + 20.0 * i;
        std::string label = s.name;
        if (plot.annotate_slopes) {
            if (auto p = loglog_slope(s.points)) label += " (slope " + fmt("%.2f", *p) + ")";
        }
        o << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << left + pw + 32 << "\" y2=\""
          << ly - 4 << "\" stroke=\"" << c << "\" stroke-width=\"2\"/>\n";
        o << "<text x=\"" << left + pw + 38 << "\" y=\"" << ly << "\">" << escape_xml(label) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

Plot convergence_plot(const std::vector<WorkPrecisionRecord>& records) {
    Plot p;
    p.title = "Convergence";
    p.x_label = "dt";
    p.y_label = records.empty() ? "error" : records.front().metric;
    for (auto& [_, s] : group(records, false)) p.series.push_back(std::move(s));
    return p;
}

Plot work_precision_plot(const std::vector<WorkPrecisionRecord>& records) {
    Plot p;
    p.title = "Work-precision";
    p.x_label = "wall-clock seconds";
    p.y_label = records.empty() ? "error" : records.front().metric;
    p.annotate_slopes = false;
    for (auto& [_, s] : group(records, true)) p.series.push_back(std::move(s));
    return p;
}

std::vector<std::filesystem::path> emit_report(const std::vector<WorkPrecisionRecord>& records, Format format,
                                               const std::filesystem::path& dir, const std::string& stem) {
    if (records.empty()) throw ReportError("emit_report: no records");
    std::vector<std::filesystem::path> written;
    if (format == Format::csv) {
        written.push_back(dir / (stem + ".csv"));
        write_text(written.back(), records_csv(records));
    } else {
        written.push_back(dir / (stem + "_convergence.svg"));
        write_text(written.back(), render_svg(convergence_plot(records)));
        written.push_back(dir / (stem + "_work_precision.svg"));
        write_text(written.back(), render_svg(work_precision_plot(records)));
    }
    return written;
}

}  // namespace trisplit::report
