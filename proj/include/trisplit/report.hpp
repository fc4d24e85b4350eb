#ifndef TRISPLIT_REPORT_HPP
#define TRISPLIT_REPORT_HPP

#include "trisplit/harness.hpp"

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace trisplit::report {

using harness::WorkPrecisionRecord;

class ReportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::string_view records_header = "method,dt,steps,metric,error,wall_seconds,repeats";
inline constexpr std::string_view brusselator_header = "method,dt,steps,mrms,wall_seconds";

/// `records_header` followed by one row per record. Reals are written with 17
/// significant digits so parsing gives back identical values.
std::string records_csv(const std::vector<WorkPrecisionRecord>& records);
std::vector<WorkPrecisionRecord> parse_records_csv(std::string_view text);

/// Brusselator work-precision table (`brusselator_header`); the error column
/// holds the MRMS value.
std::string brusselator_csv(const std::vector<WorkPrecisionRecord>& records);

void write_text(const std::filesystem::path& path, std::string_view text);
std::string read_text(const std::filesystem::path& path);

struct Series {
    std::string name;
    std::vector<std::pair<double, double>> points;  // (x, y), both positive
};

struct Plot {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
    bool annotate_slopes = true;
};

/// Least-squares slope of log y against log x; nullopt with fewer than two
/// usable points.
std::optional<double> loglog_slope(const std::vector<std::pair<double, double>>& points);

/// Static log-log SVG. With annotate_slopes each series is labelled with its
/// fitted slope, printed as "%.2f".
std::string render_svg(const Plot& plot);

/// Error against dt, one series per method.
Plot convergence_plot(const std::vector<WorkPrecisionRecord>& records);
/// Error against wall seconds, one series per method.
Plot work_precision_plot(const std::vector<WorkPrecisionRecord>& records);

enum class Format { csv, svg };

/// Writes `<stem>.csv`, or `<stem>_convergence.svg` and
/// `<stem>_work_precision.svg`, into `dir`. Returns the written paths.
std::vector<std::filesystem::path> emit_report(const std::vector<WorkPrecisionRecord>& records, Format format,
                                               const std::filesystem::path& dir, const std::string& stem);

}  // namespace trisplit::report

#endif
