#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ispval/common.hpp"
#include "ispval/estimators.hpp"
#include "ispval/inference.hpp"
#include "ispval/matrix.hpp"
#include "ispval/oracle.hpp"
#include "ispval/proposals.hpp"

namespace ispval {

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

// Row-oriented CSV writer with stable formatting ("%.12g"), so identical data
// produces identical bytes.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header);

    void add_row(std::span<const double> values);
    void add_row_raw(std::span<const std::string> cells);
    void write(const std::filesystem::path& path) const;
    std::string to_string() const;

    static std::string format(double v);

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

// ---------------------------------------------------------------------------
// Input formats
// ---------------------------------------------------------------------------

// Draw file for the generic p-value mode:
//   optional leading comment lines starting with '#'; a line "# unnormalized"
//   marks the weights as known only up to a constant
//   header "stat,log_w"
//   first data row: the observation
//   remaining rows: the draws
struct DrawFile {
    ObservedPoint observed;
    std::vector<WeightedDraw> draws;
    bool normalized = true;
};

DrawFile read_draw_file(const std::filesystem::path& path);

// Two-line CSV: row sums, then column sums.
MarginFiber read_margin_fiber_csv(const std::filesystem::path& path);

// 0/1 grid.
BinaryMatrix read_binary_matrix_csv(const std::filesystem::path& path);
RealMatrix read_real_matrix_csv(const std::filesystem::path& path);

// Plain-text key=value configuration; '#' starts a comment.
std::map<std::string, std::string> read_key_value_config(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// JSON / report serialization
// ---------------------------------------------------------------------------

std::string confidence_set_to_json(const ConfidenceSet& cs);
void write_confidence_set_csv(const ConfidenceSet& cs, const std::filesystem::path& path);

std::string validity_report_to_json(const ValidityReport& report);
void write_validity_report_csv(const ValidityReport& report, const std::filesystem::path& path);

std::string pvalue_report_to_json(const PValueReport& report);

// ---------------------------------------------------------------------------
// Minimal SVG line plots
// ---------------------------------------------------------------------------

struct SvgSeries {
    std::string label;
    std::string color;
    std::vector<double> x;
    std::vector<double> y;
};

// Plain line plot with axes; optional y=x reference diagonal for cdf plots.
std::string render_svg_lines(const std::string& title, std::span<const SvgSeries> series,
                             bool with_diagonal = false, bool log_x = false);
void write_svg_lines(const std::filesystem::path& path, const std::string& title,
                     std::span<const SvgSeries> series, bool with_diagonal = false,
                     bool log_x = false);

}  // namespace ispval
