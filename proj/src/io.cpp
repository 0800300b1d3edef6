#include "ispval/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ispval {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        // trim spaces
        std::size_t b = cell.find_first_not_of(" \t\r");
        std::size_t e = cell.find_last_not_of(" \t\r");
        cells.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

double parse_double(const std::string& s, long line) {
    try {
        std::size_t pos = 0;
        if (s == "-inf") return kNegInf;
        if (s == "inf") return kPosInf;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("cannot parse number '" + s + "'", line);
    }
}

int parse_int(const std::string& s, long line) {
    try {
        std::size_t pos = 0;
        int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("cannot parse integer '" + s + "'", line);
    }
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return lines;
}

}  // namespace

// ---------------------------------------------------------------------------

CsvWriter::CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

std::string CsvWriter::format(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void CsvWriter::add_row(std::span<const double> values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format(v));
    rows_.push_back(std::move(cells));
}

void CsvWriter::add_row_raw(std::span<const std::string> cells) {
    rows_.emplace_back(cells.begin(), cells.end());
}

std::string CsvWriter::to_string() const {
    std::string out;
    for (std::size_t i = 0; i < header_.size(); ++i) {
        if (i) out += ',';
        out += header_[i];
    }
    out += '\n';
    for (const auto& row : rows_) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += row[i];
        }
        out += '\n';
    }
    return out;
}

void CsvWriter::write(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << to_string();
}

// ---------------------------------------------------------------------------

DrawFile read_draw_file(const std::filesystem::path& path) {
    std::vector<std::string> lines = read_lines(path);
    bool normalized = true;
    std::size_t i = 0;
    for (; i < lines.size(); ++i) {
        const std::string& l = lines[i];
        if (l.empty()) continue;
        if (l[0] == '#') {
            if (l.find("unnormalized") != std::string::npos) normalized = false;
            continue;
        }
        break;
    }
    if (i >= lines.size()) throw ParseError("missing header 'stat,log_w'", static_cast<long>(lines.size()));
    std::vector<std::string> header = split_csv_line(lines[i]);
    if (header.size() != 2 || header[0] != "stat" || header[1] != "log_w")
        throw ParseError("header must be 'stat,log_w'", static_cast<long>(i + 1));
    ++i;

    std::optional<ObservedPoint> observed;
    std::vector<WeightedDraw> draws;
    for (; i < lines.size(); ++i) {
        const std::string& l = lines[i];
        if (l.empty() || l[0] == '#') continue;
        long lineno = static_cast<long>(i + 1);
        std::vector<std::string> cells = split_csv_line(l);
        if (cells.size() != 2) throw ParseError("expected two columns", lineno);
        double stat = parse_double(cells[0], lineno);
        double log_w = parse_double(cells[1], lineno);
        try {
            if (!observed) {
                observed.emplace(stat, LogWeight(log_w, normalized));
            } else {
                draws.emplace_back(stat, LogWeight(log_w, normalized));
            }
        } catch (const Error& e) {
            throw ParseError(e.what(), lineno);
        }
    }
    if (!observed) throw ParseError("missing observation row", static_cast<long>(lines.size()));
    return DrawFile{*observed, std::move(draws), normalized};
}

MarginFiber read_margin_fiber_csv(const std::filesystem::path& path) {
    std::vector<std::string> lines = read_lines(path);
    std::vector<std::vector<int>> rows;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty() || lines[i][0] == '#') continue;
        std::vector<int> v;
        for (const auto& cell : split_csv_line(lines[i]))
            v.push_back(parse_int(cell, static_cast<long>(i + 1)));
        rows.push_back(std::move(v));
    }
    if (rows.size() != 2)
        throw ParseError("margin file must hold two lines: row sums, column sums",
                         static_cast<long>(lines.size()));
    return MarginFiber(std::move(rows[0]), std::move(rows[1]));
}

BinaryMatrix read_binary_matrix_csv(const std::filesystem::path& path) {
    std::vector<std::string> lines = read_lines(path);
    std::vector<std::vector<int>> rows;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty() || lines[i][0] == '#') continue;
        std::vector<int> v;
        for (const auto& cell : split_csv_line(lines[i])) {
            int b = parse_int(cell, static_cast<long>(i + 1));
            if (b != 0 && b != 1) throw ParseError("matrix entries must be 0/1", static_cast<long>(i + 1));
            v.push_back(b);
        }
        if (!rows.empty() && v.size() != rows[0].size())
            throw ParseError("ragged matrix row", static_cast<long>(i + 1));
        rows.push_back(std::move(v));
    }
    if (rows.empty()) throw ParseError("empty matrix file", 1);
    BinaryMatrix x(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (int i = 0; i < x.rows(); ++i)
        for (int j = 0; j < x.cols(); ++j) x.set(i, j, static_cast<std::uint8_t>(rows[i][j]));
    return x;
}

RealMatrix read_real_matrix_csv(const std::filesystem::path& path) {
    std::vector<std::string> lines = read_lines(path);
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (lines[i].empty() || lines[i][0] == '#') continue;
        std::vector<double> v;
        for (const auto& cell : split_csv_line(lines[i]))
            v.push_back(parse_double(cell, static_cast<long>(i + 1)));
        if (!rows.empty() && v.size() != rows[0].size())
            throw ParseError("ragged matrix row", static_cast<long>(i + 1));
        rows.push_back(std::move(v));
    }
    if (rows.empty()) throw ParseError("empty matrix file", 1);
    RealMatrix x(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
    for (int i = 0; i < x.rows(); ++i)
        for (int j = 0; j < x.cols(); ++j) x(i, j) = rows[i][j];
    return x;
}

std::map<std::string, std::string> read_key_value_config(const std::filesystem::path& path) {
    std::vector<std::string> lines = read_lines(path);
    std::map<std::string, std::string> out;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        std::string l = lines[i];
        std::size_t hash = l.find('#');
        if (hash != std::string::npos) l = l.substr(0, hash);
        std::size_t b = l.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        std::size_t eq = l.find('=');
        if (eq == std::string::npos)
            throw ParseError("expected key=value", static_cast<long>(i + 1));
        auto trim = [](std::string s) {
            std::size_t b2 = s.find_first_not_of(" \t");
            std::size_t e2 = s.find_last_not_of(" \t");
            return b2 == std::string::npos ? std::string() : s.substr(b2, e2 - b2 + 1);
        };
        std::string key = trim(l.substr(0, eq));
        std::string value = trim(l.substr(eq + 1));
        if (key.empty()) throw ParseError("empty key", static_cast<long>(i + 1));
        out[key] = value;
    }
    return out;
}

// ---------------------------------------------------------------------------

std::string confidence_set_to_json(const ConfidenceSet& cs) {
    nlohmann::json j;
    j["alpha"] = cs.alpha;
    j["grid"] = cs.grid;
    j["pvalues"] = cs.pvalues;
    j["retained"] = std::vector<bool>(cs.retained.begin(), cs.retained.end());
    j["contiguous"] = cs.contiguous;
    if (cs.hull) {
        j["hull"] = {{"lo", cs.hull->first}, {"hi", cs.hull->second}};
    } else {
        j["hull"] = nullptr;
    }
    return j.dump(2);
}

void write_confidence_set_csv(const ConfidenceSet& cs, const std::filesystem::path& path) {
    CsvWriter csv({"theta", "pvalue", "retained"});
    for (std::size_t i = 0; i < cs.grid.size(); ++i) {
        double row[3] = {cs.grid[i], cs.pvalues[i], cs.retained[i] ? 1.0 : 0.0};
        csv.add_row(row);
    }
    csv.write(path);
}

std::string validity_report_to_json(const ValidityReport& report) {
    nlohmann::json j;
    j["replications"] = report.replications;
    j["k_sigma"] = report.k_sigma;
    j["alphas"] = report.alphas;
    j["cdf_hat"] = report.cdf_hat;
    j["se"] = report.se;
    std::vector<std::string> verdicts;
    for (bool v : report.violation) verdicts.push_back(v ? "Violation" : "Valid");
    j["verdict"] = verdicts;
    return j.dump(2);
}

void write_validity_report_csv(const ValidityReport& report,
                               const std::filesystem::path& path) {
    CsvWriter csv({"alpha", "cdf_hat", "se", "verdict"});
    for (std::size_t i = 0; i < report.alphas.size(); ++i) {
        std::vector<std::string> cells = {
            CsvWriter::format(report.alphas[i]), CsvWriter::format(report.cdf_hat[i]),
            CsvWriter::format(report.se[i]), report.violation[i] ? "Violation" : "Valid"};
        csv.add_row_raw(cells);
    }
    csv.write(path);
}

std::string pvalue_report_to_json(const PValueReport& report) {
    nlohmann::json j;
    j["estimate"] = report.estimate;
    j["clamped"] = report.clamped();
    j["kind"] = estimator_name(report.kind);
    j["n"] = report.n;
    if (report.std_error)
        j["std_error"] = *report.std_error;
    else
        j["std_error"] = nullptr;
    return j.dump(2);
}

// ---------------------------------------------------------------------------

std::string render_svg_lines(const std::string& title, std::span<const SvgSeries> series,
                             bool with_diagonal, bool log_x) {
    const double W = 640, H = 480, ml = 70, mr = 20, mt = 40, mb = 50;
    double xmin = kPosInf, xmax = kNegInf, ymin = kPosInf, ymax = kNegInf;
    auto tx = [&](double x) { return log_x ? std::log10(x) : x; };
    for (const auto& s : series) {
        for (double x : s.x) {
            xmin = std::min(xmin, tx(x));
            xmax = std::max(xmax, tx(x));
        }
        for (double y : s.y) {
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    }
    if (!(xmax > xmin)) xmax = xmin + 1;
    if (!(ymax > ymin)) ymax = ymin + 1;
    auto px = [&](double x) { return ml + (tx(x) - xmin) / (xmax - xmin) * (W - ml - mr); };
    auto py = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };

    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H
        << "' viewBox='0 0 " << W << " " << H << "'>\n";
    svg << "<rect width='100%' height='100%' fill='white'/>\n";
    svg << "<text x='" << W / 2 << "' y='24' text-anchor='middle' font-size='16'>" << title
        << "</text>\n";
    svg << "<line x1='" << ml << "' y1='" << H - mb << "' x2='" << W - mr << "' y2='"
        << H - mb << "' stroke='black'/>\n";
    svg << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='" << H - mb
        << "' stroke='black'/>\n";
    char buf[64];
    for (int k = 0; k <= 4; ++k) {
        double fx = xmin + (xmax - xmin) * k / 4.0;
        double fy = ymin + (ymax - ymin) * k / 4.0;
        double sx = ml + (W - ml - mr) * k / 4.0;
        double sy = H - mb - (H - mt - mb) * k / 4.0;
        std::snprintf(buf, sizeof(buf), "%.3g", log_x ? std::pow(10.0, fx) : fx);
        svg << "<text x='" << sx << "' y='" << H - mb + 18
            << "' text-anchor='middle' font-size='11'>" << buf << "</text>\n";
        std::snprintf(buf, sizeof(buf), "%.3g", fy);
        svg << "<text x='" << ml - 6 << "' y='" << sy + 4
            << "' text-anchor='end' font-size='11'>" << buf << "</text>\n";
    }
    if (with_diagonal) {
        double lo = std::max(xmin, ymin), hi = std::min(xmax, ymax);
        if (hi > lo)
            svg << "<line x1='" << ml + (lo - xmin) / (xmax - xmin) * (W - ml - mr)
                << "' y1='" << py(lo) << "' x2='" << ml + (hi - xmin) / (xmax - xmin) * (W - ml - mr)
                << "' y2='" << py(hi) << "' stroke='gray' stroke-dasharray='4 3'/>\n";
    }
    double legend_y = mt + 4;
    for (const auto& s : series) {
        svg << "<polyline fill='none' stroke='" << s.color << "' stroke-width='1.5' points='";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            svg << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
        svg << "'/>\n";
        svg << "<text x='" << W - mr - 150 << "' y='" << legend_y
            << "' font-size='12' fill='" << s.color << "'>" << s.label << "</text>\n";
        legend_y += 16;
    }
    svg << "</svg>\n";
    return svg.str();
}

void write_svg_lines(const std::filesystem::path& path, const std::string& title,
                     std::span<const SvgSeries> series, bool with_diagonal,
                     bool log_x) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    out << render_svg_lines(title, series, with_diagonal, log_x);
}

}  // namespace ispval
