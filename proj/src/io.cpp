#include "cbm/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cbm {

namespace {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

std::string csv_to_string(const CsvTable& table) {
    std::ostringstream out;
    if (!table.config_json.empty()) out << "# config " << table.config_json << "\n";
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c) out << ",";
        out << table.columns[c];
    }
    out << "\n";
    for (const auto& row : table.rows) {
        if (row.size() != table.columns.size())
            throw std::invalid_argument("csv_to_string: row width mismatch");
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << ",";
            out << format_double(row[c]);
        }
        out << "\n";
    }
    return out.str();
}

CsvTable csv_from_string(const std::string& text) {
    CsvTable table;
    std::istringstream in(text);
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto pos = line.find("config ");
            if (pos != std::string::npos) table.config_json = line.substr(pos + 7);
            continue;
        }
        std::vector<std::string> cells;
        std::size_t start = 0;
        while (start <= line.size()) {
            const auto comma = line.find(',', start);
            cells.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (!header_seen) {
            table.columns = cells;
            header_seen = true;
            continue;
        }
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& cell : cells) row.push_back(std::stod(cell));
        if (row.size() != table.columns.size()) throw std::invalid_argument("csv_from_string: ragged row");
        table.rows.push_back(std::move(row));
    }
    if (!header_seen) throw std::invalid_argument("csv_from_string: missing header");
    return table;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("write_text_file: cannot open " + path.string());
    out << text;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_text_file: cannot open " + path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

namespace {

struct Range {
    double lo = 0.0, hi = 1.0;
    void include(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    static Range of(const std::vector<SvgSeries>& series, const std::vector<SvgMarker>& markers,
                    bool x_axis) {
        Range r{1e300, -1e300};
        for (const auto& s : series)
            for (double v : (x_axis ? s.x : s.y)) r.include(v);
        for (const auto& m : markers) r.include(x_axis ? m.x : m.y);
        if (r.lo > r.hi) r = {0.0, 1.0};
        if (r.hi - r.lo < 1e-12) {
            r.lo -= 0.5;
            r.hi += 0.5;
        }
        return r;
    }
};

} // namespace

std::string svg_line_plot(const std::vector<SvgSeries>& series, const std::vector<SvgMarker>& markers,
                          const std::string& x_label, const std::string& y_label,
                          const std::string& title, int width, int height) {
    const double ml = 70, mr = 20, mt = 40, mb = 50;
    const double pw = width - ml - mr, ph = height - mt - mb;
    Range rx = Range::of(series, markers, true);
    Range ry = Range::of(series, markers, false);
    auto sx = [&](double x) { return ml + (x - rx.lo) / (rx.hi - rx.lo) * pw; };
    auto sy = [&](double y) { return mt + ph - (y - ry.lo) / (ry.hi - ry.lo) * ph; };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title
        << "</text>\n";
    // axes + ticks
    out << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw << "\" y2=\"" << mt + ph
        << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << mt + ph
        << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double fx = rx.lo + (rx.hi - rx.lo) * i / 5.0;
        const double fy = ry.lo + (ry.hi - ry.lo) * i / 5.0;
        char buf[32];
        out << "<line x1=\"" << sx(fx) << "\" y1=\"" << mt + ph << "\" x2=\"" << sx(fx) << "\" y2=\""
            << mt + ph + 5 << "\" stroke=\"black\"/>\n";
        std::snprintf(buf, sizeof(buf), "%.3g", fx);
        out << "<text x=\"" << sx(fx) << "\" y=\"" << mt + ph + 20 << "\" text-anchor=\"middle\" font-size=\"11\">"
            << buf << "</text>\n";
        out << "<line x1=\"" << ml - 5 << "\" y1=\"" << sy(fy) << "\" x2=\"" << ml << "\" y2=\"" << sy(fy)
            << "\" stroke=\"black\"/>\n";
        std::snprintf(buf, sizeof(buf), "%.3g", fy);
        out << "<text x=\"" << ml - 8 << "\" y=\"" << sy(fy) + 4 << "\" text-anchor=\"end\" font-size=\"11\">"
            << buf << "</text>\n";
    }
    out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 10 << "\" text-anchor=\"middle\" font-size=\"13\">"
        << x_label << "</text>\n";
    out << "<text x=\"16\" y=\"" << mt + ph / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
        << mt + ph / 2 << ")\">" << y_label << "</text>\n";
    for (const auto& s : series) {
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) out << sx(s.x[i]) << "," << sy(s.y[i]) << " ";
        out << "\"/>\n";
    }
    double ly = mt + 14;
    for (const auto& s : series) {
        if (s.label.empty()) continue;
        out << "<line x1=\"" << ml + pw - 120 << "\" y1=\"" << ly - 4 << "\" x2=\"" << ml + pw - 100
            << "\" y2=\"" << ly - 4 << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << ml + pw - 94 << "\" y=\"" << ly << "\" font-size=\"11\">" << s.label
            << "</text>\n";
        ly += 16;
    }
    for (const auto& m : markers) {
        out << "<circle cx=\"" << sx(m.x) << "\" cy=\"" << sy(m.y) << "\" r=\"4\" fill=\"none\" stroke=\""
            << m.color << "\" stroke-width=\"1.5\"/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

} // namespace cbm
