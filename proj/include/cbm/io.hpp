// Artifact I/O: CSV tables with an embedded config comment, JSON manifests,
// and a small self-contained SVG line plot. Every emitted file carries the
// resolved run configuration so reruns are reproducible from the artifact
// alone.

#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace cbm {

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
    std::string config_json; // echoed as a "# config ..." comment line
};

std::string csv_to_string(const CsvTable& table);
CsvTable csv_from_string(const std::string& text);
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

struct SvgSeries {
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f77b4";
    std::string label;
};

struct SvgMarker {
    double x = 0.0;
    double y = 0.0;
    std::string color = "#d62728";
};

// Minimal line plot with axes, tick labels, optional circle markers.
std::string svg_line_plot(const std::vector<SvgSeries>& series, const std::vector<SvgMarker>& markers,
                          const std::string& x_label, const std::string& y_label,
                          const std::string& title, int width = 720, int height = 480);

} // namespace cbm
