#pragma once

#include <cctype>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sxm/errors.hpp"
#include "sxm/sphere.hpp"
#include "sxm/xmeans.hpp"

namespace sxm {

struct DatasetRecord {
    std::string name;
    std::size_t n = 0;
    std::size_t d = 0;
    std::size_t true_k = 1;  // distinct label count; 1 when no labels are present
    bool centered = false;
    bool normalized = false;
};

struct IngestOptions {
    bool center = false;
    bool normalize = false;
    // Label column by header name, or by 0-based index when the value
    // parses as an integer. The column is stripped from the features.
    std::optional<std::string> label_column;
};

struct IngestResult {
    Matrix raw;                       // rows after optional centering (and row drops)
    std::optional<PointSet> points;   // present when options.normalize
    std::vector<std::string> labels;  // per kept row; empty when no label column
    DatasetRecord record;
    std::size_t dropped_rows = 0;     // rows that became zero vectors before normalization
};

namespace detail {

inline bool parse_double(const std::string& cell, double& out) {
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    while (begin != end && std::isspace(static_cast<unsigned char>(*begin))) ++begin;
    while (end != begin && std::isspace(static_cast<unsigned char>(*(end - 1)))) --end;
    if (begin == end) return false;
    const auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(std::move(cell));
            cell.clear();
        } else if (c != '\r') {
            cell += c;
        }
    }
    cells.push_back(std::move(cell));
    return cells;
}

inline std::string file_stem(const std::string& path) {
    const std::size_t slash = path.find_last_of("/\\");
    const std::size_t start = slash == std::string::npos ? 0 : slash + 1;
    const std::size_t dotpos = path.find_last_of('.');
    const std::size_t end = (dotpos == std::string::npos || dotpos < start) ? path.size() : dotpos;
    return path.substr(start, end - start);
}

}  // namespace detail

// Reads a numeric CSV (optional header, optional label column, '.'
// decimal separator), then applies zero-mean centering and per-row
// normalization as requested, in that order. Rows whose norm vanishes
// before normalization are dropped and counted.
inline IngestResult ingest_csv(const std::string& path, const IngestOptions& options) {
    std::ifstream in(path);
    if (!in) throw ParseError("ingest_csv: cannot open '" + path + "'");

    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    if (lines.empty()) throw ParseError("ingest_csv: '" + path + "' is empty");
    // Strip a UTF-8 BOM if present.
    if (lines[0].size() >= 3 && lines[0].compare(0, 3, "\xEF\xBB\xBF") == 0) {
        lines[0] = lines[0].substr(3);
    }

    const std::vector<std::string> first = detail::split_csv_line(lines[0]);
    const std::size_t columns = first.size();

    std::optional<std::size_t> label_index;
    bool label_by_index = false;
    if (options.label_column) {
        double dummy;
        if (detail::parse_double(*options.label_column, dummy) &&
            options.label_column->find('.') == std::string::npos) {
            const long idx = std::stol(*options.label_column);
            if (idx < 0 || static_cast<std::size_t>(idx) >= columns) {
                throw ParseError("ingest_csv: label column index " + *options.label_column +
                                 " out of range for " + std::to_string(columns) + " columns");
            }
            label_index = static_cast<std::size_t>(idx);
            label_by_index = true;
        }
    }

    // Header detection: a first row with any non-numeric cell outside
    // the label column is a header.
    bool has_header = false;
    for (std::size_t c = 0; c < columns; ++c) {
        if (label_index && c == *label_index) continue;
        double v;
        if (!detail::parse_double(first[c], v)) {
            has_header = true;
            break;
        }
    }
    if (options.label_column && !label_by_index) {
        if (!has_header) {
            throw ParseError("ingest_csv: label column '" + *options.label_column +
                             "' requires a header row");
        }
        for (std::size_t c = 0; c < columns; ++c) {
            if (first[c] == *options.label_column) {
                label_index = c;
                break;
            }
        }
        if (!label_index) {
            throw ParseError("ingest_csv: label column '" + *options.label_column +
                             "' not found in header");
        }
    }

    const std::size_t feature_count = columns - (label_index ? 1 : 0);
    if (feature_count < 1) throw ParseError("ingest_csv: no feature columns");

    std::vector<std::vector<double>> rows;
    std::vector<std::string> labels;
    for (std::size_t r = has_header ? 1 : 0; r < lines.size(); ++r) {
        const std::vector<std::string> cells = detail::split_csv_line(lines[r]);
        if (cells.size() != columns) {
            throw ParseError("ingest_csv: row " + std::to_string(r + 1) + ": expected " +
                             std::to_string(columns) + " columns, got " +
                             std::to_string(cells.size()));
        }
        std::vector<double> row;
        row.reserve(feature_count);
        for (std::size_t c = 0; c < columns; ++c) {
            if (label_index && c == *label_index) {
                labels.push_back(cells[c]);
                continue;
            }
            double v;
            if (!detail::parse_double(cells[c], v)) {
                throw ParseError("ingest_csv: row " + std::to_string(r + 1) + ", column " +
                                 std::to_string(c + 1) + ": '" + cells[c] + "' is not numeric");
            }
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError("ingest_csv: '" + path + "' holds no data rows");

    // Column-wise zero-meaning happens before normalization.
    if (options.center) {
        std::vector<double> mean(feature_count, 0.0);
        for (const auto& row : rows) {
            for (std::size_t c = 0; c < feature_count; ++c) mean[c] += row[c];
        }
        for (double& m : mean) m /= static_cast<double>(rows.size());
        for (auto& row : rows) {
            for (std::size_t c = 0; c < feature_count; ++c) row[c] -= mean[c];
        }
    }

    IngestResult result{Matrix(feature_count), std::nullopt, {}, {}, 0};
    std::vector<std::string> kept_labels;
    if (options.normalize) {
        if (feature_count < 2) throw ParseError("ingest_csv: normalization needs dimension >= 2");
        result.points.emplace(feature_count);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (norm(rows[i]) <= kZeroNormFloor) {
                ++result.dropped_rows;
                continue;
            }
            result.points->add_normalized(rows[i]);
            result.raw.add(rows[i]);
            if (!labels.empty()) kept_labels.push_back(labels[i]);
        }
        if (result.points->size() == 0) {
            throw AllRowsDegenerate("ingest_csv: every row of '" + path +
                                    "' became a zero vector");
        }
    } else {
        for (std::size_t i = 0; i < rows.size(); ++i) result.raw.add(rows[i]);
        kept_labels = labels;
    }
    result.labels = std::move(kept_labels);

    result.record.name = detail::file_stem(path);
    result.record.n = result.raw.size();
    result.record.d = feature_count;
    result.record.centered = options.center;
    result.record.normalized = options.normalize;
    if (!result.labels.empty()) {
        const std::set<std::string> distinct(result.labels.begin(), result.labels.end());
        result.record.true_k = distinct.size();
    }
    return result;
}

inline void write_points_csv(const std::string& path, const Matrix& rows) {
    std::ofstream out(path);
    if (!out) throw Error("write_points_csv: cannot open '" + path + "' for writing");
    std::ostringstream buffer;
    buffer.precision(17);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto row = rows[i];
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) buffer << ',';
            buffer << row[c];
        }
        buffer << '\n';
    }
    out << buffer.str();
}

inline void write_points_csv(const std::string& path, const PointSet& points) {
    Matrix rows(points.dim());
    for (std::size_t i = 0; i < points.size(); ++i) rows.add(points[i]);
    write_points_csv(path, rows);
}

inline void write_labels_csv(const std::string& path, std::span<const std::uint32_t> labels) {
    std::ofstream out(path);
    if (!out) throw Error("write_labels_csv: cannot open '" + path + "' for writing");
    for (std::uint32_t label : labels) out << label << '\n';
}

}  // namespace sxm
