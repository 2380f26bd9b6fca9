#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>
#include <sstream>

#include "json_util.hpp"
#include "msvr/error.hpp"
#include "msvr/evaluation.hpp"
#include "msvr/harness.hpp"

namespace msvr {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::vector<std::string> split_cells(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double parse_cell(const std::string& cell, const std::string& origin, std::size_t row, std::size_t col) {
    double v = 0.0;
    const auto* first = cell.data();
    const auto* last = cell.data() + cell.size();
    if (!cell.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || !std::isfinite(v))
        throw InputError(origin + ": unparseable cell '" + cell + "' at row " + std::to_string(row) + ", column " +
                         std::to_string(col));
    return v;
}

// Values with trailing blanks dropped; a blank followed by a value is an error.
std::vector<double> collect(const std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>>& cells,
                            const std::string& origin) {
    std::vector<double> out;
    std::optional<std::pair<std::size_t, std::size_t>> gap;
    for (const auto& [text, where] : cells) {
        if (text.empty()) {
            if (!gap) gap = where;
            continue;
        }
        if (gap)
            throw InputError(origin + ": blank cell at row " + std::to_string(gap->first) + ", column " +
                             std::to_string(gap->second) + " is followed by data");
        out.push_back(parse_cell(text, origin, where.first, where.second));
    }
    return out;
}

} // namespace

std::vector<TimeSeries> parse_csv(const std::string& text, const std::string& origin) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        rows.push_back(split_cells(line));
    }
    if (rows.empty()) throw InputError(origin + ": empty file");
    const auto& header = rows[0];
    std::string first = header[0];
    std::transform(first.begin(), first.end(), first.begin(), [](unsigned char c) { return std::tolower(c); });

    std::vector<TimeSeries> out;
    if (first == "id" || first == "series" || first == "name") {
        for (std::size_t r = 1; r < rows.size(); ++r) {
            std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> cells;
            for (std::size_t c = 1; c < rows[r].size(); ++c) cells.push_back({rows[r][c], {r + 1, c + 1}});
            TimeSeries s;
            s.id = rows[r][0];
            s.values = collect(cells, origin);
            out.push_back(std::move(s));
        }
    } else {
        // A leading time-index column is not a series.
        const bool indexed = header.size() > 1 && (first == "t" || first == "time" || first == "index");
        for (std::size_t c = indexed ? 1 : 0; c < header.size(); ++c) {
            std::vector<std::pair<std::string, std::pair<std::size_t, std::size_t>>> cells;
            for (std::size_t r = 1; r < rows.size(); ++r) {
                if (rows[r].size() > header.size())
                    throw InputError(origin + ": row " + std::to_string(r + 1) + " has more cells than the header");
                cells.push_back({c < rows[r].size() ? rows[r][c] : std::string(), {r + 1, c + 1}});
            }
            TimeSeries s;
            s.id = header[c].empty() ? "series_" + std::to_string(c + 1) : header[c];
            s.values = collect(cells, origin);
            out.push_back(std::move(s));
        }
    }
    if (out.empty()) throw InputError(origin + ": no series found");
    for (const auto& s : out)
        if (s.values.empty()) throw InputError(origin + ": series '" + s.id + "' has no values");
    return out;
}

std::vector<TimeSeries> ingest_csv(const std::string& path) { return parse_csv(detail::read_text_file(path), path); }

std::string series_to_csv(const TimeSeries& s) {
    std::ostringstream out;
    out << "t," << (s.id.empty() ? "value" : s.id) << '\n';
    for (std::size_t i = 0; i < s.size(); ++i) out << i + 1 << ',' << format_number(s.values[i]) << '\n';
    return out.str();
}

} // namespace msvr
