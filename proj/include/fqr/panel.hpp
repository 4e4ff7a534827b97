#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "fqr/errors.hpp"

namespace fqr {

// ---------------------------------------------------------------------------
// Calendar dates (ISO-8601, ordering only; the panels are daily series)
// ---------------------------------------------------------------------------

struct Date {
    int year = 0;
    int month = 0;
    int day = 0;

    friend auto operator<=>(const Date&, const Date&) = default;
};

inline bool is_valid(const Date& d) {
    static constexpr int days_in[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (d.month < 1 || d.month > 12 || d.day < 1) return false;
    int dim = days_in[d.month - 1];
    const bool leap = (d.year % 4 == 0 && d.year % 100 != 0) || d.year % 400 == 0;
    if (d.month == 2 && leap) dim = 29;
    return d.day <= dim;
}

inline Date parse_date(const std::string& text) {
    Date d;
    char extra = 0;
    if (std::sscanf(text.c_str(), "%4d-%2d-%2d%c", &d.year, &d.month, &d.day, &extra) != 3 ||
        text.size() != 10 || !is_valid(d)) {
        throw DataError("unparseable date '" + text + "' (expected YYYY-MM-DD)");
    }
    return d;
}

inline std::string to_string(const Date& d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

// ---------------------------------------------------------------------------
// Panel types
// ---------------------------------------------------------------------------

/// One reporting unit: an identifying code plus its dated daily death counts.
struct RawUnit {
    std::string label;
    std::string name;
    std::string region;
    long long population = 0;
    std::vector<Date> dates;        // strictly increasing after parse
    std::vector<long long> deaths;  // raw counts; may contain negative corrections
};

struct RawPanel {
    std::vector<RawUnit> units;
};

/// Per-million daily mortality, each row aligned to its unit's first death
/// day and truncated to the common length m.
struct AlignedPanel {
    std::vector<std::string> labels;
    std::vector<std::string> names;
    std::vector<std::string> regions;
    std::vector<long long> populations;
    Eigen::MatrixXd values;  // n x m, deaths per million per day

    Eigen::VectorXd day_grid() const {
        return Eigen::VectorXd::LinSpaced(values.cols(), 0.0, double(values.cols() - 1));
    }
};

/// Log-domain panel: y = log10(x + delta) applied entrywise.
struct LogPanel {
    std::vector<std::string> labels;
    std::vector<std::string> names;
    std::vector<std::string> regions;
    std::vector<long long> populations;
    Eigen::MatrixXd values;  // n x m, log10(deaths per million + delta)
    double delta = 0.01;

    Eigen::VectorXd day_grid() const {
        return Eigen::VectorXd::LinSpaced(values.cols(), 0.0, double(values.cols() - 1));
    }
};

// ---------------------------------------------------------------------------
// CSV ingestion
// ---------------------------------------------------------------------------

struct CsvFormat {
    char delimiter = ',';
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line, char delim) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == delim) {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

inline long long parse_integer(const std::string& text, const char* what, long line_no) {
    std::size_t pos = 0;
    long long v = 0;
    try {
        v = std::stoll(text, &pos);
    } catch (const std::exception&) {
        pos = 0;
    }
    if (text.empty() || pos != text.size()) {
        throw DataError("line " + std::to_string(line_no) + ": malformed " + what + " '" + text + "'");
    }
    return v;
}

inline std::string trimmed(std::string s) {
    const auto issp = [](unsigned char c) { return c == ' ' || c == '\t' || c == '\r'; };
    while (!s.empty() && issp(s.back())) s.pop_back();
    std::size_t b = 0;
    while (b < s.size() && issp(s[b])) ++b;
    return s.substr(b);
}

}  // namespace detail

/// Parses a long-format CSV with header date,label,name,region,deaths,population
/// (columns located by name, extra columns ignored). One unit per distinct
/// label, series sorted by date. Errors carry the offending line number.
inline RawPanel parse_panel(std::istream& in, const CsvFormat& format = {}) {
    std::string line;
    long line_no = 0;
    if (!std::getline(in, line)) throw DataError("empty input: header row required");
    ++line_no;

    const auto header = detail::split_csv_line(detail::trimmed(line), format.delimiter);
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[detail::trimmed(header[i])] = i;
    for (const char* required : {"date", "label", "name", "region", "deaths", "population"}) {
        if (!col.count(required)) {
            throw DataError(std::string("missing required column '") + required + "' in header");
        }
    }
    const std::size_t need = 1 + std::max({col["date"], col["label"], col["name"], col["region"],
                                           col["deaths"], col["population"]});

    RawPanel panel;
    std::map<std::string, std::size_t> unit_index;  // label -> position in panel.units

    while (std::getline(in, line)) {
        ++line_no;
        line = detail::trimmed(line);
        if (line.empty()) continue;
        const auto fields = detail::split_csv_line(line, format.delimiter);
        if (fields.size() < need) {
            throw DataError("line " + std::to_string(line_no) + ": expected at least " +
                            std::to_string(need) + " fields, got " + std::to_string(fields.size()));
        }
        const std::string label = detail::trimmed(fields[col["label"]]);
        if (label.empty()) throw DataError("line " + std::to_string(line_no) + ": empty unit label");
        Date date;
        try {
            date = parse_date(detail::trimmed(fields[col["date"]]));
        } catch (const DataError& e) {
            throw DataError("line " + std::to_string(line_no) + ": " + e.what());
        }
        const long long deaths = detail::parse_integer(detail::trimmed(fields[col["deaths"]]),
                                                       "death count", line_no);
        const long long population = detail::parse_integer(detail::trimmed(fields[col["population"]]),
                                                           "population", line_no);
        if (population <= 0) {
            throw DataError("line " + std::to_string(line_no) + ": nonpositive population for unit '" +
                            label + "'");
        }

        auto it = unit_index.find(label);
        if (it == unit_index.end()) {
            RawUnit unit;
            unit.label = label;
            unit.name = detail::trimmed(fields[col["name"]]);
            unit.region = detail::trimmed(fields[col["region"]]);
            unit.population = population;
            it = unit_index.emplace(label, panel.units.size()).first;
            panel.units.push_back(std::move(unit));
        }
        RawUnit& unit = panel.units[it->second];
        if (unit.population != population) {
            throw DataError("line " + std::to_string(line_no) + ": population of unit '" + label +
                            "' changed from " + std::to_string(unit.population) + " to " +
                            std::to_string(population));
        }
        if (std::find(unit.dates.begin(), unit.dates.end(), date) != unit.dates.end()) {
            throw DataError("line " + std::to_string(line_no) + ": duplicate date " + to_string(date) +
                            " for unit '" + label + "'");
        }
        unit.dates.push_back(date);
        unit.deaths.push_back(deaths);
    }

    for (auto& unit : panel.units) {
        std::vector<std::size_t> order(unit.dates.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return unit.dates[a] < unit.dates[b]; });
        std::vector<Date> dates(order.size());
        std::vector<long long> deaths(order.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
            dates[i] = unit.dates[order[i]];
            deaths[i] = unit.deaths[order[i]];
        }
        unit.dates = std::move(dates);
        unit.deaths = std::move(deaths);
    }
    return panel;
}

// ---------------------------------------------------------------------------
// Normalization, alignment, repair, log mapping
// ---------------------------------------------------------------------------

/// Daily deaths normalized to population size, in deaths per million per day.
inline double per_million(double deaths, long long population) {
    if (population <= 0) throw DataError("nonpositive population");
    return deaths / double(population) * 1e6;
}

/// Aligns each unit to its first day with deaths > 0, truncates all rows to
/// the shortest aligned length, and converts entries to per-million rates.
inline AlignedPanel align_truncate(const RawPanel& panel) {
    if (panel.units.empty()) throw DataError("panel has no units");

    std::vector<std::size_t> offsets(panel.units.size());
    std::size_t m = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i < panel.units.size(); ++i) {
        const auto& unit = panel.units[i];
        std::size_t first = unit.deaths.size();
        for (std::size_t j = 0; j < unit.deaths.size(); ++j) {
            if (unit.deaths[j] > 0) {
                first = j;
                break;
            }
        }
        if (first == unit.deaths.size()) {
            throw DataError("unit '" + unit.label + "' has no day with deaths > 0; cannot align");
        }
        offsets[i] = first;
        m = std::min(m, unit.deaths.size() - first);
    }

    AlignedPanel out;
    out.values.resize(Eigen::Index(panel.units.size()), Eigen::Index(m));
    for (std::size_t i = 0; i < panel.units.size(); ++i) {
        const auto& unit = panel.units[i];
        out.labels.push_back(unit.label);
        out.names.push_back(unit.name);
        out.regions.push_back(unit.region);
        out.populations.push_back(unit.population);
        for (std::size_t j = 0; j < m; ++j) {
            out.values(Eigen::Index(i), Eigen::Index(j)) =
                per_million(double(unit.deaths[offsets[i] + j]), unit.population);
        }
    }
    return out;
}

/// Removes negative artifacts by averaging each negative sample with its
/// neighbors: every window entry becomes the window mean. Boundary windows
/// shrink to the available samples. Scans repeat until the series is
/// nonnegative; throws if a scan stalls or the pass limit is hit.
/// `repaired_windows`, when given, accumulates the number of window repairs.
inline Eigen::VectorXd repair_negatives(const Eigen::VectorXd& series, int max_passes = 100,
                                        int* repaired_windows = nullptr) {
    const Eigen::Index m = series.size();
    if (m < 3) throw DataError("negative repair requires a series of at least 3 samples");

    Eigen::VectorXd x = series;
    for (int pass = 0; pass < max_passes; ++pass) {
        bool changed = false;
        for (Eigen::Index j = 0; j < m; ++j) {
            if (!(x[j] < 0.0)) continue;
            const Eigen::Index lo = std::max<Eigen::Index>(0, j - 1);
            const Eigen::Index hi = std::min<Eigen::Index>(m - 1, j + 1);
            const double mean = x.segment(lo, hi - lo + 1).mean();
            for (Eigen::Index t = lo; t <= hi; ++t) {
                if (x[t] != mean) changed = true;
                x[t] = mean;
            }
            if (repaired_windows) ++*repaired_windows;
        }
        if (!(x.array() < 0.0).any()) return x;
        if (!changed) break;
    }

    Eigen::Index bad = 0;
    for (Eigen::Index j = 0; j < m; ++j) {
        if (x[j] < 0.0) {
            bad = j;
            break;
        }
    }
    throw DataError("negative value persists at index " + std::to_string(bad) +
                    " after repair passes");
}

/// Row-wise repair of a whole panel. Returns the number of window repairs.
inline int repair_panel(AlignedPanel& panel, int max_passes = 100) {
    int repairs = 0;
    for (Eigen::Index i = 0; i < panel.values.rows(); ++i) {
        panel.values.row(i) = repair_negatives(panel.values.row(i).transpose(), max_passes, &repairs);
    }
    return repairs;
}

/// Maps per-million rates into the log domain: y = log10(x + delta).
inline LogPanel log_map(const AlignedPanel& panel, double delta) {
    if (!(delta > 0.0)) throw DataError("delta must be positive");
    for (Eigen::Index i = 0; i < panel.values.rows(); ++i) {
        for (Eigen::Index j = 0; j < panel.values.cols(); ++j) {
            if (panel.values(i, j) < 0.0) {
                throw DataError("negative entry at unit '" + panel.labels[std::size_t(i)] + "', day " +
                                std::to_string(j) + "; repair negatives before the log mapping");
            }
        }
    }
    LogPanel out;
    out.labels = panel.labels;
    out.names = panel.names;
    out.regions = panel.regions;
    out.populations = panel.populations;
    out.delta = delta;
    out.values = (panel.values.array() + delta).log10();
    return out;
}

/// Inverse of log_map: x = max(10^y - delta, 0). The clamp keeps recovered
/// mortality nonnegative.
inline Eigen::MatrixXd inverse_map(const Eigen::MatrixXd& log_values, double delta) {
    if (!(delta > 0.0)) throw DataError("delta must be positive");
    Eigen::ArrayXXd powered =
        log_values.array().unaryExpr([](double y) { return std::pow(10.0, y); });
    return (powered - delta).max(0.0);
}

}  // namespace fqr
