#pragma once

// Tabular experiment reports, emitted as versioned CSV or JSON. Reals are written with 12
// significant digits in both formats.

#include "sqsieve/errors.hpp"

#include <json.hpp>

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace sqsieve::cli {

using Cell = std::variant<std::int64_t, std::uint64_t, double, bool, std::string>;

inline std::string format_real(double x)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

inline std::string format_cell(const Cell& c)
{
    struct
    {
        std::string operator()(std::int64_t v) const { return std::to_string(v); }
        std::string operator()(std::uint64_t v) const { return std::to_string(v); }
        std::string operator()(double v) const { return format_real(v); }
        std::string operator()(bool v) const { return v ? "true" : "false"; }
        std::string operator()(const std::string& v) const { return v; }
    } visitor;
    return std::visit(visitor, c);
}

struct Summary
{
    std::uint64_t rows = 0;
    std::uint64_t passed = 0;
    std::uint64_t failed = 0;
    std::map<std::string, double> maxima; // named max ratios / deviations

    void record(bool ok)
    {
        ++rows;
        (ok ? passed : failed) += 1;
    }

    void track_max(const std::string& name, double value)
    {
        auto [it, inserted] = maxima.emplace(name, value);
        if (!inserted && value > it->second)
            it->second = value;
    }
};

struct Report
{
    std::string command;
    std::uint64_t seed = 0;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    Summary summary;

    void add(std::vector<Cell> row)
    {
        if (row.size() != columns.size())
            throw std::logic_error("report row width does not match its columns");
        rows.push_back(std::move(row));
    }
};

inline std::string csv_escape(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::string render_csv(const Report& r)
{
    std::ostringstream os;
    os << "# schema=1\n";
    os << "# command=" << r.command << " seed=" << r.seed << "\n";
    for (std::size_t i = 0; i < r.columns.size(); ++i)
        os << (i ? "," : "") << r.columns[i];
    os << "\n";
    for (const auto& row : r.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            os << (i ? "," : "") << csv_escape(format_cell(row[i]));
        os << "\n";
    }
    return os.str();
}

inline nlohmann::ordered_json cell_json(const Cell& c)
{
    if (const auto* d = std::get_if<double>(&c)) {
        if (!std::isfinite(*d))
            return format_real(*d);
        return std::stod(format_real(*d)); // shortest round-trip of the 12-digit value
    }
    return std::visit([](const auto& v) { return nlohmann::ordered_json(v); }, c);
}

inline std::string render_json(const Report& r)
{
    nlohmann::ordered_json j;
    j["schema"] = 1;
    j["command"] = r.command;
    j["seed"] = r.seed;
    j["columns"] = r.columns;
    auto rows = nlohmann::ordered_json::array();
    for (const auto& row : r.rows) {
        nlohmann::ordered_json obj;
        for (std::size_t i = 0; i < row.size(); ++i)
            obj[r.columns[i]] = cell_json(row[i]);
        rows.push_back(std::move(obj));
    }
    j["rows"] = std::move(rows);
    nlohmann::ordered_json summary;
    summary["rows"] = r.summary.rows;
    summary["passed"] = r.summary.passed;
    summary["failed"] = r.summary.failed;
    for (const auto& [name, value] : r.summary.maxima)
        summary[name] = cell_json(value);
    j["summary"] = std::move(summary);
    return j.dump(2) + "\n";
}

inline std::string render(const Report& r, const std::string& format)
{
    if (format == "csv")
        return render_csv(r);
    if (format == "json")
        return render_json(r);
    throw InputError("unknown output format '" + format + "' (expected csv or json)");
}

inline void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot open '" + path + "' for writing");
    out << text;
    out.close();
    if (!out)
        throw IoError("error writing '" + path + "'");
}

inline std::string summary_line(const Report& r)
{
    std::ostringstream os;
    os << r.command << ": " << r.summary.rows << " rows, " << r.summary.passed << " passed, " << r.summary.failed
       << " failed";
    for (const auto& [name, value] : r.summary.maxima)
        os << ", " << name << "=" << format_real(value);
    return os.str();
}

} // namespace sqsieve::cli
