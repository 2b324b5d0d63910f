#pragma once

// Experiment configs: a small TOML subset.
//
//   command = "thm3-sweep"     # top level: command, seed, output, format, threads
//   seed = 7
//   [grid]                     # per-command parameters
//   Q = [16, 24, 32]
//   r_exponent_min = 0.6
//
// Values are integers, reals, booleans, "strings" or [lists] of numbers. Every diagnostic
// names the file and line.

#include "sqsieve/errors.hpp"

#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace sqsieve::cli {

struct ConfigEntry
{
    std::string raw;
    int line = 0;
};

class ConfigSection
{
public:
    ConfigSection() = default;
    ConfigSection(std::string source, std::string name) : source_(std::move(source)), name_(std::move(name)) {}

    void set(const std::string& key, ConfigEntry e, bool replace = false)
    {
        if (!replace && entries_.count(key))
            fail(e.line, "duplicate key '" + key + "'");
        entries_[key] = std::move(e);
    }

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback)
    {
        const auto* e = take(key);
        return e ? parse_u64(*e, key) : fallback;
    }

    double get_double(const std::string& key, double fallback)
    {
        const auto* e = take(key);
        return e ? parse_double(*e, key) : fallback;
    }

    bool get_bool(const std::string& key, bool fallback)
    {
        const auto* e = take(key);
        if (!e)
            return fallback;
        if (e->raw == "true")
            return true;
        if (e->raw == "false")
            return false;
        fail(e->line, "key '" + key + "' expects true or false, got '" + e->raw + "'");
    }

    std::string get_string(const std::string& key, const std::string& fallback)
    {
        const auto* e = take(key);
        if (!e)
            return fallback;
        const auto& s = e->raw;
        if (s.size() < 2 || s.front() != '"' || s.back() != '"')
            fail(e->line, "key '" + key + "' expects a quoted string, got '" + s + "'");
        return s.substr(1, s.size() - 2);
    }

    /// A list "[x, y, ...]"; a bare scalar is accepted as a one-element list.
    std::vector<std::uint64_t> get_u64_list(const std::string& key, std::vector<std::uint64_t> fallback)
    {
        const auto* e = take(key);
        if (!e)
            return fallback;
        std::vector<std::uint64_t> out;
        for (const auto& item : split_list(*e, key))
            out.push_back(parse_u64({item, e->line}, key));
        return out;
    }

    std::vector<double> get_double_list(const std::string& key, std::vector<double> fallback)
    {
        const auto* e = take(key);
        if (!e)
            return fallback;
        std::vector<double> out;
        for (const auto& item : split_list(*e, key))
            out.push_back(parse_double({item, e->line}, key));
        return out;
    }

    /// Rejects any key no accessor asked for.
    void reject_unused(const std::string& context) const
    {
        for (const auto& [key, e] : entries_)
            if (!used_.count(key))
                fail(e.line, "unknown key '" + key + "' " + context);
    }

    [[noreturn]] void fail(int line, const std::string& what) const
    {
        throw InputError(source_ + ":" + std::to_string(line) + ": " + (name_.empty() ? "" : "[" + name_ + "] ") + what);
    }

    /// Range check with the entry's line in the message.
    void check(const std::string& key, bool ok, const std::string& what) const
    {
        if (!ok) {
            auto it = entries_.find(key);
            const int line = it == entries_.end() ? 0 : it->second.line;
            if (line == 0)
                throw InputError(source_ + ": " + key + ": " + what);
            fail(line, key + ": " + what);
        }
    }

private:
    const ConfigEntry* take(const std::string& key)
    {
        used_.insert(key);
        auto it = entries_.find(key);
        return it == entries_.end() ? nullptr : &it->second;
    }

    std::uint64_t parse_u64(const ConfigEntry& e, const std::string& key) const
    {
        std::size_t pos = 0;
        unsigned long long v = 0;
        try {
            if (e.raw.empty() || e.raw[0] == '-')
                throw std::invalid_argument("negative");
            v = std::stoull(e.raw, &pos, 0);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos == 0 || pos != e.raw.size())
            fail(e.line, "key '" + key + "' expects a non-negative integer, got '" + e.raw + "'");
        return v;
    }

    double parse_double(const ConfigEntry& e, const std::string& key) const
    {
        std::size_t pos = 0;
        double v = 0.0;
        try {
            v = std::stod(e.raw, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos == 0 || pos != e.raw.size())
            fail(e.line, "key '" + key + "' expects a number, got '" + e.raw + "'");
        return v;
    }

    std::vector<std::string> split_list(const ConfigEntry& e, const std::string& key) const
    {
        std::string body = e.raw;
        if (!body.empty() && body.front() == '[') {
            if (body.back() != ']')
                fail(e.line, "key '" + key + "': unterminated list");
            body = body.substr(1, body.size() - 2);
        }
        std::vector<std::string> items;
        std::stringstream ss(body);
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto b = item.find_first_not_of(" \t");
            const auto f = item.find_last_not_of(" \t");
            if (b == std::string::npos)
                fail(e.line, "key '" + key + "': empty list element");
            items.push_back(item.substr(b, f - b + 1));
        }
        if (items.empty())
            fail(e.line, "key '" + key + "': empty list");
        return items;
    }

    std::string source_;
    std::string name_;
    std::map<std::string, ConfigEntry> entries_;
    std::set<std::string> used_;
};

struct ConfigFile
{
    ConfigSection top;
    ConfigSection grid;
};

inline ConfigFile parse_config(std::istream& in, const std::string& source)
{
    ConfigFile cfg{ConfigSection(source, ""), ConfigSection(source, "grid")};
    ConfigSection* current = &cfg.top;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        // strip a comment that is not inside a string
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"')
                quoted = !quoted;
            else if (line[i] == '#' && !quoted) {
                line.resize(i);
                break;
            }
        }
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos)
            continue;
        line = line.substr(b, line.find_last_not_of(" \t\r") - b + 1);
        if (line.front() == '[' && line.find('=') == std::string::npos) {
            if (line == "[grid]")
                current = &cfg.grid;
            else
                throw InputError(source + ":" + std::to_string(lineno) + ": unknown section " + line);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InputError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        key.erase(key.find_last_not_of(" \t") + 1);
        const auto vb = value.find_first_not_of(" \t");
        value = vb == std::string::npos ? "" : value.substr(vb);
        if (key.empty() || key.find_first_of(" \t\"") != std::string::npos)
            throw InputError(source + ":" + std::to_string(lineno) + ": malformed key '" + key + "'");
        if (value.empty())
            throw InputError(source + ":" + std::to_string(lineno) + ": missing value for '" + key + "'");
        current->set(key, {value, lineno});
    }
    return cfg;
}

inline ConfigFile load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open config '" + path + "'");
    return parse_config(in, path);
}

} // namespace sqsieve::cli
