#pragma once
// CSV and key=value text formats. Numbers are written in the shortest form
// that reads back to the identical double.

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "tvreg/bvp.hpp"
#include "tvreg/errors.hpp"
#include "tvreg/signal.hpp"

namespace tvreg::io {

inline std::string format_double(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    if (ec != std::errc{}) throw InputError("format_double: conversion failed");
    return std::string(buf, ptr);
}

/// Shortest round-trip form without an exponent (CSV columns).
inline std::string format_decimal(double x) {
    if (!std::isfinite(x)) return format_double(x);
    char buf[400];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::fixed);
    if (ec != std::errc{}) throw InputError("format_decimal: conversion failed");
    return std::string(buf, ptr);
}

inline double parse_double(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double x = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw InputError("not a number: '" + std::string(s) + "'");
    return x;
}

/// Header `t,value`, one row per node.
inline void write_nodes(std::ostream& os, const Grid& g, std::span<const double> values) {
    if (values.size() != g.size()) throw GridMismatch("write_nodes: value count does not match the grid");
    os << "t,value\n";
    for (std::size_t i = 0; i < values.size(); ++i) os << format_decimal(g.node(i)) << ',' << format_decimal(values[i]) << '\n';
}

inline void write_nodes(const std::string& path, const Grid& g, std::span<const double> values) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw InputError("cannot open '" + path + "' for writing");
    write_nodes(os, g, values);
}

/// Reads a `t,value` CSV whose t column is the uniform grid on [0,1].
inline std::vector<double> read_nodes(std::istream& is, const std::string& what = "csv") {
    std::string line;
    if (!std::getline(is, line)) throw InputError(what + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "t,value") throw InputError(what + ": expected header 't,value'");
    std::vector<double> t, v;
    while (std::getline(is, line)) {
        if (line.empty() || line == "\r") continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos)
            throw InputError(what + ": expected two columns in '" + line + "'");
        t.push_back(parse_double(std::string_view(line).substr(0, comma)));
        v.push_back(parse_double(std::string_view(line).substr(comma + 1)));
    }
    if (v.size() < 2) throw InputError(what + ": need at least two rows");
    const Grid g(v.size());
    for (std::size_t i = 0; i < t.size(); ++i)
        if (std::abs(t[i] - g.node(i)) > 1e-9)
            throw InputError(what + ": t column is not the uniform grid on [0,1]");
    return v;
}

inline std::vector<double> read_nodes(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw InputError("cannot open '" + path + "'");
    return read_nodes(is, path);
}

inline Signal read_signal(const std::string& path) {
    auto v = read_nodes(path);
    const Grid g(v.size());
    return Signal(g, std::move(v));
}

/// Header `t,u,du`.
inline void write_trajectory(std::ostream& os, const Trajectory& traj) {
    os << "t,u,du\n";
    for (const auto& p : traj.points)
        os << format_decimal(p.t) << ',' << format_decimal(p.u) << ',' << format_decimal(p.du) << '\n';
}

inline void write_trajectory(const std::string& path, const Trajectory& traj) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw InputError("cannot open '" + path + "' for writing");
    write_trajectory(os, traj);
}

/// `key=value` lines; blank lines and lines starting with '#' are ignored.
inline std::map<std::string, std::string> read_key_values(std::istream& is, const std::string& what = "config") {
    std::map<std::string, std::string> out;
    std::string line;
    int lineno = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    while (std::getline(is, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos || eq == 0)
            throw InputError(what + ":" + std::to_string(lineno) + ": expected key=value");
        out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return out;
}

inline std::map<std::string, std::string> read_key_values(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InputError("cannot open '" + path + "'");
    return read_key_values(is, path);
}

} // namespace tvreg::io
