#pragma once

// File formats.
//
//   trade matrix JSON  {"returns": [[...], ...], "probs": [...]}   probs optional
//   trade matrix CSV   one row per scenario, M comma-separated reals
//   market JSON        {"R": r, "S0": [...], "scenarios": [[...]], "probs": [...]}
//
// Numbers are written in the shortest form that reads back to the same double,
// with "inf" / "-inf" for the infinite sentinels.

#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "ddrisk/errors.hpp"
#include "ddrisk/market_bridge.hpp"
#include "ddrisk/trade_core.hpp"

namespace ddrisk::io {

using json = nlohmann::json;

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) v = 0.0; // drop the sign of -0
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view text) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) text.remove_suffix(1);
    if (text == "inf" || text == "+inf") return HUGE_VAL;
    if (text == "-inf") return -HUGE_VAL;
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw ValidationError("not a number: '" + std::string(text) + "'");
    return v;
}

/// Comma-separated reals, e.g. "0.2,0.2".
inline std::vector<double> parse_list(std::string_view text) {
    std::vector<double> out;
    if (text.empty()) throw ValidationError("empty number list");
    std::size_t start = 0;
    while (true) {
        const auto comma = text.find(',', start);
        out.push_back(parse_double(text.substr(start, comma == std::string_view::npos ? text.npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline json parse_json(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(origin + ": " + e.what());
    }
}

namespace detail {

inline std::vector<double> real_array(const json& j, const char* what) {
    if (!j.is_array()) throw ValidationError(std::string(what) + " must be an array");
    std::vector<double> out;
    for (const auto& v : j) {
        if (!v.is_number()) throw ValidationError(std::string(what) + " must contain numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

inline std::vector<std::vector<double>> real_matrix(const json& j, const char* what) {
    if (!j.is_array()) throw ValidationError(std::string(what) + " must be an array of rows");
    std::vector<std::vector<double>> out;
    for (const auto& row : j) out.push_back(real_array(row, what));
    return out;
}

} // namespace detail

inline bool is_market_json(const json& j) { return j.is_object() && j.contains("scenarios"); }

inline TradeMatrix trade_matrix_from_json(const json& j) {
    if (!j.is_object() || !j.contains("returns")) throw ValidationError("trade matrix JSON needs a \"returns\" key");
    std::vector<double> probs;
    if (j.contains("probs")) probs = detail::real_array(j.at("probs"), "probs");
    return TradeMatrix(detail::real_matrix(j.at("returns"), "returns"), std::move(probs));
}

inline json to_json(const TradeMatrix& t) {
    json rows = json::array();
    for (std::size_t i = 0; i < t.rows(); ++i) rows.push_back(std::vector<double>(t.row(i).begin(), t.row(i).end()));
    return json{{"returns", rows}, {"probs", std::vector<double>(t.probs().begin(), t.probs().end())}};
}

inline OnePeriodMarket market_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("market JSON must be an object");
    for (const char* key : {"R", "S0", "scenarios"})
        if (!j.contains(key)) throw ValidationError(std::string("market JSON needs a \"") + key + "\" key");
    if (!j.at("R").is_number()) throw ValidationError("R must be a number");
    OnePeriodMarket m;
    m.rate = j.at("R").get<double>();
    m.s0 = detail::real_array(j.at("S0"), "S0");
    m.scenarios = detail::real_matrix(j.at("scenarios"), "scenarios");
    if (j.contains("probs")) m.probs = detail::real_array(j.at("probs"), "probs");
    validate(m);
    return m;
}

/// N lines of M comma-separated reals; blank lines and lines starting with '#'
/// are skipped.
inline TradeMatrix trade_matrix_from_csv(const std::string& text, std::vector<double> probs = {}) {
    std::vector<std::vector<double>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos || line[line.find_first_not_of(" \t")] == '#')
            continue;
        rows.push_back(parse_list(line));
    }
    return TradeMatrix(rows, std::move(probs));
}

/// Either input kind, by content: a market JSON is converted to its trade
/// matrix and also returned.
struct LoadedInput {
    std::optional<OnePeriodMarket> market;
    TradeMatrix matrix;
};

inline LoadedInput load_input(const std::string& path, const std::vector<double>& csv_probs = {}) {
    const auto text = read_file(path);
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        const auto j = parse_json(text, path);
        if (is_market_json(j)) {
            auto m = market_from_json(j);
            auto t = build_trade_matrix(m);
            return {std::move(m), std::move(t)};
        }
        return {std::nullopt, trade_matrix_from_json(j)};
    }
    return {std::nullopt, trade_matrix_from_csv(text, csv_probs)};
}

} // namespace ddrisk::io
