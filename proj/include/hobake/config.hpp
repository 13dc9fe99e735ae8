#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cerrno>
#include <cstdio>
#include <cstddef>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hobake/bakeoff.hpp"
#include "hobake/errors.hpp"

namespace hobake {

/// A run configuration plus the p / k / ranks lists a sweep iterates over.
/// Single-run commands require every list to hold exactly one value.
struct Settings {
    RunConfig run;
    std::vector<int> p_list{7};
    std::vector<int> k_list{6};
    std::vector<std::size_t> ranks_list{1};
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b])))
        ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1])))
        --e;
    return s.substr(b, e - b);
}

inline long long parse_integer(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(t.c_str(), &end, 10);
    if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE)
        throw ConfigError(key + ": expected an integer, got '" + text + "'");
    return v;
}

inline double parse_real(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size())
        throw ConfigError(key + ": expected a number, got '" + text + "'");
    return v;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t == "1" || t == "true" || t == "yes" || t == "on")
        return true;
    if (t == "0" || t == "false" || t == "no" || t == "off")
        return false;
    throw ConfigError(key + ": expected a boolean, got '" + text + "'");
}

inline std::array<double, 3> parse_triple(const std::string& key, const std::string& text) {
    std::array<double, 3> v{};
    std::istringstream s(text);
    std::string item;
    std::size_t n = 0;
    while (std::getline(s, item, ',')) {
        if (n == 3)
            throw ConfigError(key + ": expected three comma-separated numbers");
        v[n++] = parse_real(key, item);
    }
    if (n != 3)
        throw ConfigError(key + ": expected three comma-separated numbers");
    return v;
}

} // namespace detail

/// Comma-separated integers and inclusive ranges: "2..6", "1,2,4,8", "3,5..7".
inline std::vector<long long> parse_int_list(const std::string& key, const std::string& text) {
    std::vector<long long> out;
    std::istringstream s(text);
    std::string item;
    while (std::getline(s, item, ',')) {
        const auto dots = item.find("..");
        if (dots == std::string::npos) {
            out.push_back(detail::parse_integer(key, item));
            continue;
        }
        const long long a = detail::parse_integer(key, item.substr(0, dots));
        const long long b = detail::parse_integer(key, item.substr(dots + 2));
        if (b < a)
            throw ConfigError(key + ": empty range '" + detail::trim(item) + "'");
        if (b - a > 4096)
            throw ConfigError(key + ": range '" + detail::trim(item) + "' is too long");
        for (long long v = a; v <= b; ++v)
            out.push_back(v);
    }
    if (out.empty())
        throw ConfigError(key + ": empty list");
    return out;
}

inline const std::vector<std::string>& setting_keys() {
    static const std::vector<std::string> keys{
        "bp",      "mode",   "p",         "k",          "ranks",       "iters",     "strategy",
        "block",   "threads", "deterministic", "instrument", "trials", "warmup", "domain_lo",
        "domain_hi", "deformation", "amplitude", "max_memory_mb"};
    return keys;
}

/// Applies one key = value setting; unknown keys and malformed values throw ConfigError.
inline void apply_setting(Settings& s, const std::string& raw_key, const std::string& value) {
    const std::string key = detail::trim(raw_key);
    RunConfig& c = s.run;
    // range checks beyond "parses as an integer" live in validate()
    auto int_list = [&] {
        std::vector<int> out;
        for (long long x : parse_int_list(key, value)) {
            if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
                throw ConfigError(key + ": value " + std::to_string(x) + " out of range");
            out.push_back(static_cast<int>(x));
        }
        return out;
    };
    if (key == "bp") {
        const long long id = detail::parse_integer(key, value);
        if (id < 1 || id > 6)
            throw ConfigError("bp must be 1..6 (got " + detail::trim(value) + ")");
        c.bp = static_cast<int>(id);
    } else if (key == "mode") {
        c.mode = parse_mode(detail::trim(value));
    } else if (key == "p") {
        s.p_list = int_list();
    } else if (key == "k") {
        s.k_list = int_list();
    } else if (key == "ranks") {
        s.ranks_list.clear();
        for (int r : int_list()) {
            if (r < 1)
                throw ConfigError("ranks must be >= 1 (got " + std::to_string(r) + ")");
            s.ranks_list.push_back(static_cast<std::size_t>(r));
        }
    } else if (key == "iters") {
        c.iterations = static_cast<int>(std::clamp<long long>(detail::parse_integer(key, value), -1, 1 << 30));
    } else if (key == "strategy") {
        c.strategy = parse_strategy(detail::trim(value));
    } else if (key == "block") {
        const long long b = detail::parse_integer(key, value);
        if (b != 4 && b != 8)
            throw ConfigError("block must be 4 or 8 (got " + std::to_string(b) + ")");
        c.block = static_cast<std::size_t>(b);
    } else if (key == "threads") {
        const long long t = detail::parse_integer(key, value);
        if (t < 0)
            throw ConfigError("threads must be >= 0 (0 selects the default)");
        c.threads = static_cast<std::size_t>(t);
    } else if (key == "deterministic") {
        c.deterministic = detail::parse_bool(key, value);
    } else if (key == "instrument") {
        c.instrument = detail::parse_bool(key, value);
    } else if (key == "trials") {
        c.trials = static_cast<int>(std::clamp<long long>(detail::parse_integer(key, value), -1, 1 << 20));
    } else if (key == "warmup") {
        c.warmup = static_cast<int>(std::clamp<long long>(detail::parse_integer(key, value), -1, 1 << 20));
    } else if (key == "domain_lo") {
        c.domain.lo = detail::parse_triple(key, value);
    } else if (key == "domain_hi") {
        c.domain.hi = detail::parse_triple(key, value);
    } else if (key == "deformation") {
        c.deformation.name = detail::trim(value);
    } else if (key == "amplitude") {
        c.deformation.amplitude = detail::parse_real(key, value);
    } else if (key == "max_memory_mb") {
        c.max_memory_mb = detail::parse_real(key, value);
    } else {
        throw ConfigError("unknown configuration key '" + key + "'");
    }
}

/// `key = value` per line; '#' starts a comment.
inline void apply_config_text(Settings& s, std::istream& in, const std::string& origin = "config") {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = detail::trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
        try {
            apply_setting(s, line.substr(0, eq), line.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

inline void apply_config_file(Settings& s, const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw ConfigError("cannot open config file '" + path + "'");
    apply_config_text(s, f, path);
}

/// The single RunConfig of a non-sweep command.
inline RunConfig single_run(const Settings& s) {
    if (s.p_list.size() != 1 || s.k_list.size() != 1 || s.ranks_list.size() != 1)
        throw ConfigError("run takes a single p, k and ranks value; use sweep for lists");
    RunConfig c = s.run;
    c.p = s.p_list.front();
    c.k = s.k_list.front();
    c.ranks = s.ranks_list.front();
    validate(c);
    return c;
}

/// Every key in `key = value` form, loadable by apply_config_text.
inline std::string describe(const Settings& s) {
    auto join = [](const auto& v) {
        std::string out;
        for (const auto& x : v)
            out += (out.empty() ? "" : ",") + std::to_string(x);
        return out;
    };
    auto real = [](double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    auto triple = [&](const std::array<double, 3>& v) { return real(v[0]) + "," + real(v[1]) + "," + real(v[2]); };
    const RunConfig& c = s.run;
    std::ostringstream o;
    o << "bp = " << c.bp << "\nmode = " << to_string(c.mode) << "\np = " << join(s.p_list)
      << "\nk = " << join(s.k_list) << "\nranks = " << join(s.ranks_list) << "\niters = " << c.iterations
      << "\nstrategy = " << to_string(c.strategy) << "\nblock = " << c.block << "\nthreads = " << c.threads
      << "\ndeterministic = " << (c.deterministic ? "true" : "false")
      << "\ninstrument = " << (c.instrument ? "true" : "false") << "\ntrials = " << c.trials
      << "\nwarmup = " << c.warmup << "\ndomain_lo = " << triple(c.domain.lo)
      << "\ndomain_hi = " << triple(c.domain.hi) << "\ndeformation = " << c.deformation.name
      << "\namplitude = " << real(c.deformation.amplitude) << "\nmax_memory_mb = " << real(c.max_memory_mb) << '\n';
    return o.str();
}

} // namespace hobake
