#pragma once

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <type_traits>
#include <utility>
#include <vector>

#include "hobake/bakeoff.hpp"
#include "hobake/errors.hpp"

namespace hobake {

// ---------------------------------------------------------------------------
// Parallel efficiency

struct EfficiencyPoint {
    double P = 0.0;
    double T = 0.0;
    double eta = 0.0;
};

struct EfficiencyCurve {
    std::vector<EfficiencyPoint> entries; // ascending P
    double P_min = 0.0;
};

/// eta(P) = (T_{P_min} P_min) / (T_P P).
inline EfficiencyCurve parallel_efficiency(std::vector<std::pair<double, double>> samples) {
    if (samples.size() < 2)
        throw DataError("parallel efficiency needs at least two (P, T) samples");
    std::sort(samples.begin(), samples.end());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto [P, T] = samples[i];
        if (!(P > 0.0) || !(T > 0.0) || !std::isfinite(T))
            throw DataError("parallel efficiency needs P > 0 and finite T > 0");
        if (i > 0 && samples[i - 1].first == P)
            throw DataError("duplicate resource count P = " + std::to_string(P));
    }
    EfficiencyCurve c;
    c.P_min = samples.front().first;
    const double base = samples.front().second * c.P_min;
    for (const auto& [P, T] : samples)
        c.entries.push_back({P, T, P == c.P_min ? 1.0 : base / (T * P)});
    return c;
}

// ---------------------------------------------------------------------------
// r_max, n_0.8, t_0.8

struct RatePoint {
    double n_per_rank = 0.0;
    double dofs_rate = 0.0;
    double seconds_per_iter = 0.0;
};

enum class Interpolation {
    TimePerPoint, // linear in tau = n / rate between bracketing samples
    LogLinear     // rate linear in log n
};

struct MetricsSummary {
    double r_max = 0.0;
    double n_08 = 0.0;
    double t_08 = 0.0;
    std::size_t rows = 0;
    /// Single row or a flat curve: n_08 is the smallest n_per_rank.
    bool degenerate = false;
    /// The curve never reaches 0.8 of the supplied reference peak.
    bool unreached = false;
};

/// Threshold crossing at 0.8 r_max. `peak`, when given, replaces the dataset's own maximum
/// (cross-strategy peak). t_08 = 1.25 n_08 / r_max.
inline MetricsSummary extract_metrics(std::vector<RatePoint> rows, Interpolation interp = Interpolation::TimePerPoint,
                                      std::optional<double> peak = std::nullopt) {
    if (rows.empty())
        throw DataError("extract_metrics needs at least one row");
    for (const auto& r : rows)
        if (!(r.dofs_rate > 0.0) || !(r.n_per_rank > 0.0) || !std::isfinite(r.dofs_rate))
            throw DataError("extract_metrics needs positive rates and sizes");
    std::sort(rows.begin(), rows.end(),
              [](const RatePoint& a, const RatePoint& b) { return a.n_per_rank < b.n_per_rank; });

    MetricsSummary s;
    s.rows = rows.size();
    double own = 0.0;
    for (const auto& r : rows)
        own = std::max(own, r.dofs_rate);
    s.r_max = peak ? *peak : own;
    if (!(s.r_max > 0.0))
        throw DataError("reference peak rate must be positive");

    const bool flat = std::all_of(rows.begin(), rows.end(), [&](const RatePoint& r) { return r.dofs_rate == own; });
    if (!peak && (rows.size() == 1 || flat)) {
        s.degenerate = true;
        s.n_08 = rows.front().n_per_rank;
    } else {
        const double thr = 0.8 * s.r_max;
        std::size_t i = 0;
        while (i < rows.size() && rows[i].dofs_rate < thr)
            ++i;
        if (i == rows.size()) {
            s.unreached = true;
            s.n_08 = std::numeric_limits<double>::quiet_NaN();
        } else if (i == 0) {
            s.n_08 = rows.front().n_per_rank;
        } else {
            const RatePoint& a = rows[i - 1];
            const RatePoint& b = rows[i];
            if (interp == Interpolation::LogLinear) {
                const double t = (thr - a.dofs_rate) / (b.dofs_rate - a.dofs_rate);
                s.n_08 = a.n_per_rank * std::pow(b.n_per_rank / a.n_per_rank, t);
            } else {
                // n = thr tau(n) with tau linear in n on [a, b]
                const double ta = a.n_per_rank / a.dofs_rate, tb = b.n_per_rank / b.dofs_rate;
                const double slope = (tb - ta) / (b.n_per_rank - a.n_per_rank);
                s.n_08 = thr * (ta - slope * a.n_per_rank) / (1.0 - thr * slope);
            }
        }
    }
    s.t_08 = 1.25 * s.n_08 / s.r_max;
    return s;
}

// ---------------------------------------------------------------------------
// Latency floor

struct LatencyFloor {
    double low = 0.0;
    double high = 0.0;
};

/// low = (m + r) alpha, high = (2 m + r) alpha: every neighbour message once or twice,
/// plus the reductions expressed in units of alpha.
inline LatencyFloor latency_floor(double alpha, double neighbor_messages = 26, double reductions_cost_alphas = 8) {
    if (alpha < 0.0)
        throw DataError("alpha must be non-negative");
    return {(neighbor_messages + reductions_cost_alphas) * alpha,
            (2.0 * neighbor_messages + reductions_cost_alphas) * alpha};
}

// ---------------------------------------------------------------------------
// Dataset CSV

struct Record {
    int bp_id = 0;
    std::string mode;
    int p = 0;
    int q = 0;
    int k = 0;
    std::size_t E = 0;
    std::size_t ranks = 0;
    std::size_t threads = 0;
    std::string strategy;
    int iterations = 0;
    std::size_t n = 0;
    double n_per_rank = 0.0;
    double seconds_total = 0.0;
    double seconds_per_iter = 0.0;
    double dofs_rate = 0.0;
    std::size_t flops_measured = 0;
    std::size_t messages = 0;
    std::size_t reductions = 0;

    bool operator==(const Record&) const = default;
};

inline const std::vector<std::string>& csv_columns() {
    static const std::vector<std::string> cols{
        "bp_id", "mode", "p", "q", "k", "E", "ranks", "threads", "strategy", "iterations", "n", "n_per_rank",
        "seconds_total", "seconds_per_iter", "dofs_rate", "flops_measured", "messages", "reductions"};
    return cols;
}

inline Record to_record(const RunResult& r) {
    Record x;
    x.bp_id = r.config.bp;
    x.mode = to_string(r.config.mode);
    x.p = r.config.p;
    x.q = r.q;
    x.k = r.config.k;
    x.E = r.E;
    x.ranks = r.config.ranks;
    x.threads = r.threads;
    x.strategy = to_string(r.config.strategy);
    x.iterations = r.config.iterations;
    x.n = r.n;
    x.n_per_rank = r.n_per_rank;
    x.seconds_total = r.wall_seconds;
    x.seconds_per_iter = r.seconds_per_iter;
    x.dofs_rate = r.dofs_rate;
    x.flops_measured = r.flops_measured;
    x.messages = r.messages;
    x.reductions = r.reductions;
    return x;
}

inline RatePoint to_rate_point(const Record& r) { return {r.n_per_rank, r.dofs_rate, r.seconds_per_iter}; }

/// 17 significant digits: decimal round trip is exact.
inline std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string csv_header() {
    std::string h;
    for (const auto& c : csv_columns())
        h += (h.empty() ? "" : ",") + c;
    return h;
}

inline std::string csv_row(const Record& r) {
    std::ostringstream o;
    o << r.bp_id << ',' << r.mode << ',' << r.p << ',' << r.q << ',' << r.k << ',' << r.E << ',' << r.ranks << ','
      << r.threads << ',' << r.strategy << ',' << r.iterations << ',' << r.n << ',' << format_real(r.n_per_rank)
      << ',' << format_real(r.seconds_total) << ',' << format_real(r.seconds_per_iter) << ','
      << format_real(r.dofs_rate) << ',' << r.flops_measured << ',' << r.messages << ',' << r.reductions;
    return o.str();
}

inline void write_csv(std::ostream& out, const std::vector<Record>& rows) {
    out << csv_header() << '\n';
    for (const auto& r : rows)
        out << csv_row(r) << '\n';
}

inline void emit_csv(const std::vector<Record>& rows, const std::string& path) {
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    write_csv(f, rows);
    if (!f)
        throw std::runtime_error("write to '" + path + "' failed");
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream s(line);
    while (std::getline(s, cell, ','))
        out.push_back(cell);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

template <class T>
T parse_number(const std::string& s, const std::string& column, std::size_t line) {
    const char* b = s.c_str();
    char* end = nullptr;
    T v{};
    errno = 0;
    if constexpr (std::is_floating_point_v<T>)
        v = std::strtod(b, &end);
    else if constexpr (std::is_signed_v<T>)
        v = static_cast<T>(std::strtoll(b, &end, 10));
    else {
        if (!s.empty() && s[0] == '-')
            end = const_cast<char*>(b);
        else
            v = static_cast<T>(std::strtoull(b, &end, 10));
    }
    if (s.empty() || end != b + s.size() || errno == ERANGE)
        throw DataError("line " + std::to_string(line) + ": column " + column + " has malformed value '" + s + "'");
    return v;
}

} // namespace detail

inline std::vector<Record> read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line))
        throw DataError("empty CSV input (missing header)");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    const auto header = detail::split_csv_line(line);
    if (header != csv_columns())
        throw DataError("unexpected CSV header: '" + line + "'");
    std::vector<Record> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        const auto c = detail::split_csv_line(line);
        if (c.size() != header.size())
            throw DataError("line " + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                            " columns, found " + std::to_string(c.size()));
        using detail::parse_number;
        Record r;
        r.bp_id = parse_number<int>(c[0], "bp_id", lineno);
        r.mode = c[1];
        r.p = parse_number<int>(c[2], "p", lineno);
        r.q = parse_number<int>(c[3], "q", lineno);
        r.k = parse_number<int>(c[4], "k", lineno);
        r.E = parse_number<std::size_t>(c[5], "E", lineno);
        r.ranks = parse_number<std::size_t>(c[6], "ranks", lineno);
        r.threads = parse_number<std::size_t>(c[7], "threads", lineno);
        r.strategy = c[8];
        r.iterations = parse_number<int>(c[9], "iterations", lineno);
        r.n = parse_number<std::size_t>(c[10], "n", lineno);
        r.n_per_rank = parse_number<double>(c[11], "n_per_rank", lineno);
        r.seconds_total = parse_number<double>(c[12], "seconds_total", lineno);
        r.seconds_per_iter = parse_number<double>(c[13], "seconds_per_iter", lineno);
        r.dofs_rate = parse_number<double>(c[14], "dofs_rate", lineno);
        r.flops_measured = parse_number<std::size_t>(c[15], "flops_measured", lineno);
        r.messages = parse_number<std::size_t>(c[16], "messages", lineno);
        r.reductions = parse_number<std::size_t>(c[17], "reductions", lineno);
        rows.push_back(std::move(r));
    }
    return rows;
}

inline std::vector<Record> read_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f)
        throw DataError("cannot open '" + path + "'");
    return read_csv(f);
}

// ---------------------------------------------------------------------------
// Plot data: one block per p, blocks separated by two blank lines (gnuplot `index`).

inline void write_plot_data(std::ostream& out, const std::vector<Record>& rows) {
    std::map<int, std::vector<const Record*>> by_p;
    for (const auto& r : rows)
        by_p[r.p].push_back(&r);
    bool first = true;
    for (auto& [p, block] : by_p) {
        std::stable_sort(block.begin(), block.end(),
                         [](const Record* a, const Record* b) { return a->n_per_rank < b->n_per_rank; });
        if (!first)
            out << "\n\n";
        first = false;
        out << "# p=" << p << "\n# n_per_rank dofs_rate seconds_per_iter bp_id ranks strategy\n";
        for (const Record* r : block)
            out << format_real(r->n_per_rank) << ' ' << format_real(r->dofs_rate) << ' '
                << format_real(r->seconds_per_iter) << ' ' << r->bp_id << ' ' << r->ranks << ' ' << r->strategy
                << '\n';
    }
}

inline void emit_plot_data(const std::vector<Record>& rows, const std::string& path) {
    std::ofstream f(path);
    if (!f)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    write_plot_data(f, rows);
}

// ---------------------------------------------------------------------------
// Per-(bp, p) summaries

struct GroupSummary {
    int bp_id = 0;
    int p = 0;
    std::string strategy;
    MetricsSummary metrics;
};

/// r_max is the peak per (bp, p) across every strategy in the dataset; n_08 and t_08
/// are located on each strategy's own curve against that shared peak.
inline std::vector<GroupSummary> summarize(const std::vector<Record>& rows,
                                           Interpolation interp = Interpolation::TimePerPoint) {
    std::map<std::pair<int, int>, double> peak;
    std::map<std::tuple<int, int, std::string>, std::vector<RatePoint>> curves;
    for (const auto& r : rows) {
        auto& pk = peak[{r.bp_id, r.p}];
        pk = std::max(pk, r.dofs_rate);
        curves[{r.bp_id, r.p, r.strategy}].push_back(to_rate_point(r));
    }
    std::vector<GroupSummary> out;
    for (const auto& [key, pts] : curves) {
        const auto& [bp, p, strat] = key;
        const double pk = peak.at({bp, p});
        MetricsSummary m = extract_metrics(pts, interp);
        if (m.r_max != pk)
            m = extract_metrics(pts, interp, pk);
        out.push_back({bp, p, strat, m});
    }
    return out;
}

inline std::string summary_header() { return "bp_id,p,strategy,rows,r_max,n_08,t_08,degenerate,unreached"; }

inline std::string summary_row(const GroupSummary& g) {
    std::ostringstream o;
    o << g.bp_id << ',' << g.p << ',' << g.strategy << ',' << g.metrics.rows << ',' << format_real(g.metrics.r_max)
      << ',' << format_real(g.metrics.n_08) << ',' << format_real(g.metrics.t_08) << ',' << g.metrics.degenerate
      << ',' << g.metrics.unreached;
    return o.str();
}

struct EfficiencyGroup {
    int bp_id = 0;
    int p = 0;
    int k = 0;
    std::string strategy;
    EfficiencyCurve curve;
};

/// Strong-scaling curves: rows with identical (bp, p, k, strategy) and at least two rank counts.
inline std::vector<EfficiencyGroup> efficiency_groups(const std::vector<Record>& rows) {
    std::map<std::tuple<int, int, int, std::string>, std::map<double, double>> samples;
    for (const auto& r : rows)
        samples[{r.bp_id, r.p, r.k, r.strategy}][static_cast<double>(r.ranks)] = r.seconds_per_iter;
    std::vector<EfficiencyGroup> out;
    for (const auto& [key, s] : samples) {
        if (s.size() < 2)
            continue;
        const auto& [bp, p, k, strat] = key;
        out.push_back({bp, p, k, strat, parallel_efficiency({s.begin(), s.end()})});
    }
    return out;
}

} // namespace hobake
