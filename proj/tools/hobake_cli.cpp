// Command-line front end: run, sweep, analyze, verify.
// Exit codes: 0 success, 1 runtime failure, 2 configuration or input error.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "hobake/hobake.hpp"

namespace {

using namespace hobake;

constexpr int exit_runtime = 1;
constexpr int exit_config = 2;

/// Flags shared by run and sweep. Values are kept as text and routed through
/// apply_setting so flags, --set and config files share one validator.
struct RunFlags {
    std::string config;
    std::vector<std::string> sets;
    std::string bp, mode, p, k, ranks, iters, strategy, block, threads, trials;
    bool deterministic = false, nondeterministic = false, instrument = false, quiet = false;
    std::string out, plot;
};

void add_run_flags(CLI::App* cmd, RunFlags& f, bool sweep) {
    cmd->add_option("--config", f.config, "key = value configuration file (flags override it)");
    cmd->add_option("--set", f.sets, "extra key=value setting, applied after --config")->take_all();
    cmd->add_option("--bp", f.bp, "bake-off problem 1..6");
    cmd->add_option("--mode", f.mode, "bk (local kernel only) or bp (full PCG)");
    cmd->add_option("--p", f.p, sweep ? "polynomial orders, e.g. 2..6 or 3,5,7" : "polynomial order");
    cmd->add_option("--k", f.k, sweep ? "element exponents (E = 2^k), e.g. 3..6" : "element exponent (E = 2^k)");
    cmd->add_option("--ranks", f.ranks, sweep ? "simulated rank counts, e.g. 1,2,4,8" : "simulated rank count");
    cmd->add_option("--iters", f.iters, "iterations per trial (default 100)");
    cmd->add_option("--strategy", f.strategy, "sumfact, interpfirst, evenodd or blocked");
    cmd->add_option("--block", f.block, "element block for the blocked strategy (4 or 8)");
    cmd->add_option("--threads", f.threads, "worker threads (default: HOBAKE_THREADS or hardware)");
    cmd->add_option("--trials", f.trials, "timed trials; the median is reported (default 3)");
    cmd->add_flag("--deterministic", f.deterministic, "fixed-order reductions and gather-scatter (default)");
    cmd->add_flag("--nondeterministic", f.nondeterministic, "allow the faster single-phase gather-scatter");
    cmd->add_flag("--instrument", f.instrument, "report counted flops and words against the models");
    cmd->add_flag("--quiet", f.quiet, "only print results");
    cmd->add_option("--out", f.out, sweep ? "dataset CSV path (default: stdout)" : "append the CSV row to this file");
    if (sweep)
        cmd->add_option("--plot", f.plot, "also write plot blocks (one per p) to this file");
}

Settings resolve(const RunFlags& f) {
    Settings s;
    if (!f.config.empty())
        apply_config_file(s, f.config);
    for (const auto& kv : f.sets) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--set expects key=value, got '" + kv + "'");
        apply_setting(s, kv.substr(0, eq), kv.substr(eq + 1));
    }
    const std::pair<const char*, const std::string*> flags[] = {
        {"bp", &f.bp},         {"mode", &f.mode},         {"p", &f.p},         {"k", &f.k},
        {"ranks", &f.ranks},   {"iters", &f.iters},       {"strategy", &f.strategy}, {"block", &f.block},
        {"threads", &f.threads}, {"trials", &f.trials}};
    for (const auto& [key, value] : flags)
        if (!value->empty())
            apply_setting(s, key, *value);
    if (f.deterministic && f.nondeterministic)
        throw ConfigError("--deterministic and --nondeterministic are exclusive");
    if (f.deterministic)
        s.run.deterministic = true;
    if (f.nondeterministic)
        s.run.deterministic = false;
    if (f.instrument)
        s.run.instrument = true;
    return s;
}

void report_instrumentation(const RunResult& r) {
    const RunConfig& c = r.config;
    const BPSpec spec = bp_spec(c.bp);
    const double per_apply = static_cast<double>(r.flops_measured) / c.iterations / r.E;
    const double model = spec.system == OperatorKind::Stiffness
                             ? flop_model(c.strategy, c.p, r.q) * static_cast<double>(spec.components)
                             : mass_flop_model(c.p, r.q, spec.quad == QuadKind::GLL) * static_cast<double>(spec.components);
    const auto traffic = bytes_model(spec.system, c.p, r.q, spec.components);
    std::fprintf(stderr, "instrument: flops/element/apply measured %.0f model %.0f; words/element/apply measured %.0f model %zu\n",
                 per_apply, model, static_cast<double>(r.words_measured) / c.iterations / r.E, traffic.total());
}

void append_csv(const std::string& path, const Record& rec) {
    const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
    std::ofstream f(path, std::ios::app);
    if (!f)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    if (fresh)
        f << csv_header() << '\n';
    f << csv_row(rec) << '\n';
}

int cmd_run(const RunFlags& f) {
    const RunConfig c = single_run(resolve(f));
    if (!f.quiet)
        std::fprintf(stderr, "run: BP%d %s p=%d k=%d ranks=%zu iters=%d strategy=%s\n", c.bp, to_string(c.mode), c.p,
                     c.k, c.ranks, c.iterations, to_string(c.strategy));
    const RunResult r = run(c);
    const Record rec = to_record(r);
    if (!f.quiet)
        std::cout << csv_header() << '\n';
    std::cout << csv_row(rec) << std::endl;
    if (c.instrument)
        report_instrumentation(r);
    if (!f.out.empty())
        append_csv(f.out, rec);
    return 0;
}

int cmd_sweep(const RunFlags& f) {
    const Settings s = resolve(f);
    // every list member must be individually valid before any timing starts
    for (int p : s.p_list)
        for (int k : s.k_list) {
            RunConfig probe = s.run;
            probe.p = p;
            probe.k = k;
            probe.ranks = 1;
            validate(probe);
        }
    if (!f.quiet)
        std::fprintf(stderr, "sweep: BP%d %s, %zu p x %zu k x %zu ranks\n", s.run.bp, to_string(s.run.mode),
                     s.p_list.size(), s.k_list.size(), s.ranks_list.size());
    const SweepResult res = sweep(s.run, s.p_list, s.k_list, s.ranks_list);
    std::vector<Record> rows;
    for (const auto& r : res.rows)
        rows.push_back(to_record(r));
    if (f.out.empty())
        write_csv(std::cout, rows);
    else
        emit_csv(rows, f.out);
    if (!f.plot.empty())
        emit_plot_data(rows, f.plot);
    if (!f.quiet)
        for (const auto& sk : res.skipped)
            std::fprintf(stderr, "skipped p=%d k=%d ranks=%zu: %s\n", sk.p, sk.k, sk.ranks, sk.message.c_str());
    for (const auto& fl : res.failures)
        std::fprintf(stderr, "failed p=%d k=%d ranks=%zu: %s\n", fl.p, fl.k, fl.ranks, fl.message.c_str());
    if (!f.quiet)
        std::fprintf(stderr, "sweep: %zu rows written, %zu skipped, %zu failed\n", rows.size(), res.skipped.size(),
                     res.failures.size());
    return res.failures.empty() ? 0 : exit_runtime;
}

struct AnalyzeFlags {
    std::string in, out, interp = "tau";
    bool quiet = false;
};

int cmd_analyze(const AnalyzeFlags& f) {
    Interpolation interp;
    if (f.interp == "tau")
        interp = Interpolation::TimePerPoint;
    else if (f.interp == "loglinear")
        interp = Interpolation::LogLinear;
    else
        throw ConfigError("--interp must be tau or loglinear");
    const auto rows = read_csv(f.in);
    if (rows.empty())
        throw DataError("'" + f.in + "' holds no data rows");
    const auto groups = summarize(rows, interp);
    std::printf("%-5s %-3s %-12s %5s %14s %14s %14s  %s\n", "bp", "p", "strategy", "rows", "r_max", "n_08", "t_08",
                "flags");
    for (const auto& g : groups) {
        std::string flags = g.metrics.degenerate ? "degenerate" : (g.metrics.unreached ? "unreached" : "");
        std::printf("%-5d %-3d %-12s %5zu %14.6g %14.6g %14.6g  %s\n", g.bp_id, g.p, g.strategy.c_str(),
                    g.metrics.rows, g.metrics.r_max, g.metrics.n_08, g.metrics.t_08, flags.c_str());
    }
    const auto eff = efficiency_groups(rows);
    if (!eff.empty()) {
        std::printf("\nparallel efficiency (T = seconds_per_iter, P = ranks)\n");
        for (const auto& g : eff) {
            std::printf("bp=%d p=%d k=%d %s:", g.bp_id, g.p, g.k, g.strategy.c_str());
            for (const auto& e : g.curve.entries)
                std::printf("  P=%g eta=%.3f", e.P, e.eta);
            std::printf("\n");
        }
    }
    if (!f.out.empty()) {
        std::ofstream o(f.out);
        if (!o)
            throw std::runtime_error("cannot open '" + f.out + "' for writing");
        o << summary_header() << '\n';
        for (const auto& g : groups)
            o << summary_row(g) << '\n';
    }
    return 0;
}

struct VerifyFlags {
    std::vector<std::string> checks;
    int p = 3, k = 3;
    std::size_t threads = 1;
    bool deterministic = false, quiet = false;
    double fault_g = 0.0;
};

int cmd_verify(const VerifyFlags& f) {
    VerifyOptions o;
    o.p = f.p;
    o.k = f.k;
    o.threads = f.threads;
    o.fault_g = f.fault_g;
    const auto results = run_checks(f.checks, o);
    const CheckResult* first_fail = nullptr;
    for (const auto& r : results) {
        if (!f.quiet || !r.passed)
            std::printf("%s %-22s %s (%.2f s)\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str(),
                        r.seconds);
        if (!r.passed && !first_fail)
            first_fail = &r;
    }
    if (first_fail) {
        std::fprintf(stderr, "verify failed: %s\n", first_fail->name.c_str());
        return exit_runtime;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"High-order matrix-free operator bake-off harness"};
    app.require_subcommand(1);

    RunFlags run_flags, sweep_flags;
    auto* run_cmd = app.add_subcommand("run", "time one bake-off configuration and print a CSV row");
    add_run_flags(run_cmd, run_flags, false);
    auto* sweep_cmd = app.add_subcommand("sweep", "run a grid of p / k / ranks and write the dataset");
    add_run_flags(sweep_cmd, sweep_flags, true);

    AnalyzeFlags analyze_flags;
    auto* analyze_cmd = app.add_subcommand("analyze", "r_max, n_0.8, t_0.8 and efficiency from a sweep CSV");
    analyze_cmd->add_option("input", analyze_flags.in, "dataset CSV")->required();
    analyze_cmd->add_option("--out", analyze_flags.out, "write the summary as CSV");
    analyze_cmd->add_option("--interp", analyze_flags.interp, "threshold interpolation: tau (default) or loglinear");
    analyze_cmd->add_flag("--quiet", analyze_flags.quiet);

    VerifyFlags verify_flags;
    auto* verify_cmd = app.add_subcommand("verify", "run the built-in oracle checks");
    verify_cmd->add_option("--check", verify_flags.checks, "run only these checks")->take_all();
    verify_cmd->add_option("--p", verify_flags.p, "polynomial order of the check meshes");
    verify_cmd->add_option("--k", verify_flags.k, "element exponent of the check meshes");
    verify_cmd->add_option("--threads", verify_flags.threads);
    verify_cmd->add_flag("--deterministic", verify_flags.deterministic, "accepted for symmetry; checks are deterministic");
    verify_cmd->add_flag("--quiet", verify_flags.quiet, "only report failures");
    verify_cmd->add_option("--fault-g", verify_flags.fault_g,
                           "test hook: relative perturbation of one G entry in the matrix-free operator");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_config;
    }

    try {
        if (*run_cmd)
            return cmd_run(run_flags);
        if (*sweep_cmd)
            return cmd_sweep(sweep_flags);
        if (*analyze_cmd)
            return cmd_analyze(analyze_flags);
        return cmd_verify(verify_flags);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_config;
    } catch (const DataError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_config;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_runtime;
    }
}
