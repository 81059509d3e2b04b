// gossip-lab: generate graphs, run protocols, estimate spread times, verify.
//
// Exit codes: 0 success, 1 a verification check failed, 2 usage error, 3 I/O error.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gossip_lab/coupling.hpp"
#include "gossip_lab/engines.hpp"
#include "gossip_lab/estimators.hpp"
#include "gossip_lab/generators.hpp"
#include "gossip_lab/graph.hpp"
#include "gossip_lab/oracle.hpp"
#include "gossip_lab/report.hpp"
#include "gossip_lab/verify.hpp"

namespace gl = gossip_lab;
using nlohmann::json;

namespace {

enum Exit { exit_ok = 0, exit_check = 1, exit_usage = 2, exit_io = 3 };

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct GraphSource {
    std::string family;
    std::size_t n = 0, m = 0, k = 0, d = 0;
    double p = 0.0;
    std::uint64_t graph_seed = 0;
    std::string path;

    void attach(CLI::App* app) {
        auto* fam = app->add_option("--family", family, "path|star|complete|double_star|diamonds|hypercube|gnp");
        auto* file = app->add_option("--graph", path, "edge-list file");
        fam->excludes(file);
        app->add_option("--n", n, "vertex count");
        app->add_option("--m", m, "diamonds: number of diamonds");
        app->add_option("--k", k, "diamonds: paths per diamond");
        app->add_option("--d", d, "hypercube dimension");
        app->add_option("--p", p, "gnp edge probability");
        app->add_option("--graph-seed", graph_seed, "gnp seed");
    }

    gl::FamilySpec spec() const {
        gl::FamilySpec s;
        s.family = gl::family_from_string(family);
        s.n = n;
        s.m = m;
        s.k = k;
        s.d = d;
        s.p = p;
        s.seed = graph_seed;
        return s;
    }

    json config() const {
        if (!path.empty()) return {{"path", path}};
        return spec();
    }

    std::string label() const { return path.empty() ? spec().label() : path; }

    gl::Graph load() const {
        if (family.empty() && path.empty()) throw UsageError("one of --family or --graph is required");
        if (!path.empty()) return gl::read_edge_list_file(path);
        try {
            return gl::generate_family(spec());
        } catch (const std::invalid_argument& e) {
            throw UsageError(e.what());
        }
    }
};

void write_output(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw gl::IoError("cannot open '" + path + "' for writing");
    out << text;
    if (!out) throw gl::IoError("write to '" + path + "' failed");
}

std::vector<gl::Vertex> check_starts(const gl::Graph& g, const std::vector<gl::Vertex>& starts) {
    for (auto v : starts)
        if (v >= g.vertex_count()) throw UsageError("start " + std::to_string(v) + " out of range");
    return starts;
}

/// "a:b:step" (inclusive, empty when a > b) or a comma list.
std::vector<std::size_t> parse_range(const std::string& text) {
    std::vector<std::size_t> out;
    if (text.empty()) return out;
    auto num = [&](const std::string& s) -> std::size_t {
        std::size_t used = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(s, &used);
        } catch (const std::exception&) {
            throw UsageError("bad range component '" + s + "'");
        }
        if (used != s.size()) throw UsageError("bad range component '" + s + "'");
        return static_cast<std::size_t>(v);
    };
    if (text.find(':') != std::string::npos) {
        std::vector<std::string> parts;
        std::stringstream ss(text);
        for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
        if (parts.size() < 2 || parts.size() > 3) throw UsageError("range must be a:b or a:b:step");
        const std::size_t a = num(parts[0]), b = num(parts[1]), step = parts.size() == 3 ? num(parts[2]) : 1;
        if (step == 0) throw UsageError("range step must be positive");
        for (std::size_t x = a; x <= b; x += step) out.push_back(x);
        return out;
    }
    std::stringstream ss(text);
    for (std::string part; std::getline(ss, part, ',');) out.push_back(num(part));
    return out;
}

/// k near (n / log n)^(2/3) with n = k m + m + 1, by fixed-point iteration.
std::size_t sweep_k(std::size_t m) {
    double k = 2.0;
    for (int i = 0; i < 100; ++i) {
        const double n = k * m + m + 1;
        const double next = std::max(2.0, std::round(std::pow(n / std::log(n), 2.0 / 3.0)));
        if (next == k) break;
        k = next;
    }
    return static_cast<std::size_t>(k);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Rumour-spreading simulation, estimation and verification"};
    app.require_subcommand(1);
    app.fallthrough();
    std::size_t threads = gl::default_threads();
    app.add_option("--threads", threads, "worker threads (default GOSSIP_LAB_THREADS or 1)")->check(
        CLI::PositiveNumber);

    // gen
    auto* gen = app.add_subcommand("gen", "write a generated graph as an edge list");
    GraphSource gen_src;
    std::string gen_out;
    gen->add_option("--family", gen_src.family)->required();
    gen->add_option("--n", gen_src.n);
    gen->add_option("--m", gen_src.m);
    gen->add_option("--k", gen_src.k);
    gen->add_option("--d", gen_src.d);
    gen->add_option("--p", gen_src.p);
    gen->add_option("--seed", gen_src.graph_seed, "gnp seed");
    gen->add_option("--out,-o", gen_out, "output file (default stdout)");

    // estimate
    auto* est = app.add_subcommand("estimate", "Monte Carlo wast or gst");
    GraphSource est_src;
    est_src.attach(est);
    std::string est_model = "async", est_variant = "push_pull", est_stat = "wast", est_format = "json", est_out;
    std::size_t est_trials = 1000;
    std::uint64_t est_seed = 0;
    std::vector<gl::Vertex> est_starts;
    bool est_raw = false;
    est->add_option("--model", est_model)->check(CLI::IsMember({"sync", "async"}));
    est->add_option("--variant", est_variant)->check(CLI::IsMember({"push_pull", "push_only", "pull_only"}));
    est->add_option("--stat", est_stat)->check(CLI::IsMember({"wast", "gst"}));
    est->add_option("--trials", est_trials, "trials per start")->check(CLI::PositiveNumber);
    est->add_option("--seed", est_seed);
    est->add_option("--starts", est_starts, "start vertices (default all)")->delimiter(',');
    est->add_option("--format", est_format)->check(CLI::IsMember({"json", "csv"}));
    est->add_flag("--raw", est_raw, "csv: one row per (start, trial)");
    est->add_option("--out,-o", est_out);

    // verify
    auto* ver = app.add_subcommand("verify", "run a verification suite");
    std::string ver_suite, ver_out;
    gl::VerifyOptions ver_opt;
    ver->add_option("--suite", ver_suite)->required()->check(CLI::IsMember(gl::suite_names()));
    ver->add_option("--seed", ver_opt.seed);
    ver->add_option("--trials", ver_opt.trials, "override the suite's trial count");
    ver->add_option("--sizes", ver_opt.sizes, "bounds: graph sizes")->delimiter(',');
    ver->add_option("--out,-o", ver_out);

    // sweep
    auto* sw = app.add_subcommand("sweep", "diamonds sync/async separation sweep (CSV)");
    std::string sw_m, sw_k, sw_out;
    std::size_t sw_trials = 1000;
    std::uint64_t sw_seed = 0;
    sw->add_option("--m", sw_m, "diamond counts: a:b[:step] or a,b,c")->required();
    sw->add_option("--k", sw_k, "paths per diamond, one per m (default near (n/log n)^(2/3))");
    sw->add_option("--trials", sw_trials)->check(CLI::Bound(30, 100'000'000));
    sw->add_option("--seed", sw_seed);
    sw->add_option("--out,-o", sw_out);

    // run
    auto* run = app.add_subcommand("run", "one protocol run as a JSON record");
    GraphSource run_src;
    run_src.attach(run);
    std::string run_engine = "fpp", run_variant = "push_pull", run_out;
    gl::Vertex run_start = 0;
    std::uint64_t run_seed = 0, run_stream = 0;
    run->add_option("--engine", run_engine)
        ->check(CLI::IsMember({"sync", "event", "fpp", "two_clock", "sequential", "decelerated"}));
    run->add_option("--variant", run_variant)->check(CLI::IsMember({"push_pull", "push_only", "pull_only"}));
    run->add_option("--start", run_start);
    run->add_option("--seed", run_seed);
    run->add_option("--stream", run_stream);
    run->add_option("--out,-o", run_out);

    // diagnose
    auto* dia = app.add_subcommand("diagnose", "block-partition lemma diagnostics");
    GraphSource dia_src;
    dia_src.attach(dia);
    double dia_alpha = 1.0 / 3.0;
    std::size_t dia_trials = 1000;
    std::optional<double> dia_gst;
    std::uint64_t dia_seed = 0;
    std::string dia_out;
    dia->add_option("--alpha", dia_alpha)->check(CLI::Range(0.0, 0.999999));
    dia->add_option("--trials", dia_trials)->check(CLI::Bound(100, 100'000'000));
    dia->add_option("--gst", dia_gst, "async gst estimate (default: estimated with 1000 trials per start)");
    dia->add_option("--seed", dia_seed);
    dia->add_option("--out,-o", dia_out);

    // exact
    auto* ex = app.add_subcommand("exact", "exact expected spread time on a small graph");
    GraphSource ex_src;
    ex_src.attach(ex);
    std::string ex_model = "async", ex_variant = "push_pull", ex_out;
    gl::Vertex ex_start = 0;
    ex->add_option("--model", ex_model)->check(CLI::IsMember({"sync", "async"}));
    ex->add_option("--variant", ex_variant)->check(CLI::IsMember({"push_pull", "push_only", "pull_only"}));
    ex->add_option("--start", ex_start);
    ex->add_option("--out,-o", ex_out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }
    ver_opt.threads = threads;

    try {
        if (*gen) {
            gl::Graph g = gl::generate_family(gen_src.spec());
            if (gen_out.empty()) {
                std::cout << gl::format_edge_list(g);
                std::cerr << "n=" << g.vertex_count() << " m=" << g.edge_count() << " family=" << gen_src.family << "\n";
            } else {
                gl::write_edge_list_file(g, gen_out);
                std::cout << "n=" << g.vertex_count() << " m=" << g.edge_count() << " family=" << gen_src.family << "\n";
            }
            return exit_ok;
        }

        if (*est) {
            const gl::Graph g = est_src.load();
            const auto starts = check_starts(g, est_starts);
            const auto model = gl::model_from_string(est_model);
            const auto variant = gl::variant_from_string(est_variant);
            const auto stat = gl::stat_from_string(est_stat);
            if (stat == gl::Stat::wast && est_trials < gl::min_mean_trials)
                throw UsageError("wast needs --trials >= 30");
            auto summary = gl::summarize_spread(g, model, variant, est_trials, est_seed, starts, threads, est_raw);
            if (stat == gl::Stat::gst && summary.below_recommended)
                std::cerr << "warning: " << est_trials << " trials per start is below the recommended "
                          << gl::recommended_gst_trials(g.vertex_count()) << " for the gst quantile\n";
            json config{{"subcommand", "estimate"}, {"graph", est_src.config()}, {"model", est_model},
                        {"variant", est_variant},   {"stat", est_stat},          {"trials", est_trials},
                        {"seed", est_seed},         {"starts", starts},          {"format", est_format},
                        {"raw", est_raw}};
            std::string text;
            if (est_format == "json")
                text = gl::dump_report(gl::estimate_report(g, est_src.label(), summary, stat, config));
            else
                text = est_raw ? gl::raw_samples_csv(summary) : gl::estimate_csv(summary, stat);
            write_output(est_out, text);
            return exit_ok;
        }

        if (*ver) {
            const auto report = gl::run_suite(ver_suite, ver_opt);
            write_output(ver_out, gl::dump_report(report));
            for (const auto& name : report.failures()) std::cerr << "FAILED: " << name << "\n";
            return report.passed() ? exit_ok : exit_check;
        }

        if (*sw) {
            const auto ms = parse_range(sw_m);
            const auto ks = parse_range(sw_k);
            if (!ks.empty() && ks.size() != ms.size()) throw UsageError("--k needs one value per --m value");
            std::string text = "n,k,m,wast_sync,wast_async,ratio\n";
            for (std::size_t i = 0; i < ms.size(); ++i) {
                const std::size_t m = ms[i];
                const std::size_t k = ks.empty() ? sweep_k(m) : ks[i];
                if (m < 1 || k < 2) throw UsageError("diamonds need m >= 1 and k >= 2");
                const auto spec = gl::FamilySpec::diamonds(m, k);
                const gl::Graph g = gl::generate_family(spec);
                const std::vector<gl::Vertex> starts{0, static_cast<gl::Vertex>(m + 1)};
                const auto s = gl::summarize_spread(g, gl::Model::sync, gl::Variant::push_pull, sw_trials, sw_seed,
                                                    starts, threads);
                const auto a = gl::summarize_spread(g, gl::Model::async, gl::Variant::push_pull, sw_trials, sw_seed,
                                                    starts, threads);
                char row[256];
                std::snprintf(row, sizeof row, "%zu,%zu,%zu,%.10g,%.10g,%.10g\n", g.vertex_count(), k, m,
                              s.wast.point, a.wast.point, s.wast.point / a.wast.point);
                text += row;
            }
            write_output(sw_out, text);
            return exit_ok;
        }

        if (*run) {
            const gl::Graph g = run_src.load();
            if (run_start >= g.vertex_count()) throw UsageError("--start out of range");
            const auto variant = gl::variant_from_string(run_variant);
            gl::RandomSource src(run_seed, run_stream);
            gl::RunRecord rec;
            if (run_engine == "sync") {
                rec = gl::run_synchronous(g, run_start, variant, src);
            } else if (run_engine == "event") {
                rec = gl::run_async_event(g, run_start, variant, src);
            } else if (run_engine == "fpp") {
                rec = gl::run_async_fpp(g, run_start, variant, src);
            } else if (run_engine == "two_clock") {
                rec = gl::run_two_clock(g, run_start, src);
            } else if (run_engine == "sequential") {
                gl::CallingSequenceDrawer drawer(g, src, false);
                gl::CallingSequence calls;
                const gl::Vertex sources[] = {run_start};
                rec = gl::run_sequential(g, sources, calls, &drawer, variant).record;
            } else {
                gl::CallingLists lists(g, src.substream(0));
                gl::RingSchedule rings(g.vertex_count(), src.substream(1));
                rec = gl::run_decelerated(g, run_start, lists, rings, gl::Deceleration::epochs(), variant).record;
            }
            rec.seed = run_seed;
            rec.stream = run_stream;
            json j = rec;
            j["schema"] = gl::report_schema;
            j["config"] = {{"subcommand", "run"}, {"graph", run_src.config()}, {"engine", run_engine},
                           {"variant", run_variant}, {"start", run_start}, {"seed", run_seed}, {"stream", run_stream}};
            write_output(run_out, gl::dump_report(j));
            return exit_ok;
        }

        if (*dia) {
            const gl::Graph g = dia_src.load();
            double gst = 0.0;
            if (dia_gst) {
                gst = *dia_gst;
            } else if (g.vertex_count() > 1) {
                gst = gl::summarize_spread(g, gl::Model::async, gl::Variant::push_pull, 1000, dia_seed, {}, threads)
                          .gst.point;
            }
            const auto report = gl::lemma_diagnostics(g, dia_alpha, dia_trials, gst, dia_seed);
            json j = report;
            j["schema"] = gl::report_schema;
            j["config"] = {{"subcommand", "diagnose"}, {"graph", dia_src.config()}, {"alpha", dia_alpha},
                           {"trials", dia_trials},       {"gst", gst},                {"seed", dia_seed}};
            write_output(dia_out, gl::dump_report(j));
            return exit_ok;
        }

        if (*ex) {
            const gl::Graph g = ex_src.load();
            if (ex_start >= g.vertex_count()) throw UsageError("--start out of range");
            const auto variant = gl::variant_from_string(ex_variant);
            const double value = ex_model == "async" ? gl::exact_async_expected(g, ex_start, variant)
                                                     : gl::exact_sync_expected(g, ex_start, variant);
            json j{{"schema", gl::report_schema},
                   {"command", "exact"},
                   {"config",
                    {{"graph", ex_src.config()}, {"model", ex_model}, {"variant", ex_variant}, {"start", ex_start}}},
                   {"expected", value}};
            write_output(ex_out, gl::dump_report(j));
            return exit_ok;
        }
    } catch (const gl::GraphError& e) {
        // only edge-list reads raise these
        std::cerr << "error: " << e.what() << "\n";
        return exit_io;
    } catch (const gl::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_io;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const gl::OracleLimitError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_check;
    }
    return exit_usage;
}
