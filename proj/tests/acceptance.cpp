// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "gossip_lab/coupling.hpp"
#include "gossip_lab/engines.hpp"
#include "gossip_lab/estimators.hpp"
#include "gossip_lab/generators.hpp"
#include "gossip_lab/oracle.hpp"
#include "gossip_lab/report.hpp"
#include "gossip_lab/stats.hpp"
#include "gossip_lab/structure.hpp"
#include "gossip_lab/verify.hpp"

using namespace gossip_lab;

namespace {

constexpr std::uint64_t seed = 20240611;
constexpr double ks_threshold = 0.0276;

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

std::string first_failures(const SuiteReport& r, std::size_t limit = 4) {
    std::string out;
    std::size_t shown = 0;
    for (const auto& c : r.checks)
        if (!c.pass && shown++ < limit) out += (out.empty() ? "" : "; ") + c.name + " (" + c.detail + ")";
    return out;
}

Outcome oracle_exactness() {
    Outcome o;
    double worst = 0.0;
    auto close = [&](const std::string& name, double got, double want) {
        worst = std::max(worst, std::fabs(got - want));
        o.require(std::fabs(got - want) <= 1e-9, strprintf("%s %.12g vs %.12g", name.c_str(), got, want));
    };
    for (std::size_t n = 3; n <= 10; ++n) {
        close(strprintf("P_%zu async", n), exact_async_expected(generate_family(FamilySpec::path(n)), 0),
              closed_form(ClosedForm::path_async_mean, n));
        close(strprintf("K_%zu async", n), exact_async_expected(generate_family(FamilySpec::complete(n)), 0),
              closed_form(ClosedForm::complete_async_mean, n));
    }
    for (std::size_t n = 3; n <= 8; ++n) {
        const Graph g = generate_family(FamilySpec::path(n));
        double w = 0.0;
        for (Vertex v = 0; v < n; ++v) w = std::max(w, exact_sync_expected(g, v));
        close(strprintf("P_%zu sync worst", n), w, closed_form(ClosedForm::path_sync_mean, n));
    }
    for (std::size_t n = 3; n <= 10; ++n) {
        const Graph g = generate_family(FamilySpec::star(n));
        const double threshold = 1.0 / static_cast<double>(n);
        std::size_t gst = 0;
        for (std::size_t t = 0; gst == 0 && t <= 10; ++t) {
            double worst_tail = 0.0;
            for (Vertex v = 0; v < n; ++v) worst_tail = std::max(worst_tail, exact_sync_tail(g, v, t));
            if (worst_tail <= threshold) gst = t;
        }
        close(strprintf("star_%zu sync gst", n), static_cast<double>(gst), 2.0);
    }
    if (o.pass) o.detail = strprintf("max abs error %.3g", worst);
    return o;
}

Outcome engine_agreement() {
    Outcome o;
    const std::size_t trials = 10'000;
    double worst = 0.0;
    for (const auto& spec : {FamilySpec::path(6), FamilySpec::complete(5), FamilySpec::double_star(10),
                             FamilySpec::diamonds(2, 3)}) {
        const Graph g = generate_family(spec);
        std::vector<double> ev(trials), fpp(trials), two(trials);
        for (std::size_t t = 0; t < trials; ++t) {
            RandomSource a(seed, 3 * t), b(seed, 3 * t + 1), c(seed, 3 * t + 2);
            ev[t] = run_async_event(g, 0, Variant::push_pull, a).spread_time;
            fpp[t] = run_async_fpp(g, 0, Variant::push_pull, b).spread_time;
            two[t] = run_two_clock(g, 0, c).spread_time;
        }
        const double d[] = {ks_two_sample(ev, fpp), ks_two_sample(ev, two), ks_two_sample(fpp, two)};
        const char* names[] = {"event/fpp", "event/two_clock", "fpp/two_clock"};
        for (int i = 0; i < 3; ++i) {
            worst = std::max(worst, d[i]);
            o.require(d[i] < ks_threshold, strprintf("%s %s D=%.4f", spec.label().c_str(), names[i], d[i]));
        }
    }
    if (o.pass) o.detail = strprintf("max D %.4f < %.4f", worst, ks_threshold);
    return o;
}

Outcome monte_carlo_oracle() {
    Outcome o;
    const auto checks = monte_carlo_vs_oracle(
        {FamilySpec::path(6), FamilySpec::complete(5), FamilySpec::star(6), FamilySpec::double_star(8)}, 100'000,
        seed, true, default_threads());
    double worst = 1e300;
    for (const auto& c : checks) {
        worst = std::min(worst, c.margin);
        o.require(c.pass, c.name + " " + c.detail);
    }
    if (o.pass) o.detail = strprintf("%zu (graph, model, start) checks, min margin %.4g", checks.size(), worst);
    return o;
}

Outcome edge_law() {
    Outcome o;
    const Graph g = generate_family(FamilySpec::double_star(100));
    std::vector<double> xs(10'000);
    for (std::size_t t = 0; t < xs.size(); ++t) {
        RandomSource src(seed, t);
        xs[t] = measure_communication_time(g, 0, 1, src);
    }
    const double mean = mean_of(xs);
    const double rate = 4.0 / 100.0;
    const double d = ks_one_sample(xs, [rate](double t) { return 1.0 - std::exp(-rate * t); });
    const double crit = ks_critical(0.01, xs.size());
    o.require(std::fabs(mean - 25.0) <= 0.05 * 25.0, strprintf("mean %.3f", mean));
    o.require(d < crit, strprintf("KS D=%.4f >= %.4f", d, crit));
    if (o.pass) o.detail = strprintf("mean %.3f (target 25), KS D=%.4f < %.4f", mean, d, crit);
    return o;
}

Outcome inequality_battery() {
    Outcome o;
    std::size_t total = 0;
    for (std::size_t n : {20u, 50u, 100u}) {
        VerifyOptions opt;
        opt.seed = seed;
        opt.sizes = {n};
        opt.trials = recommended_gst_trials(n);
        const auto r = verify_bounds(opt);
        total += r.checks.size();
        o.require(r.passed(), first_failures(r));
    }
    if (o.pass) o.detail = strprintf("%zu checks over 7 families at n = 20, 50, 100", total);
    return o;
}

Outcome star_asymptotics() {
    Outcome o;
    const std::size_t n = 1000;
    const FamilySpec spec = FamilySpec::star(n);
    const Graph g = generate_family(spec);
    // every leaf has the centre as its only neighbour, so one leaf stands for all
    bool symmetric = g.degree(0) == n - 1;
    for (Vertex v = 1; v < n; ++v) symmetric = symmetric && g.degree(v) == 1 && g.has_edge(v, 0);
    o.require(symmetric, "leaves not interchangeable");
    const Vertex starts[] = {0, 1};
    const auto s = summarize_spread(g, Model::async, Variant::push_pull, 100'000, seed, starts, default_threads());
    const double log_n = std::log(static_cast<double>(n));
    const double wast_ratio = s.wast.point / log_n;
    const double gst_ratio = s.gst.point / (2.0 * log_n);
    o.require(wast_ratio >= 0.95 && wast_ratio <= 1.15,
              strprintf("wast/log n = %.4f outside [0.95, 1.15] (centre %.4f, leaf %.4f, exact leaf mean %.4f)",
                        wast_ratio, s.per_start[0].mean.point, s.per_start[1].mean.point,
                        (1.0 + harmonic(n - 2)) * static_cast<double>(n - 1) / static_cast<double>(n)));
    o.require(gst_ratio >= 0.85 && gst_ratio <= 1.20, strprintf("gst/(2 log n) = %.4f outside [0.85, 1.20]", gst_ratio));
    o.detail += (o.detail.empty() ? "" : "; ") + strprintf("wast/log n = %.4f, gst/(2 log n) = %.4f", wast_ratio, gst_ratio);
    return o;
}

Outcome sync_async_separation() {
    Outcome o;
    const FamilySpec spec = FamilySpec::diamonds(20, 25);
    const Graph g = generate_family(spec);
    const auto starts = representative_starts(spec);
    const std::size_t trials = 1000;
    const auto s = summarize_spread(g, Model::sync, Variant::push_pull, trials, seed, starts, default_threads());
    const auto a = summarize_spread(g, Model::async, Variant::push_pull, trials, seed, starts, default_threads());
    o.require(s.wast.point >= 40.0, strprintf("wast_sync %.3f < 40", s.wast.point));
    o.require(a.wast.point <= s.wast.point / 2.0, strprintf("wast_async %.3f > wast_sync/2 %.3f", a.wast.point,
                                                           s.wast.point / 2.0));
    std::string passage;
    for (std::size_t k : {25u, 100u}) {
        std::vector<double> xs(100'000);
        RandomSource src(seed, k);
        for (auto& x : xs) x = diamond_hub_passage_sample(k, src);
        const double mean = mean_of(xs), bound = 15.0 / std::sqrt(static_cast<double>(k));
        o.require(mean <= bound, strprintf("passage k=%zu mean %.4f > %.4f", k, mean, bound));
        passage += strprintf(", passage k=%zu %.4f <= %.3f", k, mean, bound);
    }
    if (o.pass) o.detail = strprintf("wast_sync %.3f, wast_async %.3f", s.wast.point, a.wast.point) + passage;
    return o;
}

Outcome coupling_suites() {
    Outcome o;
    VerifyOptions opt;
    opt.seed = seed;
    const auto r = verify_coupling(opt);
    o.require(r.passed(), first_failures(r));
    if (o.pass) o.detail = strprintf("%zu checks (500 trials per graph, 10^4 partition sequences)", r.checks.size());
    return o;
}

Outcome lemma_diagnostics_k6() {
    Outcome o;
    const Graph g = generate_family(FamilySpec::complete(6));
    const auto est = estimate_guaranteed_spread(g, Model::async, Variant::push_pull, recommended_gst_trials(6), seed,
                                                {}, default_threads());
    const auto rep = lemma_diagnostics(g, 1.0 / 3.0, 1000, est.gst.point, seed);
    const auto* n_event = rep.find("N_le_4n_gst");
    const auto* s_event = rep.find("S1_gt_2ell");
    o.require(n_event && s_event, "missing events");
    if (!o.pass) return o;
    const double fn = n_event->frequency.frequency, fs = s_event->frequency.frequency;
    o.require(fn >= 0.99, strprintf("freq(N <= 4n gst) = %.4f", fn));
    o.require(fs >= 0.5 - 3.0 * s_event->frequency.stderr_, strprintf("freq(S_1 > 2 ell) = %.4f", fs));
    if (o.pass) o.detail = strprintf("gst est %.4f, freq(N <= 4n gst) %.4f, freq(S_1 > 2 ell) %.4f", est.gst.point, fn, fs);
    return o;
}

Outcome structural_exactness() {
    Outcome o;
    std::vector<FamilySpec> specs;
    for (std::size_t n : {20u, 50u, 100u})
        for (const auto& s : battery_families(n)) specs.push_back(s);
    specs.push_back(FamilySpec::diamonds(20, 25));
    specs.push_back(FamilySpec::star(1000));
    for (const auto& spec : specs) {
        const auto p = rate_profiles(generate_family(spec));
        const double n = static_cast<double>(spec.vertex_count());
        KahanSum f, pi;
        for (double x : p.rate) f.add(x);
        for (double x : p.contact) pi.add(x);
        o.require(std::fabs(f.value() - 2.0 * n) <= 1e-9 * n, spec.label() + strprintf(" sum f %.15g", f.value()));
        o.require(std::fabs(pi.value() - 1.0) <= 1e-12, spec.label() + strprintf(" sum pi %.17g", pi.value()));
    }
    const auto k4 = expansion_metrics(generate_family(FamilySpec::complete(4)));
    const auto s5 = expansion_metrics(generate_family(FamilySpec::star(5)));
    o.require(k4.conductance == Rational(2, 3), "K_4 conductance " + k4.conductance.str());
    o.require(k4.vertex_expansion == Rational(1, 1), "K_4 vertex expansion " + k4.vertex_expansion.str());
    o.require(s5.vertex_expansion == Rational(1, 2), "star(5) vertex expansion " + s5.vertex_expansion.str());
    if (o.pass) o.detail = strprintf("%zu graphs; K_4 Phi=2/3 alpha=1; star(5) alpha=1/2", specs.size());
    return o;
}

Outcome determinism() {
    Outcome o;
    const FamilySpec spec = FamilySpec::gnp(40, 0.15, 3);
    const Graph g = generate_family(spec);
    auto estimate_bytes = [&](Model model, std::size_t threads) {
        const auto s = summarize_spread(g, model, Variant::push_pull, 500, seed, {}, threads);
        return dump_report(estimate_report(g, spec.label(), s, Stat::gst, {{"seed", seed}, {"trials", 500}}));
    };
    for (Model model : {Model::async, Model::sync}) {
        const auto a = estimate_bytes(model, 1), b = estimate_bytes(model, 1), c = estimate_bytes(model, 4);
        o.require(a == b, "repeat differs for " + to_string(model));
        o.require(a == c, "thread count changes " + to_string(model));
    }
    VerifyOptions opt;
    opt.seed = seed;
    opt.trials = 2000;
    opt.threads = 1;
    const auto one = dump_report(nlohmann::json(verify_engines(opt)));
    opt.threads = 4;
    const auto four = dump_report(nlohmann::json(verify_engines(opt)));
    o.require(one == four, "engines suite report depends on thread count");
    if (o.pass) o.detail = "estimate and verify reports identical across repeats and 1 vs 4 threads";
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"oracle exactness", oracle_exactness},
        {"engine agreement", engine_agreement},
        {"monte carlo vs oracle", monte_carlo_oracle},
        {"edge law", edge_law},
        {"inequality battery", inequality_battery},
        {"star asymptotics", star_asymptotics},
        {"sync/async separation", sync_async_separation},
        {"coupling suites", coupling_suites},
        {"lemma diagnostics", lemma_diagnostics_k6},
        {"structural exactness", structural_exactness},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failed += !o.pass;
        std::printf("%s  %2zu %-22s %s [%.1fs]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
