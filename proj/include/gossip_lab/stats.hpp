#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace gossip_lab {

inline constexpr double z95 = 1.959963984540054;

/// Neumaier compensated summation.
class KahanSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x))
            carry_ += (sum_ - t) + x;
        else
            carry_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const noexcept { return sum_ + carry_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

struct Estimate {
    enum class Kind { mean, quantile };

    double point = 0.0;
    double stderr_ = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    Kind kind = Kind::mean;
    double level = 0.0;  // quantile level, when kind == quantile

    bool well_formed() const noexcept {
        return ci_lo <= point && point <= ci_hi && stderr_ >= 0.0 && trials >= 1;
    }
};

inline void to_json(nlohmann::json& j, const Estimate& e) {
    j = nlohmann::json{{"point", e.point},
                       {"stderr", e.stderr_},
                       {"ci95", {e.ci_lo, e.ci_hi}},
                       {"trials", e.trials},
                       {"seed", e.seed},
                       {"kind", e.kind == Estimate::Kind::mean ? "mean" : "quantile"}};
    if (e.kind == Estimate::Kind::quantile) j["level"] = e.level;
}

inline double mean_of(std::span<const double> xs) {
    KahanSum s;
    for (double x : xs) s.add(x);
    return xs.empty() ? 0.0 : s.value() / static_cast<double>(xs.size());
}

/// Sample mean with its standard error and a normal-approximation 95% CI.
inline Estimate mean_estimate(std::span<const double> xs, std::uint64_t seed = 0) {
    if (xs.empty()) throw std::invalid_argument("mean of empty sample");
    const double mean = mean_of(xs);
    KahanSum ss;
    for (double x : xs) ss.add((x - mean) * (x - mean));
    const double m = static_cast<double>(xs.size());
    const double var = xs.size() > 1 ? ss.value() / (m - 1.0) : 0.0;
    const double se = std::sqrt(var / m);
    Estimate e;
    e.point = mean;
    e.stderr_ = se;
    e.ci_lo = mean - z95 * se;
    e.ci_hi = mean + z95 * se;
    e.trials = xs.size();
    e.seed = seed;
    return e;
}

/// 1-based rank ceil(M * level) of the upper empirical order statistic,
/// computed without floating-point slop for levels like 1 - 1/n.
inline std::size_t quantile_rank(std::size_t m, double level) {
    const double exact = static_cast<double>(m) * level;
    auto rank = static_cast<std::size_t>(std::ceil(exact - 1e-9 * std::max(1.0, exact)));
    return std::clamp<std::size_t>(rank, 1, m);
}

/// Order-statistic quantile estimate with a distribution-free binomial CI:
/// ranks floor(Mq - z sqrt(Mq(1-q))) and ceil(Mq + z sqrt(Mq(1-q))) + 1.
inline Estimate quantile_estimate(std::vector<double> xs, double level, std::uint64_t seed = 0) {
    if (xs.empty()) throw std::invalid_argument("quantile of empty sample");
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("quantile level must lie in (0, 1)");
    std::sort(xs.begin(), xs.end());
    const std::size_t m = xs.size();
    const std::size_t rank = quantile_rank(m, level);
    const double mq = static_cast<double>(m) * level;
    const double spread = z95 * std::sqrt(mq * (1.0 - level));
    const auto lo_rank = static_cast<std::size_t>(std::clamp(std::floor(mq - spread), 1.0, static_cast<double>(m)));
    const auto hi_rank =
        static_cast<std::size_t>(std::clamp(std::ceil(mq + spread) + 1.0, 1.0, static_cast<double>(m)));
    Estimate e;
    e.kind = Estimate::Kind::quantile;
    e.level = level;
    e.point = xs[rank - 1];
    e.ci_lo = std::min(xs[lo_rank - 1], e.point);
    e.ci_hi = std::max(xs[hi_rank - 1], e.point);
    e.stderr_ = (e.ci_hi - e.ci_lo) / (2.0 * z95);
    e.trials = m;
    e.seed = seed;
    return e;
}

/// Empirical P(X > t).
inline double tail_fraction(std::span<const double> xs, double t) {
    auto count = std::count_if(xs.begin(), xs.end(), [t](double x) { return x > t; });
    return xs.empty() ? 0.0 : static_cast<double>(count) / static_cast<double>(xs.size());
}

struct Proportion {
    double frequency = 0.0;
    double stderr_ = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::size_t trials = 0;
};

/// Wilson score interval for a binomial proportion.
inline Proportion proportion(std::size_t successes, std::size_t trials) {
    if (trials == 0) throw std::invalid_argument("proportion of zero trials");
    const double nn = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / nn;
    const double z2 = z95 * z95;
    const double centre = (p + z2 / (2 * nn)) / (1 + z2 / nn);
    const double half = z95 * std::sqrt(p * (1 - p) / nn + z2 / (4 * nn * nn)) / (1 + z2 / nn);
    // the min/max with p only absorbs rounding at 0 and 1
    return {p, std::sqrt(p * (1 - p) / nn), std::min(p, std::max(0.0, centre - half)),
            std::max(p, std::min(1.0, centre + half)), trials};
}

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
inline double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("KS needs nonempty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

/// One-sample KS statistic against a continuous CDF.
inline double ks_one_sample(std::vector<double> xs, const std::function<double(double)>& cdf) {
    if (xs.empty()) throw std::invalid_argument("KS needs a nonempty sample");
    std::sort(xs.begin(), xs.end());
    const double m = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        d = std::max({d, static_cast<double>(i + 1) / m - f, f - static_cast<double>(i) / m});
    }
    return d;
}

/// Asymptotic KS critical value c(alpha) sqrt((n + m) / (n m)), c(alpha) = sqrt(-ln(alpha/2) / 2).
/// With m == 0 the one-sample value c(alpha) / sqrt(n) is returned.
inline double ks_critical(double alpha, std::size_t n, std::size_t m = 0) {
    const double c = std::sqrt(-std::log(alpha / 2.0) / 2.0);
    if (m == 0) return c / std::sqrt(static_cast<double>(n));
    const double dn = static_cast<double>(n), dm = static_cast<double>(m);
    return c * std::sqrt((dn + dm) / (dn * dm));
}

/// Pearson chi-square statistic for observed counts against expected probabilities.
inline double chi_square_statistic(std::span<const std::size_t> observed, std::span<const double> probabilities) {
    std::size_t total = 0;
    for (auto o : observed) total += o;
    double stat = 0.0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        const double expected = probabilities[i] * static_cast<double>(total);
        const double diff = static_cast<double>(observed[i]) - expected;
        stat += diff * diff / expected;
    }
    return stat;
}

/// H_n = sum_{i=1}^n 1/i, summed from the small terms up.
inline double harmonic(std::size_t n) {
    double h = 0.0;
    for (std::size_t i = n; i >= 1; --i) h += 1.0 / static_cast<double>(i);
    return h;
}

}  // namespace gossip_lab
