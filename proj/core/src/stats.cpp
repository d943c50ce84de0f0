#include "idla/stats.hpp"

#include <gsl/gsl_cdf.h>

#include <algorithm>
#include <cmath>

#include "idla/errors.hpp"

namespace idla {
namespace stats {

double mean(const std::vector<double>& v) {
    if (v.empty()) throw ContractError("stats::mean: empty sample");
    double s = 0.0;
    for (const double x : v) s += x;
    return s / double(v.size());
}

double variance(const std::vector<double>& v) {
    if (v.size() < 2) throw ContractError("stats::variance: need at least 2 samples");
    const double m = mean(v);
    double s = 0.0;
    for (const double x : v) s += (x - m) * (x - m);
    return s / double(v.size() - 1);
}

double median(std::vector<double> v) { return percentile(std::move(v), 50.0); }

double percentile(std::vector<double> v, double p) {
    if (v.empty()) throw ContractError("stats::percentile: empty sample");
    std::sort(v.begin(), v.end());
    const double rank = (p / 100.0) * double(v.size() - 1);
    const auto lo = std::size_t(std::floor(rank));
    const auto hi = std::size_t(std::ceil(rank));
    const double frac = rank - double(lo);
    return v[lo] * (1.0 - frac) + v[hi] * frac;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double ks_statistic_normal(std::vector<double> samples) {
    if (samples.empty()) throw ContractError("ks_statistic_normal: empty sample");
    std::sort(samples.begin(), samples.end());
    const double n = double(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = normal_cdf(samples[i]);
        d = std::max(d, std::abs(double(i + 1) / n - f));
        d = std::max(d, std::abs(f - double(i) / n));
    }
    return d;
}

double ks_pvalue(double d_stat, std::size_t n) {
    const double sqrt_n = std::sqrt(double(n));
    const double x = d_stat * (sqrt_n + 0.12 + 0.11 / sqrt_n);
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        sum += (k % 2 == 1 ? term : -term);
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

double chisq_pvalue(double statistic, int dof) {
    if (dof <= 0) throw ContractError("chisq_pvalue: dof must be positive");
    return gsl_cdf_chisq_Q(statistic, double(dof));
}

ChiSq chisq_two_sample(const std::vector<std::int64_t>& a,
                       const std::vector<std::int64_t>& b,
                       std::int64_t min_pooled) {
    if (a.size() != b.size() || a.empty())
        throw ContractError("chisq_two_sample: mismatched category counts");

    std::vector<std::pair<double, double>> cells;
    double rest_a = 0.0, rest_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] + b[i] >= min_pooled)
            cells.emplace_back(double(a[i]), double(b[i]));
        else {
            rest_a += double(a[i]);
            rest_b += double(b[i]);
        }
    }
    if (rest_a + rest_b > 0.0) cells.emplace_back(rest_a, rest_b);
    if (cells.size() < 2) throw ContractError("chisq_two_sample: too few categories");

    double total_a = 0.0, total_b = 0.0;
    for (const auto& [ca, cb] : cells) {
        total_a += ca;
        total_b += cb;
    }
    const double total = total_a + total_b;

    ChiSq out;
    for (const auto& [ca, cb] : cells) {
        const double pooled = (ca + cb) / total;
        const double ea = pooled * total_a;
        const double eb = pooled * total_b;
        if (ea > 0.0) out.statistic += (ca - ea) * (ca - ea) / ea;
        if (eb > 0.0) out.statistic += (cb - eb) * (cb - eb) / eb;
    }
    out.dof = int(cells.size()) - 1;
    out.pvalue = chisq_pvalue(out.statistic, out.dof);
    return out;
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw ContractError("linear_fit: need matching samples, n >= 2");
    const double mx = mean(x);
    const double my = mean(y);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw ContractError("linear_fit: degenerate x values");
    return {sxy / sxx, my - (sxy / sxx) * mx};
}

}  // namespace stats
}  // namespace idla
