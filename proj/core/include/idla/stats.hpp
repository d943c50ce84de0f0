#pragma once

#include <cstdint>
#include <vector>

namespace idla {
namespace stats {

double mean(const std::vector<double>& v);
double variance(const std::vector<double>& v);  // unbiased
double median(std::vector<double> v);
double percentile(std::vector<double> v, double p);  // p in [0,100], linear interpolation

/// Standard normal CDF.
double normal_cdf(double x);

/// One-sample Kolmogorov-Smirnov statistic against N(0,1).
double ks_statistic_normal(std::vector<double> samples);

/// Two-sided KS p-value with the Stephens small-sample correction.
double ks_pvalue(double d_stat, std::size_t n);

/// Upper tail of chi-squared with `dof` degrees of freedom.
double chisq_pvalue(double statistic, int dof);

/// Two-sample chi-squared homogeneity test.  Categories with pooled
/// count below `min_pooled` are merged into one remainder bin.
struct ChiSq {
    double statistic = 0.0;
    int dof = 0;
    double pvalue = 1.0;
};
ChiSq chisq_two_sample(const std::vector<std::int64_t>& a,
                       const std::vector<std::int64_t>& b,
                       std::int64_t min_pooled = 10);

/// Least-squares slope and intercept of y on x.
struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
};
LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

/// Kahan-compensated accumulator for long incremental sums.
class KahanSum {
public:
    void add(double x) {
        const double y = x - c_;
        const double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

private:
    double s_ = 0.0;
    double c_ = 0.0;
};

}  // namespace stats
}  // namespace idla
