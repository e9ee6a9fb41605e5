#include "unrestcast/inference/f_distribution.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace unrestcast::inference {

namespace {

constexpr double kEps = 1e-16;
constexpr double kTiny = 1e-300;
constexpr int kMaxIterations = 10000;

// Continued fraction for I_x(a, b) without the prefactor (modified Lentz).
double beta_continued_fraction(double x, double a, double b) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) return h;
    }
    throw std::runtime_error("incomplete beta continued fraction did not converge");
}

double log_prefactor(double x, double a, double b) {
    return std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
}

void check_df(double d1, double d2) {
    if (!(d1 > 0.0) || !(d2 > 0.0)) throw std::invalid_argument("F distribution degrees of freedom must be positive");
}

}  // namespace

double regularized_beta(double x, double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) throw std::invalid_argument("beta parameters must be positive");
    if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return std::exp(log_prefactor(x, a, b)) * beta_continued_fraction(x, a, b) / a;
    }
    return 1.0 - std::exp(log_prefactor(1.0 - x, b, a)) * beta_continued_fraction(1.0 - x, b, a) / b;
}

double f_cdf(double x, double d1, double d2) {
    check_df(d1, d2);
    if (x <= 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    return regularized_beta(d1 * x / (d1 * x + d2), d1 / 2.0, d2 / 2.0);
}

double f_sf(double x, double d1, double d2) {
    check_df(d1, d2);
    if (x <= 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    return regularized_beta(d2 / (d2 + d1 * x), d2 / 2.0, d1 / 2.0);
}

}  // namespace unrestcast::inference
