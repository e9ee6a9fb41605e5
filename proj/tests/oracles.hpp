#pragma once

// Reference computations written without the library's numerical code.

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/fisher_f.hpp>

namespace oracle {

using Matrix = std::vector<std::vector<long double>>;

/// Solves A x = b by Gauss-Jordan elimination with partial pivoting.
inline std::vector<long double> solve(Matrix a, std::vector<long double> b) {
    const std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r) {
            if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
        }
        if (std::fabs(a[piv][c]) < 1e-300L) throw std::runtime_error("oracle: singular normal equations");
        std::swap(a[c], a[piv]);
        std::swap(b[c], b[piv]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            const long double f = a[r][c] / a[c][c];
            for (std::size_t k = c; k < n; ++k) a[r][k] -= f * a[c][k];
            b[r] -= f * b[c];
        }
    }
    for (std::size_t c = 0; c < n; ++c) b[c] /= a[c][c];
    return b;
}

/// Residual sum of squares of the least-squares fit of y on the columns of X
/// (rows are observations), via the normal equations.
inline long double normal_equation_rss(const Matrix& x, const std::vector<long double>& y) {
    const std::size_t n = x.size(), p = x[0].size();
    Matrix xtx(p, std::vector<long double>(p, 0.0L));
    std::vector<long double> xty(p, 0.0L);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t i = 0; i < p; ++i) {
            xty[i] += x[r][i] * y[r];
            for (std::size_t j = 0; j < p; ++j) xtx[i][j] += x[r][i] * x[r][j];
        }
    }
    const auto beta = solve(xtx, xty);
    long double rss = 0.0L;
    for (std::size_t r = 0; r < n; ++r) {
        long double fit = 0.0L;
        for (std::size_t i = 0; i < p; ++i) fit += x[r][i] * beta[i];
        rss += (y[r] - fit) * (y[r] - fit);
    }
    return rss;
}

struct GrangerOracle {
    double f = 0.0;
    double p = 0.0;
    int df1 = 0;
    int df2 = 0;
};

/// Two-regression Granger F test: y_t on [1, y_{t-1..t-q}] versus
/// [1, y_{t-1..t-q}, x_{t-1..t-q}], for t = q .. n-1.
inline GrangerOracle granger(std::span<const double> y, std::span<const double> x, int q) {
    const std::size_t n = y.size();
    const auto lag = static_cast<std::size_t>(q);
    Matrix restricted, full;
    std::vector<long double> response;
    for (std::size_t t = lag; t < n; ++t) {
        std::vector<long double> r{1.0L};
        for (std::size_t k = 1; k <= lag; ++k) r.push_back(y[t - k]);
        std::vector<long double> u(r);
        for (std::size_t k = 1; k <= lag; ++k) u.push_back(x[t - k]);
        restricted.push_back(r);
        full.push_back(u);
        response.push_back(y[t]);
    }
    const long double rss_r = normal_equation_rss(restricted, response);
    const long double rss_u = normal_equation_rss(full, response);
    GrangerOracle out;
    out.df1 = q;
    out.df2 = static_cast<int>(response.size()) - static_cast<int>(full[0].size());
    out.f = static_cast<double>(((rss_r - rss_u) / q) / (rss_u / out.df2));
    boost::math::fisher_f dist(out.df1, out.df2);
    out.p = boost::math::cdf(boost::math::complement(dist, out.f));
    return out;
}

inline double fisher_cdf(double x, double d1, double d2) {
    return boost::math::cdf(boost::math::fisher_f(d1, d2), x);
}

enum class Family { logistic, poisson };

/// Log-likelihood of a canonical-link GLM with intercept beta[0].
inline double log_likelihood(const std::vector<std::vector<double>>& x, std::span<const double> y,
                             const std::vector<double>& beta, Family family) {
    double ll = 0.0;
    for (std::size_t r = 0; r < y.size(); ++r) {
        double eta = beta[0];
        for (std::size_t j = 0; j < x[r].size(); ++j) eta += beta[j + 1] * x[r][j];
        if (family == Family::logistic) {
            // y*eta - log(1 + e^eta), arranged to avoid overflow.
            ll += y[r] * eta - (eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta)));
        } else {
            ll += y[r] * eta - std::exp(eta) - std::lgamma(y[r] + 1.0);
        }
    }
    return ll;
}

/// Derivative-free maximization by compass search: try +/- step along each
/// coordinate, keep any improvement, halve the step when none helps.
inline std::vector<double> compass_search(const std::vector<std::vector<double>>& x, std::span<const double> y,
                                          Family family, std::vector<double> start, double min_step = 1e-11) {
    std::vector<double> beta = std::move(start);
    double best = log_likelihood(x, y, beta, family);
    double step = 1.0;
    while (step > min_step) {
        bool moved = false;
        for (std::size_t j = 0; j < beta.size(); ++j) {
            for (double dir : {1.0, -1.0}) {
                // Keep stepping while it pays off.
                while (true) {
                    auto trial = beta;
                    trial[j] += dir * step;
                    const double ll = log_likelihood(x, y, trial, family);
                    if (ll > best) {
                        best = ll;
                        beta = trial;
                        moved = true;
                    } else {
                        break;
                    }
                }
            }
        }
        if (!moved) step *= 0.5;
    }
    return beta;
}

}  // namespace oracle
