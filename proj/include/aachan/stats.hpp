// SPDX-License-Identifier: Apache-2.0
//
// aachan - air-to-air propagation channel toolkit for built-up areas
// Copyright (C) 2026 aachan contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef AACHAN_STATS_HPP
#define AACHAN_STATS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace aachan {

// Thrown when an iterative fit fails to converge; carries the best iterate.
class FitError : public std::runtime_error {
  public:
    FitError(const std::string &what, std::vector<double> best_params, double best_rmse)
        : std::runtime_error(what), best_params_(std::move(best_params)), best_rmse_(best_rmse) {}

    const std::vector<double> &best_params() const { return best_params_; }
    double best_rmse() const { return best_rmse_; }

  private:
    std::vector<double> best_params_;
    double best_rmse_;
};

struct WeibullParams {
    double eta; // scale
    double nu;  // shape
};

struct NormalParams {
    double mu;
    double sigma;
};

struct LogDistanceFit {
    double ple;             // slope against 10*log10(d)
    double intercept_db;
    double residual_std_db; // sample std of the residuals (n-1 denominator)
};

enum class ShadowForm { exp_decay, power_law };

struct ShadowModelParams {
    ShadowForm form = ShadowForm::exp_decay;
    double p = 0.0;
    double q = 0.0;
    double r = 0.0;
    double rmse = 0.0;

    double evaluate(double h) const {
        return form == ShadowForm::exp_decay ? p * std::exp(-q * h) + r
                                             : p * std::pow(h, -q) + r;
    }
};

namespace detail {

inline double mean_of(std::span<const double> x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

inline double sample_std(std::span<const double> x, double mean) {
    double ss = 0.0;
    for (double v : x)
        ss += (v - mean) * (v - mean);
    return std::sqrt(ss / static_cast<double>(x.size() - 1));
}

} // namespace detail

// Maximum-likelihood Weibull fit. Profile likelihood in the shape: for a
// candidate shape k the scale is closed-form, and k solves
//   1/k = sum(x^k ln x)/sum(x^k) - mean(ln x).
// Newton iteration with bisection safeguards; converged when successive
// shape iterates differ by less than 1e-8.
inline WeibullParams fit_weibull(std::span<const double> data) {
    const std::size_t n = data.size();
    if (n < 10)
        throw std::invalid_argument("fit_weibull: need at least 10 samples");
    for (double v : data)
        if (!(v > 0.0))
            throw std::invalid_argument("fit_weibull: all samples must be positive");

    std::vector<double> lx(n);
    for (std::size_t i = 0; i < n; ++i)
        lx[i] = std::log(data[i]);
    const double mean_lx = detail::mean_of(lx);
    const double std_lx = detail::sample_std(lx, mean_lx);
    const auto [lx_min, lx_max] = std::minmax_element(lx.begin(), lx.end());
    if (*lx_max - *lx_min <= 1e-12 * std::max(1.0, std::abs(*lx_max)))
        throw std::invalid_argument("fit_weibull: degenerate all-equal sample");

    // g(k) = sum(x^k ln x)/sum(x^k) - 1/k - mean(ln x); strictly increasing in k
    auto g = [&](double k, double *dg = nullptr) {
        double s0 = 0.0, s1 = 0.0, s2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            // normalize by the max to avoid overflow at large shapes
            const double w = std::exp(k * (lx[i] - mean_lx));
            s0 += w;
            s1 += w * lx[i];
            s2 += w * lx[i] * lx[i];
        }
        const double ratio = s1 / s0;
        if (dg)
            *dg = (s2 / s0 - ratio * ratio) + 1.0 / (k * k);
        return ratio - 1.0 / k - mean_lx;
    };

    double k = std::clamp(1.28 / std_lx, 1e-3, 1e3); // moment-style start
    double lo = 1e-6, hi = 1e6;
    bool converged = false;
    for (int it = 0; it < 200; ++it) {
        double dg = 0.0;
        const double gk = g(k, &dg);
        if (gk > 0.0)
            hi = std::min(hi, k);
        else
            lo = std::max(lo, k);
        double step = gk / dg;
        double knew = k - step;
        if (!(knew > lo && knew < hi))
            knew = 0.5 * (lo + hi); // bisect when Newton leaves the bracket
        if (std::abs(knew - k) < 1e-8) {
            k = knew;
            converged = true;
            break;
        }
        k = knew;
    }
    if (!converged)
        throw FitError("fit_weibull: no convergence after 200 iterations", {0.0, k}, 0.0);

    double s0 = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        s0 += std::exp(k * (lx[i] - mean_lx));
    const double eta = std::exp(mean_lx + std::log(s0 / static_cast<double>(n)) / k);
    return {eta, k};
}

inline double weibull_cdf(double x, const WeibullParams &w) {
    if (x <= 0.0) return 0.0;
    return 1.0 - std::exp(-std::pow(x / w.eta, w.nu));
}

// Inverse CDF; u strictly inside (0,1).
inline double weibull_quantile(double u, const WeibullParams &w) {
    return w.eta * std::pow(-std::log1p(-u), 1.0 / w.nu);
}

inline NormalParams fit_normal(std::span<const double> data) {
    if (data.size() < 2)
        throw std::invalid_argument("fit_normal: need at least 2 samples");
    const double mu = detail::mean_of(data);
    return {mu, detail::sample_std(data, mu)};
}

inline double normal_cdf(double x, const NormalParams &p) {
    return 0.5 * std::erfc(-(x - p.mu) / (p.sigma * std::sqrt(2.0)));
}

// Empirical CDF as a right-continuous step function over a sorted copy.
class Ecdf {
  public:
    explicit Ecdf(std::span<const double> data) : sorted_(data.begin(), data.end()) {
        if (sorted_.empty())
            throw std::invalid_argument("Ecdf: need at least 1 sample");
        std::sort(sorted_.begin(), sorted_.end());
    }

    double operator()(double x) const {
        const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), x);
        return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
    }

    const std::vector<double> &sorted() const { return sorted_; }

  private:
    std::vector<double> sorted_;
};

// Kolmogorov-Smirnov statistic of a sample against a reference CDF.
inline double ks_statistic(std::span<const double> data, const std::function<double(double)> &cdf) {
    if (data.empty())
        throw std::invalid_argument("ks_statistic: need at least 1 sample");
    std::vector<double> sorted(data.begin(), data.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    }
    return d;
}

// Least squares of path loss against 10*log10(distance). The slope is the
// path-loss exponent.
inline LogDistanceFit fit_log_distance(std::span<const double> distance_m,
                                       std::span<const double> pl_db) {
    if (distance_m.size() != pl_db.size())
        throw std::invalid_argument("fit_log_distance: size mismatch");
    if (distance_m.size() < 3)
        throw std::invalid_argument("fit_log_distance: need at least 3 points");
    std::vector<double> x(distance_m.size());
    for (std::size_t i = 0; i < distance_m.size(); ++i) {
        if (!(distance_m[i] > 0.0))
            throw std::invalid_argument("fit_log_distance: distances must be positive");
        x[i] = 10.0 * std::log10(distance_m[i]);
    }
    const double xbar = detail::mean_of(x);
    const double ybar = detail::mean_of(pl_db);
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - xbar) * (x[i] - xbar);
        sxy += (x[i] - xbar) * (pl_db[i] - ybar);
    }
    if (!(sxx > 0.0))
        throw std::invalid_argument("fit_log_distance: need at least 2 distinct distances");
    LogDistanceFit fit;
    fit.ple = sxy / sxx;
    fit.intercept_db = ybar - fit.ple * xbar;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = pl_db[i] - (fit.intercept_db + fit.ple * x[i]);
        ss += r * r;
    }
    fit.residual_std_db = std::sqrt(ss / static_cast<double>(x.size() - 1));
    return fit;
}

// Detrended path loss: residuals of the log-distance fit. Zero mean by
// construction of the least squares.
inline std::vector<double> extract_shadowing(std::span<const double> distance_m,
                                             std::span<const double> pl_db) {
    const LogDistanceFit fit = fit_log_distance(distance_m, pl_db);
    std::vector<double> resid(distance_m.size());
    for (std::size_t i = 0; i < distance_m.size(); ++i)
        resid[i] = pl_db[i] - (fit.intercept_db + fit.ple * 10.0 * std::log10(distance_m[i]));
    return resid;
}

namespace detail {

// Model basis for the shadowing laws: value and the partial derivatives of
// sigma(h) = p*f(h;q) + r with f = exp(-q h) or h^(-q).
inline double shadow_basis(ShadowForm form, double h, double q) {
    return form == ShadowForm::exp_decay ? std::exp(-q * h) : std::pow(h, -q);
}

inline double shadow_basis_dq(ShadowForm form, double h, double q) {
    return form == ShadowForm::exp_decay ? -h * std::exp(-q * h)
                                         : -std::log(h) * std::pow(h, -q);
}

// For a fixed decay constant the model is linear in (p, r); solve the 2x2
// normal equations and return the RMSE.
inline double shadow_profile_pr(ShadowForm form, std::span<const double> h,
                                std::span<const double> sigma, double q, double &p, double &r) {
    const std::size_t n = h.size();
    double sff = 0.0, sf = 0.0, sfy = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double f = shadow_basis(form, h[i], q);
        sff += f * f;
        sf += f;
        sfy += f * sigma[i];
        sy += sigma[i];
    }
    const double dn = static_cast<double>(n);
    const double det = sff * dn - sf * sf;
    if (std::abs(det) < 1e-300) {
        p = 0.0;
        r = sy / dn;
    } else {
        p = (sfy * dn - sf * sy) / det;
        r = (sff * sy - sf * sfy) / det;
    }
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = p * shadow_basis(form, h[i], q) + r - sigma[i];
        ss += e * e;
    }
    return std::sqrt(ss / dn);
}

inline double shadow_rmse(ShadowForm form, std::span<const double> h,
                          std::span<const double> sigma, const std::array<double, 3> &prm) {
    double ss = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        const double e = prm[0] * shadow_basis(form, h[i], prm[1]) + prm[2] - sigma[i];
        ss += e * e;
    }
    return std::sqrt(ss / static_cast<double>(h.size()));
}

} // namespace detail

// Nonlinear least squares of the altitude-dependent shadowing law
// sigma(h) = p*exp(-q h) + r (or p*h^(-q) + r). Gauss-Newton with
// Levenberg-style damping; if damping cannot reduce the RMSE the decay
// constant is re-seeded from a coarse grid with (p, r) profiled out.
// Converged when the relative RMSE change drops below 1e-10.
inline ShadowModelParams fit_shadow_model(std::span<const double> h_m,
                                          std::span<const double> sigma_db,
                                          ShadowForm form = ShadowForm::exp_decay) {
    const std::size_t n = h_m.size();
    if (n != sigma_db.size())
        throw std::invalid_argument("fit_shadow_model: size mismatch");
    if (n < 4)
        throw std::invalid_argument("fit_shadow_model: need at least 4 altitude points");
    for (std::size_t i = 0; i < n; ++i)
        if (!(h_m[i] > 0.0) || !(sigma_db[i] > 0.0))
            throw std::invalid_argument("fit_shadow_model: altitudes and sigmas must be positive");

    std::vector<double> hs(h_m.begin(), h_m.end());
    std::sort(hs.begin(), hs.end());
    const double h_med = hs[n / 2];
    const auto [smin_it, smax_it] = std::minmax_element(sigma_db.begin(), sigma_db.end());

    std::array<double, 3> prm; // p, q, r
    if (form == ShadowForm::exp_decay) {
        prm = {*smax_it - *smin_it, 1.0 / h_med, *smin_it};
    } else {
        const double q0 = 1.0;
        prm = {(*smax_it - *smin_it) * std::pow(hs.front(), q0), q0, *smin_it};
    }
    if (prm[0] <= 0.0)
        prm[0] = std::max(*smax_it * 0.1, 1e-6);

    double rmse = detail::shadow_rmse(form, h_m, sigma_db, prm);
    double lambda = 1e-3;
    bool used_grid_fallback = false;
    bool converged = false;

    for (int it = 0; it < 500; ++it) {
        // normal equations J^T J delta = -J^T e with Levenberg diagonal damping
        double jtj[3][3] = {};
        double jte[3] = {};
        for (std::size_t i = 0; i < n; ++i) {
            const double f = detail::shadow_basis(form, h_m[i], prm[1]);
            const double jrow[3] = {f, prm[0] * detail::shadow_basis_dq(form, h_m[i], prm[1]), 1.0};
            const double e = prm[0] * f + prm[2] - sigma_db[i];
            for (int a = 0; a < 3; ++a) {
                jte[a] += jrow[a] * e;
                for (int b = 0; b < 3; ++b)
                    jtj[a][b] += jrow[a] * jrow[b];
            }
        }

        bool improved = false;
        std::array<double, 3> next = prm;
        double next_rmse = rmse;
        for (int attempt = 0; attempt < 12; ++attempt) {
            double m[3][4];
            for (int a = 0; a < 3; ++a) {
                for (int b = 0; b < 3; ++b)
                    m[a][b] = jtj[a][b] + (a == b ? lambda * (1.0 + jtj[a][a]) : 0.0);
                m[a][3] = -jte[a];
            }
            // Gaussian elimination with partial pivoting on the 3x3 system
            bool singular = false;
            for (int col = 0; col < 3; ++col) {
                int piv = col;
                for (int row = col + 1; row < 3; ++row)
                    if (std::abs(m[row][col]) > std::abs(m[piv][col]))
                        piv = row;
                if (std::abs(m[piv][col]) < 1e-300) {
                    singular = true;
                    break;
                }
                if (piv != col)
                    std::swap(m[piv], m[col]);
                for (int row = 0; row < 3; ++row) {
                    if (row == col)
                        continue;
                    const double fct = m[row][col] / m[col][col];
                    for (int b = col; b < 4; ++b)
                        m[row][b] -= fct * m[col][b];
                }
            }
            if (!singular) {
                std::array<double, 3> cand = {prm[0] + m[0][3] / m[0][0],
                                              prm[1] + m[1][3] / m[1][1],
                                              prm[2] + m[2][3] / m[2][2]};
                const double cand_rmse = detail::shadow_rmse(form, h_m, sigma_db, cand);
                if (std::isfinite(cand_rmse) && cand_rmse < rmse) {
                    next = cand;
                    next_rmse = cand_rmse;
                    improved = true;
                    lambda = std::max(lambda * 0.3, 1e-12);
                    break;
                }
            }
            lambda *= 10.0;
        }

        if (!improved) {
            if (!used_grid_fallback) {
                // re-seed the decay constant from a coarse grid, (p, r) profiled
                used_grid_fallback = true;
                const double qlo = form == ShadowForm::exp_decay ? 1e-4 : 1e-3;
                const double qhi = form == ShadowForm::exp_decay ? 1.0 : 3.0;
                double best_q = prm[1], best_rmse = rmse;
                double best_p = prm[0], best_r = prm[2];
                for (int gi = 0; gi <= 200; ++gi) {
                    const double q = qlo * std::pow(qhi / qlo, gi / 200.0);
                    double p, r;
                    const double e = detail::shadow_profile_pr(form, h_m, sigma_db, q, p, r);
                    if (e < best_rmse) {
                        best_rmse = e;
                        best_q = q;
                        best_p = p;
                        best_r = r;
                    }
                }
                if (best_rmse < rmse) {
                    prm = {best_p, best_q, best_r};
                    rmse = best_rmse;
                    lambda = 1e-3;
                    continue;
                }
            }
            // neither damping nor the grid reduced the error: accept the
            // current iterate as converged-at-minimum
            converged = true;
            break;
        }

        const double rel = std::abs(rmse - next_rmse) / std::max(rmse, 1e-300);
        prm = next;
        rmse = next_rmse;
        if (rel < 1e-10) {
            converged = true;
            break;
        }
    }

    if (!converged)
        throw FitError("fit_shadow_model: no convergence after 500 iterations",
                       {prm[0], prm[1], prm[2]}, rmse);

    ShadowModelParams out;
    out.form = form;
    out.p = prm[0];
    out.q = prm[1];
    out.r = prm[2];
    out.rmse = rmse;
    return out;
}

} // namespace aachan

#endif // AACHAN_STATS_HPP
