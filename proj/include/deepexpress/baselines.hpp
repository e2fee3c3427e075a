#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "dataset.hpp"
#include "tensor.hpp"

namespace dx {

// Repeat the value from `period` days ago, feeding forecasts back in once
// the horizon outruns the observed tail.
inline std::vector<double> seasonal_naive(const std::vector<double>& history,
                                          std::size_t period, std::size_t k) {
    if (period < 1) throw ValueError("seasonal naive: period must be >= 1");
    if (history.size() < period)
        throw DataError("seasonal naive: history of " + std::to_string(history.size()) +
                        " values is shorter than the period " + std::to_string(period));
    std::vector<double> buf = history;
    std::vector<double> out;
    out.reserve(k);
    for (std::size_t j = 0; j < k; ++j) {
        double p = buf[buf.size() - period];
        out.push_back(p);
        buf.push_back(p);
    }
    return out;
}

namespace detail {

// Gaussian elimination with partial pivoting; false on a singular system.
// The pivot threshold is relative to the matrix magnitude, since normal
// equations over raw counts reach ~1e9 entries.
inline bool solve_linear(std::vector<std::vector<double>> a, std::vector<double> b,
                         std::vector<double>& x) {
    const std::size_t n = b.size();
    double amax = 0.0;
    for (const auto& row : a)
        for (double v : row) amax = std::max(amax, std::fabs(v));
    const double tiny = amax > 0.0 ? 1e-12 * amax : 1e-300;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
        if (std::fabs(a[piv][col]) < tiny) return false;
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    x.assign(n, 0.0);
    for (std::size_t r = n; r-- > 0;) {
        double acc = b[r];
        for (std::size_t c = r + 1; c < n; ++c) acc -= a[r][c] * x[c];
        x[r] = acc / a[r][r];
    }
    return true;
}

}  // namespace detail

/**
 * Autoregression on the last `order` values, fit by ordinary least
 * squares on the normal equations. A singular system (constant series,
 * too few rows) is refit with ridge damping 1e-8 and flagged.
 */
struct ArModel {
    std::size_t order = 0;
    bool intercept = true;
    std::vector<double> coeffs;  // lag 1 first
    double bias = 0.0;
    bool ridged = false;

    std::vector<double> forecast(const std::vector<double>& history, std::size_t k) const {
        if (history.size() < order)
            throw DataError("ar forecast: history of " + std::to_string(history.size()) +
                            " values is shorter than the order " + std::to_string(order));
        std::vector<double> buf = history;
        std::vector<double> out;
        out.reserve(k);
        for (std::size_t j = 0; j < k; ++j) {
            double acc = bias;
            for (std::size_t i = 0; i < order; ++i) acc += coeffs[i] * buf[buf.size() - 1 - i];
            out.push_back(acc);
            buf.push_back(acc);
        }
        return out;
    }
};

inline ArModel fit_linear_ar(const std::vector<double>& y, std::size_t order,
                             bool intercept = true) {
    if (order < 1) throw ValueError("ar fit: order must be >= 1");
    if (y.size() <= order)
        throw DataError("ar fit: need more than " + std::to_string(order) + " values, got " +
                        std::to_string(y.size()));
    const std::size_t dim = order + (intercept ? 1 : 0);
    std::vector<std::vector<double>> ata(dim, std::vector<double>(dim, 0.0));
    std::vector<double> atb(dim, 0.0);
    for (std::size_t t = order; t < y.size(); ++t) {
        std::vector<double> x(dim);
        for (std::size_t i = 0; i < order; ++i) x[i] = y[t - 1 - i];
        if (intercept) x[order] = 1.0;
        for (std::size_t r = 0; r < dim; ++r) {
            for (std::size_t c = 0; c < dim; ++c) ata[r][c] += x[r] * x[c];
            atb[r] += x[r] * y[t];
        }
    }

    ArModel model;
    model.order = order;
    model.intercept = intercept;
    std::vector<double> beta;
    if (!detail::solve_linear(ata, atb, beta)) {
        model.ridged = true;
        // Damping of 1e-8 at the matrix's own magnitude, so it registers
        // against normal equations built from large counts.
        double amax = 0.0;
        for (const auto& row : ata)
            for (double v : row) amax = std::max(amax, std::fabs(v));
        for (std::size_t d = 0; d < dim; ++d) ata[d][d] += 1e-8 * std::max(1.0, amax);
        if (!detail::solve_linear(ata, atb, beta))
            throw Error("ar fit: normal equations unsolvable even with ridge damping");
    }
    model.coeffs.assign(beta.begin(), beta.begin() + static_cast<long>(order));
    model.bias = intercept ? beta[order] : 0.0;
    return model;
}

}  // namespace dx
