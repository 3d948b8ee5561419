#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "iochunk/error.hpp"
#include "iochunk/matrix.hpp"

namespace iochunk {

/// Running sums for blockwise least squares: X'X (row-major d x d), X'y and
/// the row count. Mergeable; with a fixed merge order the result is exact.
class NormalEqAccumulator {
public:
    NormalEqAccumulator() = default;
    explicit NormalEqAccumulator(std::size_t d) : d_(d), xtx_(d * d, 0.0), xty_(d, 0.0) {}

    std::size_t dim() const noexcept { return d_; }
    std::uint64_t n() const noexcept { return n_; }
    double xtx(std::size_t i, std::size_t j) const noexcept { return xtx_[i * d_ + j]; }
    double xty(std::size_t i) const noexcept { return xty_[i]; }
    const std::vector<double>& xtx() const noexcept { return xtx_; }
    const std::vector<double>& xty() const noexcept { return xty_; }

    /// Elementwise in-place sum.
    NormalEqAccumulator& operator+=(const NormalEqAccumulator& o) {
        if (o.d_ != d_)
            throw Error(ErrorKind::DimensionMismatch, "accumulator dims " + std::to_string(d_) + " and " + std::to_string(o.d_));
        for (std::size_t i = 0; i < xtx_.size(); ++i) xtx_[i] += o.xtx_[i];
        for (std::size_t i = 0; i < d_; ++i) xty_[i] += o.xty_[i];
        n_ += o.n_;
        return *this;
    }

    friend bool operator==(const NormalEqAccumulator&, const NormalEqAccumulator&) = default;

    /// X'X and X'y of one block, taking the regressors from every column of
    /// `m` except `response_col` and y from `response_col`. Sums run over
    /// rows in order; the upper triangle is accumulated and then mirrored.
    static NormalEqAccumulator from_block(const DenseMatrix<double>& m, std::size_t response_col) {
        if (response_col >= m.n_cols())
            throw Error(ErrorKind::DimensionMismatch, "response column " + std::to_string(response_col) + " out of range");
        const std::size_t d = m.n_cols() - 1;
        NormalEqAccumulator acc(d);
        std::vector<double> x(d);
        for (std::size_t r = 0; r < m.n_rows(); ++r) {
            auto row = m.row(r);
            for (std::size_t j = 0, k = 0; j < row.size(); ++j)
                if (j != response_col) x[k++] = row[j];
            acc.add_row(x.data(), row[response_col]);
        }
        acc.n_ = m.n_rows();
        acc.mirror();
        return acc;
    }

    /// Same as from_block for separate X (n x d) and y (n x 1).
    static NormalEqAccumulator from_block(const DenseMatrix<double>& X, const DenseMatrix<double>& y) {
        if (y.n_cols() != 1 || y.n_rows() != X.n_rows())
            throw Error(ErrorKind::DimensionMismatch, "y must be " + std::to_string(X.n_rows()) + "x1");
        NormalEqAccumulator acc(X.n_cols());
        for (std::size_t r = 0; r < X.n_rows(); ++r) acc.add_row(X.row(r).data(), y(r, 0));
        acc.n_ = X.n_rows();
        acc.mirror();
        return acc;
    }

private:
    void add_row(const double* x, double y) {
        for (std::size_t i = 0; i < d_; ++i) {
            const double xi = x[i];
            double* out = xtx_.data() + i * d_;
            for (std::size_t j = i; j < d_; ++j) out[j] += xi * x[j];
            xty_[i] += xi * y;
        }
    }

    void mirror() {
        for (std::size_t i = 0; i < d_; ++i)
            for (std::size_t j = 0; j < i; ++j) xtx_[i * d_ + j] = xtx_[j * d_ + i];
    }

    std::size_t d_ = 0;
    std::vector<double> xtx_;
    std::vector<double> xty_;
    std::uint64_t n_ = 0;
};

/// acc += X'X, X'y, n for one chunk. The chunk's products are formed on
/// their own and then added, so chunked and merged runs agree bit for bit.
inline NormalEqAccumulator& accumulate(NormalEqAccumulator& acc, const DenseMatrix<double>& X, const DenseMatrix<double>& y) {
    if (X.n_cols() != acc.dim())
        throw Error(ErrorKind::DimensionMismatch, "X has " + std::to_string(X.n_cols()) + " columns, accumulator " +
                                                      std::to_string(acc.dim()));
    return acc += NormalEqAccumulator::from_block(X, y);
}

inline NormalEqAccumulator merge(const NormalEqAccumulator& a, const NormalEqAccumulator& b) {
    NormalEqAccumulator out = a;
    out += b;
    return out;
}

struct RegressionFit {
    std::vector<std::string> names;          // all d columns, input order
    std::vector<std::optional<double>> coef;  // nullopt for aliased columns
    std::vector<std::size_t> kept;           // ascending column indices
    std::vector<std::size_t> pivot_order;    // kept columns in pivot order
    std::vector<std::string> dropped;        // aliased column names
    std::size_t rank = 0;
    double tolerance = 0;                    // absolute pivot threshold used
    double min_pivot = 0;                    // smallest Schur diagonal seen

    std::optional<double> coefficient(std::string_view name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return coef[i];
        throw Error(ErrorKind::MissingColumn, std::string(name));
    }
};

inline constexpr double kDefaultRankTol = 1e-7;

/// Solves the normal equations with a diagonally pivoted Cholesky
/// factorisation of X'X. Pivoting picks the largest remaining diagonal
/// (lowest column index on ties) and stops once it falls below
/// rank_tol * max(diag X'X); the remaining columns are reported as aliased
/// and the kept subsystem is solved with the computed factor.
inline RegressionFit solve_ne(const NormalEqAccumulator& acc, const std::vector<std::string>& names,
                              double rank_tol = kDefaultRankTol) {
    const std::size_t d = acc.dim();
    if (names.size() != d)
        throw Error(ErrorKind::DimensionMismatch, std::to_string(names.size()) + " names for " + std::to_string(d) + " columns");
    if (acc.n() == 0) throw Error(ErrorKind::DegenerateSystem, "no rows accumulated");

    std::vector<double> a = acc.xtx();
    std::vector<std::size_t> perm(d);
    for (std::size_t i = 0; i < d; ++i) perm[i] = i;

    double max_diag = 0;
    for (std::size_t i = 0; i < d; ++i) max_diag = std::max(max_diag, a[i * d + i]);

    RegressionFit fit;
    fit.names = names;
    fit.tolerance = rank_tol * max_diag;
    fit.min_pivot = max_diag;
    if (!(max_diag > 0)) throw Error(ErrorKind::DegenerateSystem, "X'X has no positive diagonal");

    auto at = [&](std::size_t i, std::size_t j) -> double& { return a[i * d + j]; };
    std::size_t k = 0;
    for (; k < d; ++k) {
        std::size_t p = k;
        for (std::size_t j = k; j < d; ++j) {
            fit.min_pivot = std::min(fit.min_pivot, at(j, j));
            if (at(j, j) > at(p, p) || (at(j, j) == at(p, p) && perm[j] < perm[p])) p = j;
        }
        if (!(at(p, p) >= fit.tolerance) || at(p, p) <= 0) break;
        if (p != k) {
            for (std::size_t j = 0; j < d; ++j) std::swap(at(k, j), at(p, j));
            for (std::size_t i = 0; i < d; ++i) std::swap(at(i, k), at(i, p));
            std::swap(perm[k], perm[p]);
        }
        const double pivot = std::sqrt(at(k, k));
        at(k, k) = pivot;
        for (std::size_t i = k + 1; i < d; ++i) at(i, k) /= pivot;
        for (std::size_t j = k + 1; j < d; ++j)
            for (std::size_t i = j; i < d; ++i) at(i, j) -= at(i, k) * at(j, k);
        // Keep the trailing block symmetric for the next pivot search/swap.
        for (std::size_t j = k + 1; j < d; ++j)
            for (std::size_t i = j + 1; i < d; ++i) at(j, i) = at(i, j);
    }
    fit.rank = k;
    if (fit.rank == 0) throw Error(ErrorKind::DegenerateSystem, "rank 0 design");

    // L z = b, then L' beta = z on the leading rank x rank block.
    const std::size_t r = fit.rank;
    std::vector<double> z(r);
    for (std::size_t i = 0; i < r; ++i) {
        double s = acc.xty(perm[i]);
        for (std::size_t j = 0; j < i; ++j) s -= at(i, j) * z[j];
        z[i] = s / at(i, i);
    }
    std::vector<double> beta(r);
    for (std::size_t i = r; i-- > 0;) {
        double s = z[i];
        for (std::size_t j = i + 1; j < r; ++j) s -= at(j, i) * beta[j];
        beta[i] = s / at(i, i);
    }

    fit.coef.assign(d, std::nullopt);
    fit.pivot_order.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(r));
    for (std::size_t i = 0; i < r; ++i) fit.coef[perm[i]] = beta[i];
    for (std::size_t j = 0; j < d; ++j) {
        if (fit.coef[j]) fit.kept.push_back(j);
        else fit.dropped.push_back(names[j]);
    }
    return fit;
}

}  // namespace iochunk
