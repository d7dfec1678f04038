#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace hillscope {

using Vec = std::vector<double>;

inline Vec operator+(const Vec& a, const Vec& b) {
    assert(a.size() == b.size());
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

inline Vec operator-(const Vec& a, const Vec& b) {
    assert(a.size() == b.size());
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline Vec operator*(double s, const Vec& a) {
    Vec r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = s * a[i];
    return r;
}

inline Vec& operator+=(Vec& a, const Vec& b) {
    assert(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    return a;
}

inline double dot(const Vec& a, const Vec& b) {
    assert(a.size() == b.size());
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline Vec normalized(const Vec& a) {
    double n = norm(a);
    if (n == 0) throw std::runtime_error("cannot normalize zero vector");
    return (1.0 / n) * a;
}

/// Scalar cross product of two plane vectors.
inline double cross2(const Vec& a, const Vec& b) {
    assert(a.size() == 2 && b.size() == 2);
    return a[0] * b[1] - a[1] * b[0];
}

/// Dense row-major matrix, sized for tangent flows and family differentials
/// (at most 2n x 2n with n <= 3).
struct Mat {
    std::size_t rows = 0, cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), a(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

    static Mat identity(std::size_t n) {
        Mat m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    Vec col(std::size_t j) const {
        Vec v(rows);
        for (std::size_t i = 0; i < rows; ++i) v[i] = (*this)(i, j);
        return v;
    }

    void set_col(std::size_t j, const Vec& v) {
        assert(v.size() == rows);
        for (std::size_t i = 0; i < rows; ++i) (*this)(i, j) = v[i];
    }
};

inline Mat operator*(const Mat& A, const Mat& B) {
    assert(A.cols == B.rows);
    Mat C(A.rows, B.cols);
    for (std::size_t i = 0; i < A.rows; ++i)
        for (std::size_t k = 0; k < A.cols; ++k) {
            double aik = A(i, k);
            if (aik == 0) continue;
            for (std::size_t j = 0; j < B.cols; ++j) C(i, j) += aik * B(k, j);
        }
    return C;
}

inline Vec operator*(const Mat& A, const Vec& x) {
    assert(A.cols == x.size());
    Vec y(A.rows, 0.0);
    for (std::size_t i = 0; i < A.rows; ++i)
        for (std::size_t j = 0; j < A.cols; ++j) y[i] += A(i, j) * x[j];
    return y;
}

/// Determinant by LU with partial pivoting; fine for the tiny matrices here.
inline double det(const Mat& M) {
    assert(M.rows == M.cols);
    std::size_t n = M.rows;
    if (n == 1) return M(0, 0);
    if (n == 2) return M(0, 0) * M(1, 1) - M(0, 1) * M(1, 0);
    Mat A = M;
    double d = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::fabs(A(i, k)) > std::fabs(A(p, k))) p = i;
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(A(k, j), A(p, j));
            d = -d;
        }
        if (A(k, k) == 0) return 0.0;
        d *= A(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            double f = A(i, k) / A(k, k);
            for (std::size_t j = k; j < n; ++j) A(i, j) -= f * A(k, j);
        }
    }
    return d;
}

/// Solve A x = b by Gaussian elimination with partial pivoting.
inline Vec solve(Mat A, Vec b) {
    assert(A.rows == A.cols && A.rows == b.size());
    std::size_t n = A.rows;
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::fabs(A(i, k)) > std::fabs(A(p, k))) p = i;
        if (std::fabs(A(p, k)) < 1e-300) throw std::runtime_error("singular linear system");
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(A(k, j), A(p, j));
            std::swap(b[k], b[p]);
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            double f = A(i, k) / A(k, k);
            b[i] -= f * b[k];
            for (std::size_t j = k; j < n; ++j) A(i, j) -= f * A(k, j);
        }
    }
    Vec x(n);
    for (std::size_t ii = n; ii-- > 0;) {
        double s = b[ii];
        for (std::size_t j = ii + 1; j < n; ++j) s -= A(ii, j) * x[j];
        x[ii] = s / A(ii, ii);
    }
    return x;
}

struct Svd {
    Vec sigma;      ///< singular values, descending
    Mat v;          ///< right singular vectors as columns, matching sigma order
};

/// SVD of a small square matrix via Jacobi eigen-decomposition of A^T A.
/// Accuracy of the small singular values is sqrt(eps)-limited, which is
/// sufficient for the rank thresholds used here (>= 1e-8 ratios).
inline Svd svd_small(const Mat& A) {
    assert(A.rows == A.cols);
    std::size_t n = A.rows;
    Mat S(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0;
            for (std::size_t k = 0; k < n; ++k) s += A(k, i) * A(k, j);
            S(i, j) = s;
        }
    Mat V = Mat::identity(n);
    for (int sweep = 0; sweep < 60; ++sweep) {
        double off = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += S(i, j) * S(i, j);
        if (off < 1e-300) break;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::fabs(S(p, q)) < 1e-300) continue;
                double theta = 0.5 * std::atan2(2 * S(p, q), S(q, q) - S(p, p));
                double c = std::cos(theta), s = std::sin(theta);
                for (std::size_t k = 0; k < n; ++k) {
                    double skp = S(k, p), skq = S(k, q);
                    S(k, p) = c * skp - s * skq;
                    S(k, q) = s * skp + c * skq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double spk = S(p, k), sqk = S(q, k);
                    S(p, k) = c * spk - s * sqk;
                    S(q, k) = s * spk + c * sqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double vkp = V(k, p), vkq = V(k, q);
                    V(k, p) = c * vkp - s * vkq;
                    V(k, q) = s * vkp + c * vkq;
                }
            }
    }
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (S(order[j], order[j]) > S(order[i], order[i])) std::swap(order[i], order[j]);
    Svd out;
    out.sigma.resize(n);
    out.v = Mat(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.sigma[k] = std::sqrt(std::max(0.0, S(order[k], order[k])));
        for (std::size_t i = 0; i < n; ++i) out.v(i, k) = V(i, order[k]);
    }
    return out;
}

}  // namespace hillscope
