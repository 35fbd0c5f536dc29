#pragma once

#include <functional>
#include <vector>

#include "model_ring.hpp"

namespace phitau {

// Dense row-major matrix over a ring type T (ModelElement, PadicNumber, ...).
template <class T>
class Matrix {
public:
    Matrix() = default;
    Matrix(size_t rows, size_t cols, const T& fill) : rows_(rows), cols_(cols), a_(rows * cols, fill) {}

    static Matrix identity(size_t n, const T& one, const T& zero) {
        Matrix m(n, n, zero);
        for (size_t i = 0; i < n; ++i) m(i, i) = one;
        return m;
    }

    size_t rows() const { return rows_; }
    size_t cols() const { return cols_; }

    T& operator()(size_t i, size_t j) { return a_[i * cols_ + j]; }
    const T& operator()(size_t i, size_t j) const { return a_[i * cols_ + j]; }

    template <class F>
    auto map(F&& f) const {
        using U = std::decay_t<decltype(f(a_[0]))>;
        Matrix<U> r;
        r.rows_ = rows_;
        r.cols_ = cols_;
        r.a_.reserve(a_.size());
        for (const auto& x : a_) r.a_.push_back(f(x));
        return r;
    }

    Matrix transpose() const {
        Matrix r(cols_, rows_, a_.front());
        for (size_t i = 0; i < rows_; ++i)
            for (size_t j = 0; j < cols_; ++j) r(j, i) = (*this)(i, j);
        return r;
    }

    friend Matrix operator+(const Matrix& a, const Matrix& b) {
        check_shape(a.rows_ == b.rows_ && a.cols_ == b.cols_);
        Matrix r = a;
        for (size_t k = 0; k < r.a_.size(); ++k) r.a_[k] = a.a_[k] + b.a_[k];
        return r;
    }

    friend Matrix operator-(const Matrix& a, const Matrix& b) {
        check_shape(a.rows_ == b.rows_ && a.cols_ == b.cols_);
        Matrix r = a;
        for (size_t k = 0; k < r.a_.size(); ++k) r.a_[k] = a.a_[k] - b.a_[k];
        return r;
    }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        check_shape(a.cols_ == b.rows_);
        Matrix r(a.rows_, b.cols_, a.a_.front());
        for (size_t i = 0; i < a.rows_; ++i)
            for (size_t j = 0; j < b.cols_; ++j) {
                T s = a(i, 0) * b(0, j);
                for (size_t k = 1; k < a.cols_; ++k) s = s + a(i, k) * b(k, j);
                r(i, j) = std::move(s);
            }
        return r;
    }

    Matrix column(size_t j) const {
        Matrix r(rows_, 1, a_.front());
        for (size_t i = 0; i < rows_; ++i) r(i, 0) = (*this)(i, j);
        return r;
    }

    const std::vector<T>& entries() const { return a_; }

private:
    template <class U>
    friend class Matrix;

    static void check_shape(bool ok) {
        if (!ok) throw Error(ErrorCode::RankMismatch, "matrix shapes do not match");
    }

    size_t rows_ = 0;
    size_t cols_ = 0;
    std::vector<T> a_;
};

using ElementMatrix = Matrix<ModelElement>;

inline ElementMatrix identity_matrix(const Truncation& t, size_t n) {
    return ElementMatrix::identity(n, ModelElement::one(t), ModelElement(t));
}

inline ElementMatrix scalar_matrix(const ModelElement& a) { return ElementMatrix(1, 1, a); }

template <class T>
Matrix<T> kron(const Matrix<T>& a, const Matrix<T>& b) {
    Matrix<T> r(a.rows() * b.rows(), a.cols() * b.cols(), a(0, 0));
    for (size_t i = 0; i < a.rows(); ++i)
        for (size_t j = 0; j < a.cols(); ++j)
            for (size_t k = 0; k < b.rows(); ++k)
                for (size_t l = 0; l < b.cols(); ++l) r(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l);
    return r;
}

// Laplace expansion; ranks here are small (<= 4).
inline ModelElement determinant(const ElementMatrix& m) {
    size_t n = m.rows();
    if (n != m.cols()) throw Error(ErrorCode::RankMismatch, "determinant of a non-square matrix");
    if (n == 1) return m(0, 0);
    if (n == 2) return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    ModelElement det(m(0, 0).truncation());
    for (size_t j = 0; j < n; ++j) {
        ElementMatrix minor(n - 1, n - 1, m(0, 0));
        for (size_t r = 1; r < n; ++r)
            for (size_t c = 0, cc = 0; c < n; ++c)
                if (c != j) minor(r - 1, cc++) = m(r, c);
        auto term = m(0, j) * determinant(minor);
        det = (j % 2) ? det - term : det + term;
    }
    return det;
}

// Adjugate over det; fails with NotInvertible when det is not a unit of the window.
inline ElementMatrix inverse(const ElementMatrix& m) {
    size_t n = m.rows();
    auto dinv = elem_invert(determinant(m));
    if (n == 1) return scalar_matrix(dinv);
    ElementMatrix r(n, n, m(0, 0));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) {
            ElementMatrix minor(n - 1, n - 1, m(0, 0));
            for (size_t a = 0, ra = 0; a < n; ++a) {
                if (a == j) continue;
                for (size_t b = 0, cb = 0; b < n; ++b)
                    if (b != i) minor(ra, cb++) = m(a, b);
                ++ra;
            }
            auto c = determinant(minor) * dinv;
            r(i, j) = ((i + j) % 2) ? -c : c;
        }
    return r;
}

// Worst entry certificate of a residual matrix.
inline ZeroCertificate certify_zero(const ElementMatrix& m, long target) {
    ZeroCertificate worst;
    worst.zero = true;
    worst.target = target;
    worst.x_window = INT_MAX;
    for (const auto& e : m.entries()) {
        auto c = certify_zero(e, target);
        worst.zero = worst.zero && c.zero;
        worst.valuation = std::min(worst.valuation, c.valuation);
        worst.x_window = std::min(worst.x_window, c.x_window);
    }
    return worst;
}

inline ZeroCertificate certify_zero(const ElementMatrix& m) {
    return certify_zero(m, m(0, 0).truncation().N);
}

}  // namespace phitau
