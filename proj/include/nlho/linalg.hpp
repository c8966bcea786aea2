#pragma once

#include "nlho/error.hpp"

#include <optional>
#include <vector>

namespace nlho {

// Dense exact linear algebra over an arbitrary field T (T needs +,-,*,
// inverse via operator/ with T(1), and comparison with T(0)).

template <class T>
using Mat = std::vector<std::vector<T>>;

template <class T>
bool lin_is_zero(const T& t) { return t == T(0); }

// in-place row echelon; returns pivot column list
template <class T>
std::vector<size_t> row_echelon(Mat<T>& m) {
    std::vector<size_t> pivots;
    if (m.empty()) return pivots;
    size_t rows = m.size(), cols = m[0].size(), r = 0;
    for (size_t c = 0; c < cols && r < rows; ++c) {
        size_t p = r;
        while (p < rows && lin_is_zero(m[p][c])) ++p;
        if (p == rows) continue;
        std::swap(m[r], m[p]);
        T inv = T(1) / m[r][c];
        for (size_t j = c; j < cols; ++j) m[r][j] = m[r][j] * inv;
        for (size_t i = 0; i < rows; ++i) {
            if (i == r || lin_is_zero(m[i][c])) continue;
            T f = m[i][c];
            for (size_t j = c; j < cols; ++j) m[i][j] = m[i][j] - f * m[r][j];
        }
        pivots.push_back(c);
        ++r;
    }
    return pivots;
}

template <class T>
size_t rank(Mat<T> m) { return row_echelon(m).size(); }

// nullspace basis of m (vectors of length cols)
template <class T>
std::vector<std::vector<T>> nullspace(Mat<T> m) {
    if (m.empty()) return {};
    size_t cols = m[0].size();
    auto pivots = row_echelon(m);
    std::vector<bool> is_pivot(cols, false);
    for (size_t c : pivots) is_pivot[c] = true;
    std::vector<std::vector<T>> basis;
    for (size_t fc = 0; fc < cols; ++fc) {
        if (is_pivot[fc]) continue;
        std::vector<T> v(cols, T(0));
        v[fc] = T(1);
        for (size_t r = 0; r < pivots.size(); ++r) {
            // row r has leading 1 at pivots[r]
            v[pivots[r]] = -m[r][fc];
        }
        basis.push_back(std::move(v));
    }
    return basis;
}

// solve m x = b; nullopt when inconsistent
template <class T>
std::optional<std::vector<T>> solve(Mat<T> m, std::vector<T> b) {
    size_t rows = m.size();
    if (rows == 0) return std::vector<T>{};
    size_t cols = m[0].size();
    for (size_t i = 0; i < rows; ++i) m[i].push_back(b[i]);
    auto pivots = row_echelon(m);
    // inconsistent iff a pivot lands in the augmented column
    if (!pivots.empty() && pivots.back() == cols) return std::nullopt;
    std::vector<T> x(cols, T(0));
    for (size_t r = 0; r < pivots.size(); ++r) x[pivots[r]] = m[r][cols];
    return x;
}

// inverse of a square matrix; nullopt when singular
template <class T>
std::optional<Mat<T>> inverse(const Mat<T>& a) {
    size_t n = a.size();
    Mat<T> m(n);
    for (size_t i = 0; i < n; ++i) {
        m[i] = a[i];
        for (size_t j = 0; j < n; ++j) m[i].push_back(i == j ? T(1) : T(0));
    }
    auto pivots = row_echelon(m);
    if (pivots.size() < n || pivots[n - 1] != n - 1) return std::nullopt;
    Mat<T> r(n, std::vector<T>(n, T(0)));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) r[i][j] = m[i][n + j];
    return r;
}

} // namespace nlho
