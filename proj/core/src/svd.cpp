// SPDX-License-Identifier: Apache-2.0
//
// Copyright (c) 2026 The wisense authors
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

#include "wisense/svd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wisense/errors.hpp"

namespace wisense::svd {

namespace {

/// Column-major scratch for cache-friendly column rotations.
struct ColMajor {
    std::size_t rows = 0, cols = 0;
    std::vector<double> data;  // data[j * rows + i]

    explicit ColMajor(const Matrix& m) : rows(m.rows()), cols(m.cols()), data(rows * cols) {
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) data[j * rows + i] = m.at(i, j);
    }

    ColMajor(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double* col(std::size_t j) { return data.data() + j * rows; }
    const double* col(std::size_t j) const { return data.data() + j * rows; }

    Matrix to_matrix() const {
        Matrix m(rows, cols);
        for (std::size_t i = 0; i < rows; ++i)
            for (std::size_t j = 0; j < cols; ++j) m.at(i, j) = data[j * rows + i];
        return m;
    }
};

double dot(const double* a, const double* b, std::size_t n) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

/// Rotates columns p and q in place and returns their fresh squared norms,
/// so cached norms never drift from the data.
void rotate(double* cp, double* cq, std::size_t n, double cs, double sn, double& np2, double& nq2) {
    double np = 0.0, nq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double xp = cp[i], xq = cq[i];
        const double yp = cs * xp - sn * xq;
        const double yq = sn * xp + cs * xq;
        cp[i] = yp;
        cq[i] = yq;
        np += yp * yp;
        nq += yq * yq;
    }
    np2 = np;
    nq2 = nq;
}

}  // namespace

ColumnFactor orthogonalize_columns(const Matrix& g_in) {
    if (!g_in.all_finite()) throw NumericError("SVD input contains non-finite values");
    const std::size_t m = g_in.rows();
    const std::size_t n = g_in.cols();

    ColMajor g(g_in);
    ColMajor w(n, n);
    for (std::size_t j = 0; j < n; ++j) w.col(j)[j] = 1.0;

    std::vector<double> norms2(n);
    for (std::size_t j = 0; j < n; ++j) norms2[j] = dot(g.col(j), g.col(j), m);

    bool converged = (n <= 1);
    double worst_off = 0.0;
    for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
        bool rotated = false;
        worst_off = 0.0;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double app = norms2[p];
                const double aqq = norms2[q];
                const double denom = std::sqrt(app * aqq);
                if (denom == 0.0) continue;
                const double apq = dot(g.col(p), g.col(q), m);
                const double off = std::abs(apq) / denom;
                if (off <= kOffDiagonalTol) {
                    worst_off = std::max(worst_off, off);
                    continue;
                }
                rotated = true;
                const double zeta = (aqq - app) / (2.0 * apq);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double cs = 1.0 / std::sqrt(1.0 + t * t);
                const double sn = cs * t;
                rotate(g.col(p), g.col(q), m, cs, sn, norms2[p], norms2[q]);
                double wp2, wq2;
                rotate(w.col(p), w.col(q), n, cs, sn, wp2, wq2);
            }
        }
        if (!rotated) converged = true;
    }
    if (!converged)
        throw ConvergenceError("one-sided Jacobi did not converge within " +
                                   std::to_string(kMaxSweeps) + " sweeps",
                               worst_off);

    // Descending singular values; stable order on ties.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return norms2[a] > norms2[b]; });

    ColumnFactor out;
    out.sigma.resize(n);
    ColMajor q_sorted(m, n);
    ColMajor w_sorted(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t src = order[j];
        const double sigma = std::sqrt(norms2[src]);
        out.sigma[j] = sigma;
        const double* gcol = g.col(src);
        double* qcol = q_sorted.col(j);
        if (sigma > 0.0) {
            const double inv = 1.0 / sigma;
            for (std::size_t i = 0; i < m; ++i) qcol[i] = gcol[i] * inv;
        }
        const double* wcol = w.col(src);
        double* wdst = w_sorted.col(j);
        for (std::size_t i = 0; i < n; ++i) wdst[i] = wcol[i];
    }
    out.q = q_sorted.to_matrix();
    out.w = w_sorted.to_matrix();
    return out;
}

void apply_sign_convention(Matrix& u_like, Matrix& v_like) {
    for (std::size_t j = 0; j < u_like.cols(); ++j) {
        std::size_t arg = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < u_like.rows(); ++i) {
            const double mag = std::abs(u_like.at(i, j));
            if (mag > best) {
                best = mag;
                arg = i;
            }
        }
        if (u_like.at(arg, j) < 0.0) {
            for (std::size_t i = 0; i < u_like.rows(); ++i) u_like.at(i, j) = -u_like.at(i, j);
            if (j < v_like.cols())
                for (std::size_t i = 0; i < v_like.rows(); ++i) v_like.at(i, j) = -v_like.at(i, j);
        }
    }
}

SvdResult svd_thin(const Matrix& a) {
    const std::size_t s = a.rows();
    const std::size_t m = a.cols();
    if (m < s)
        throw ShapeError("svd_thin expects rows <= cols (got " + std::to_string(s) + " x " +
                         std::to_string(m) + ")");

    // Orthogonalize the columns of a^T: a^T = q * diag(sigma) * w^T, so
    // a = w * diag(sigma) * q^T with w orthogonal by construction.
    ColumnFactor f = orthogonalize_columns(a.transposed());
    SvdResult out;
    out.u = std::move(f.w);
    out.sigma = std::move(f.sigma);
    out.v = std::move(f.q);
    apply_sign_convention(out.u, out.v);
    return out;
}

}  // namespace wisense::svd
