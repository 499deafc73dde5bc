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

#pragma once

#include <vector>

#include "wisense/matrix.hpp"

namespace wisense::svd {

/// Fixed for deterministic error behavior.
inline constexpr int kMaxSweeps = 10000;
inline constexpr double kOffDiagonalTol = 1e-10;

/// Thin SVD of a wide matrix a (s x m, m >= s): a = u * diag(sigma) * v^T.
struct SvdResult {
    Matrix u;                  // s x s, orthogonal
    std::vector<double> sigma; // length s, non-increasing, >= 0
    Matrix v;                  // m x s, orthonormal columns (zero for null sigma)
};

/// Column factorization g = q * diag(sigma) * w^T by one-sided Jacobi
/// rotations on g's columns (any shape, n columns). sigma is sorted
/// non-increasing; q columns are unit length (zero where sigma is zero);
/// w is orthogonal. No sign convention is applied here.
struct ColumnFactor {
    Matrix q;                   // rows(g) x cols(g)
    std::vector<double> sigma;  // length cols(g)
    Matrix w;                   // cols(g) x cols(g)
};

ColumnFactor orthogonalize_columns(const Matrix& g);

/// Sign convention: in each column of u_like the entry of largest magnitude
/// (lowest index on ties) is made non-negative; the matching column of
/// v_like is flipped with it.
void apply_sign_convention(Matrix& u_like, Matrix& v_like);

SvdResult svd_thin(const Matrix& a);

}  // namespace wisense::svd
