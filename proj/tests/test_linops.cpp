/*
 Copyright 2026 The ddlqr Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#include <gtest/gtest.h>

#include "ddlqr/linops.hpp"
#include "support/helpers.hpp"
#include "support/oracles.hpp"

namespace {

using namespace ddlqr;
using testing_helpers::mat;
using testing_helpers::scalars;
using testing_helpers::vec;

TEST(VecSym, RowMajorUpperTriangle) {
  const Matrix P = mat({{11, 12, 13}, {12, 22, 23}, {13, 23, 33}});
  EXPECT_EQ(vec_sym(P).entries(), vec({11, 12, 13, 22, 23, 33}));
  EXPECT_EQ(vec_sym(Matrix::Identity(2, 2)).entries(), vec({1, 0, 1}));
  EXPECT_EQ(vec_sym(mat({{2, 3}, {3, 5}})).entries(), vec({2, 3, 5}));
}

TEST(VecSym, RejectsAsymmetric) {
  EXPECT_THROW(vec_sym(mat({{1, 2}, {3, 4}})), InvalidArgument);
  EXPECT_THROW(vec_sym(mat({{1, 2, 3}})), InvalidArgument);
}

TEST(UnvecSym, Examples) {
  EXPECT_EQ(unvec_sym(vec({1, 0, 1})), Matrix(Matrix::Identity(2, 2)));
  EXPECT_EQ(unvec_sym(vec({2, 3, 5})), mat({{2, 3}, {3, 5}}));
  EXPECT_THROW(unvec_sym(vec({1, 2})), InvalidArgument);
}

TEST(UnvecSym, RoundTrip) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 20; ++t) {
    const Matrix P = oracle::random_symmetric(6, rng);
    EXPECT_EQ(unvec_sym(vec_sym(P)), P);
    EXPECT_EQ(vec_sym(P).entries(), oracle::upper_triangle(P));
  }
}

TEST(QuadMonomials, Examples) {
  EXPECT_EQ(quad_monomials(vec({1, 2})), vec({1, 4, 4}));
  EXPECT_EQ(quad_monomials(Vector::Zero(3)), Vector(Vector::Zero(6)));
}

TEST(QuadMonomials, QuadraticFormOnFixedVector) {
  std::mt19937_64 rng(21);
  const Vector x = vec({1, 2, 3});
  const Matrix P = oracle::random_symmetric(3, rng);
  EXPECT_NEAR(quad_monomials(x).dot(vec_sym(P).entries()), oracle::quadratic_form(x, P), 1e-12);
}

TEST(QuadMonomials, QuadraticFormIdentityProperty) {
  std::mt19937_64 rng(77);
  for (Index d = 2; d <= 8; ++d) {
    for (int t = 0; t < 1000; ++t) {
      const Vector x = oracle::random_vector(d, rng, 3.0);
      const Matrix P = oracle::random_symmetric(d, rng, 2.0);
      const double lhs = quad_monomials(x).dot(vec_sym(P).entries());
      const double rhs = oracle::quadratic_form(x, P);
      ASSERT_LE(std::abs(lhs - rhs), 1e-10 * (1.0 + x.squaredNorm() * P.norm())) << "d=" << d;
    }
  }
}

TEST(Hankel, Examples) {
  const auto s = scalars({1, 2, 3, 4});
  EXPECT_EQ(hankel(s, 2), mat({{1, 2, 3}, {2, 3, 4}}));
  EXPECT_EQ(hankel(s, 1), mat({{1, 2, 3, 4}}));
  const std::vector<Vector> v{vec({1, 0}), vec({0, 1}), vec({1, 1})};
  EXPECT_EQ(hankel(v, 2), mat({{1, 0}, {0, 1}, {0, 1}, {1, 1}}));
}

TEST(Hankel, BlockColumnsAndErrors) {
  const auto s = scalars({1, 2, 3, 4, 5, 6});
  for (Index L = 1; L <= 6; ++L) {
    EXPECT_EQ(hankel(s, L).cols(), 6 - L + 1);
  }
  EXPECT_THROW(hankel(s, 7), InvalidArgument);
  EXPECT_THROW(hankel(s, 0), InvalidArgument);
}

TEST(TriangularNumbers, RootInvertsNumber) {
  for (Index d = 0; d < 200; ++d) {
    EXPECT_EQ(triangular_root(triangular_number(d)), d);
  }
  EXPECT_EQ(triangular_root(4), -1);
}

}  // namespace
