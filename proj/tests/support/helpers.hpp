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
#ifndef DDLQR_TESTS_HELPERS_HPP
#define DDLQR_TESTS_HELPERS_HPP

#include <initializer_list>
#include <vector>

#include "ddlqr/common.hpp"

namespace testing_helpers {

using ddlqr::Index;
using ddlqr::Matrix;
using ddlqr::Vector;

inline Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
  const auto r = static_cast<Index>(rows.size());
  const auto c = static_cast<Index>(rows.begin()->size());
  Matrix M(r, c);
  Index i = 0;
  for (const auto& row : rows) {
    Index j = 0;
    for (double v : row) {
      M(i, j++) = v;
    }
    ++i;
  }
  return M;
}

inline Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) {
    out(i++) = x;
  }
  return out;
}

inline std::vector<Vector> scalars(std::initializer_list<double> v) {
  std::vector<Vector> out;
  for (double x : v) {
    out.push_back(Vector::Constant(1, x));
  }
  return out;
}

}  // namespace testing_helpers

#endif  // DDLQR_TESTS_HELPERS_HPP
