/* Copyright 2026 The PoseWarp Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Internal: row-major Eigen views over tensor storage.

#ifndef POSEWARP_SRC_MATVIEW_HPP_
#define POSEWARP_SRC_MATVIEW_HPP_

#include <Eigen/Core>

namespace posewarp::detail {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
using MatView = Eigen::Map<RowMat<T>>;

template <typename T>
using ConstMatView = Eigen::Map<const RowMat<T>>;

template <typename T>
MatView<T> as_matrix(T* data, int rows, int cols) {
  return MatView<T>(data, rows, cols);
}

template <typename T>
ConstMatView<T> as_matrix(const T* data, int rows, int cols) {
  return ConstMatView<T>(data, rows, cols);
}

}  // namespace posewarp::detail

#endif  // POSEWARP_SRC_MATVIEW_HPP_
