// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>

namespace qprec {

using cxd = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

/// Tally of real multiplications in precoding hot paths, split by phase.
/// Convention: one complex*complex = 4 real multiplies, complex*real = 2,
/// real*real = 1. Counts are incremented at the loop sites that execute the
/// arithmetic, so they are exact integers for a given call.
struct OpCounter {
  std::uint64_t init = 0;     ///< initialization (matched filter, first convolution)
  std::uint64_t iter = 0;     ///< coordinate-update work across all iterations
  std::uint64_t weights = 0;  ///< linear precoder weight computation
  std::uint64_t apply = 0;    ///< linear precoder application (per-subcarrier products, IDFTs)

  std::uint64_t total() const { return init + iter + weights + apply; }

  OpCounter& operator+=(const OpCounter& o) {
    init += o.init;
    iter += o.iter;
    weights += o.weights;
    apply += o.apply;
    return *this;
  }
};

}  // namespace qprec
