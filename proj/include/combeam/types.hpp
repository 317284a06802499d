// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>

namespace combeam {

using Real = double;
using Complex = std::complex<Real>;

using VecX = Eigen::VectorXd;
using VecXc = Eigen::VectorXcd;
using VecXi = Eigen::VectorXi;
using MatX = Eigen::MatrixXd;
using MatXc = Eigen::MatrixXcd;
using RowVecXc = Eigen::RowVectorXcd;

// Boolean link variables x_{b,k} and soft powers u_{b,k} are stored b-major,
// k-minor: index = b * K + k.  Every module shares this ordering.
inline int link_index(int b, int k, int num_users) { return b * num_users + k; }
inline int link_bs(int link, int num_users) { return link / num_users; }
inline int link_user(int link, int num_users) { return link % num_users; }

// Raised when a conic subproblem cannot be solved reliably.  Callers that
// probe feasibility must be able to tell "infeasible" from "solver broke".
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace combeam
