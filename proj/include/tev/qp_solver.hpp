#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <stdexcept>
#include <string>

namespace tev {

/// Dense convex QP:
///
///   minimize    0.5 x'Hx + c'x + constant
///   subject to  A x = b
///               lo <= G x <= hi        (rows may be one-sided, +-inf)
///               lower <= x <= upper    (lower == upper fixes a variable)
///
/// H must be positive semidefinite.
struct DenseQp {
  Eigen::MatrixXd hessian;
  Eigen::VectorXd linear;
  double constant = 0.0;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  Eigen::MatrixXd eq_matrix;
  Eigen::VectorXd eq_rhs;
  Eigen::MatrixXd ineq_matrix;
  Eigen::VectorXd ineq_lower;
  Eigen::VectorXd ineq_upper;

  explicit DenseQp(int n = 0);

  int num_vars() const { return static_cast<int>(linear.size()); }
  double objective(const Eigen::VectorXd& x) const;
  void add_equality(const Eigen::RowVectorXd& row, double rhs);
  void add_inequality(const Eigen::RowVectorXd& row, double lo, double hi);
};

struct QpSettings {
  double tolerance = 1e-9;
  int max_iterations = 200;
};

struct QpResult {
  Eigen::VectorXd x;
  double objective = 0.0;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double complementarity = 0.0;
};

/// Worst violation of each constraint family at x.
struct ConstraintResiduals {
  double equality = 0.0;
  double inequality = 0.0;
  double box = 0.0;
  double max() const;
};

ConstraintResiduals constraint_residuals(const DenseQp& qp, const Eigen::VectorXd& x);

/// Raised on non-convergence or a detected infeasible problem. Carries the
/// best iterate seen.
class QpSolveError : public std::runtime_error {
 public:
  QpSolveError(const std::string& msg, QpResult best)
      : std::runtime_error(msg), best_(std::move(best)) {}
  const QpResult& best() const { return best_; }

 private:
  QpResult best_;
};

/// Mehrotra predictor-corrector interior point method. Fixed variables are
/// eliminated before iterating; the returned x is full length.
QpResult solve_dense_qp(const DenseQp& qp, const QpSettings& settings = {});

/// Plain-text dump for offline checking (one labelled block per matrix).
void write_qp_text(std::ostream& out, const DenseQp& qp);

}  // namespace tev
