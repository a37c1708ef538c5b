#include "tev/qp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <vector>

namespace tev {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

// Reduced problem over the free variables, with every inequality written as
// a one-sided row  sign * (a'x) - offset >= 0.
struct Reduced {
  Eigen::MatrixXd H;
  Eigen::VectorXd c;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::MatrixXd G;  // general rows (free columns only)
  // box constraints on free variable j
  std::vector<int> lb_idx, ub_idx;
  Eigen::VectorXd lb_val, ub_val;
  // general row constraints
  std::vector<int> gl_idx, gu_idx;
  Eigen::VectorXd gl_val, gu_val;
  int m() const {
    return static_cast<int>(lb_idx.size() + ub_idx.size() + gl_idx.size() + gu_idx.size());
  }
};

// Slack/dual storage in the order [lb, ub, gl, gu].
struct Cone {
  Eigen::VectorXd s, z;
};

Eigen::VectorXd constraint_values(const Reduced& r, const Eigen::VectorXd& x) {
  Eigen::VectorXd v(r.m());
  int k = 0;
  for (std::size_t i = 0; i < r.lb_idx.size(); ++i) v[k++] = x[r.lb_idx[i]] - r.lb_val[i];
  for (std::size_t i = 0; i < r.ub_idx.size(); ++i) v[k++] = r.ub_val[i] - x[r.ub_idx[i]];
  if (!r.gl_idx.empty() || !r.gu_idx.empty()) {
    const Eigen::VectorXd gx = r.G * x;
    for (std::size_t i = 0; i < r.gl_idx.size(); ++i) v[k++] = gx[r.gl_idx[i]] - r.gl_val[i];
    for (std::size_t i = 0; i < r.gu_idx.size(); ++i) v[k++] = r.gu_val[i] - gx[r.gu_idx[i]];
  }
  return v;
}

// C' v where C stacks the one-sided constraint rows.
Eigen::VectorXd apply_ct(const Reduced& r, const Eigen::VectorXd& v) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(r.c.size());
  int k = 0;
  for (int j : r.lb_idx) out[j] += v[k++];
  for (int j : r.ub_idx) out[j] -= v[k++];
  if (!r.gl_idx.empty() || !r.gu_idx.empty()) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(r.G.rows());
    for (int i : r.gl_idx) g[i] += v[k++];
    for (int i : r.gu_idx) g[i] -= v[k++];
    out += r.G.transpose() * g;
  }
  return out;
}

// C dx, one entry per one-sided constraint.
Eigen::VectorXd apply_c(const Reduced& r, const Eigen::VectorXd& dx) {
  Eigen::VectorXd out(r.m());
  int k = 0;
  for (int j : r.lb_idx) out[k++] = dx[j];
  for (int j : r.ub_idx) out[k++] = -dx[j];
  if (!r.gl_idx.empty() || !r.gu_idx.empty()) {
    const Eigen::VectorXd g = r.G * dx;
    for (int i : r.gl_idx) out[k++] = g[i];
    for (int i : r.gu_idx) out[k++] = -g[i];
  }
  return out;
}

// H + C' W C
Eigen::MatrixXd normal_matrix(const Reduced& r, const Eigen::VectorXd& w) {
  Eigen::MatrixXd M = r.H;
  int k = 0;
  for (int j : r.lb_idx) M(j, j) += w[k++];
  for (int j : r.ub_idx) M(j, j) += w[k++];
  if (!r.gl_idx.empty() || !r.gu_idx.empty()) {
    Eigen::VectorXd wg = Eigen::VectorXd::Zero(r.G.rows());
    for (int i : r.gl_idx) wg[i] += w[k++];
    for (int i : r.gu_idx) wg[i] += w[k++];
    M.noalias() += r.G.transpose() * wg.asDiagonal() * r.G;
  }
  return M;
}

double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
  double a = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv[i] < 0) a = std::min(a, -v[i] / dv[i]);
  }
  return a;
}

}  // namespace

DenseQp::DenseQp(int n)
    : hessian(Eigen::MatrixXd::Zero(n, n)),
      linear(Eigen::VectorXd::Zero(n)),
      lower(Eigen::VectorXd::Constant(n, -kInf)),
      upper(Eigen::VectorXd::Constant(n, kInf)),
      eq_matrix(0, n),
      eq_rhs(0),
      ineq_matrix(0, n),
      ineq_lower(0),
      ineq_upper(0) {}

double DenseQp::objective(const Eigen::VectorXd& x) const {
  return 0.5 * x.dot(hessian * x) + linear.dot(x) + constant;
}

void DenseQp::add_equality(const Eigen::RowVectorXd& row, double rhs) {
  const auto r = eq_matrix.rows();
  eq_matrix.conservativeResize(r + 1, Eigen::NoChange);
  eq_matrix.row(r) = row;
  eq_rhs.conservativeResize(r + 1);
  eq_rhs[r] = rhs;
}

void DenseQp::add_inequality(const Eigen::RowVectorXd& row, double lo, double hi) {
  const auto r = ineq_matrix.rows();
  ineq_matrix.conservativeResize(r + 1, Eigen::NoChange);
  ineq_matrix.row(r) = row;
  ineq_lower.conservativeResize(r + 1);
  ineq_upper.conservativeResize(r + 1);
  ineq_lower[r] = lo;
  ineq_upper[r] = hi;
}

double ConstraintResiduals::max() const { return std::max({equality, inequality, box}); }

ConstraintResiduals constraint_residuals(const DenseQp& qp, const Eigen::VectorXd& x) {
  ConstraintResiduals res;
  if (qp.eq_matrix.rows()) res.equality = inf_norm(qp.eq_matrix * x - qp.eq_rhs);
  if (qp.ineq_matrix.rows()) {
    const Eigen::VectorXd gx = qp.ineq_matrix * x;
    for (Eigen::Index i = 0; i < gx.size(); ++i) {
      res.inequality = std::max({res.inequality, qp.ineq_lower[i] - gx[i], gx[i] - qp.ineq_upper[i]});
    }
  }
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    res.box = std::max({res.box, qp.lower[j] - x[j], x[j] - qp.upper[j]});
  }
  return res;
}

QpResult solve_dense_qp(const DenseQp& qp, const QpSettings& settings) {
  const int n = qp.num_vars();
  const double tol = settings.tolerance;

  // --- eliminate fixed variables -------------------------------------------
  std::vector<int> free_vars;
  Eigen::VectorXd x_full = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < n; ++j) {
    if (qp.lower[j] > qp.upper[j]) throw QpSolveError("inconsistent bounds on variable", {x_full});
    if (qp.lower[j] == qp.upper[j]) {
      x_full[j] = qp.lower[j];
    } else {
      free_vars.push_back(j);
    }
  }
  const int nf = static_cast<int>(free_vars.size());

  Reduced r;
  r.H.resize(nf, nf);
  r.c.resize(nf);
  const Eigen::VectorXd hx_fixed = qp.hessian * x_full;
  for (int a = 0; a < nf; ++a) {
    r.c[a] = qp.linear[free_vars[a]] + hx_fixed[free_vars[a]];
    for (int b = 0; b < nf; ++b) r.H(a, b) = qp.hessian(free_vars[a], free_vars[b]);
  }

  auto take_cols = [&](const Eigen::MatrixXd& M) {
    Eigen::MatrixXd out(M.rows(), nf);
    for (int a = 0; a < nf; ++a) out.col(a) = M.col(free_vars[a]);
    return out;
  };

  {
    const Eigen::MatrixXd Af = take_cols(qp.eq_matrix);
    const Eigen::VectorXd bf = qp.eq_rhs - qp.eq_matrix * x_full;
    std::vector<int> keep;
    for (Eigen::Index i = 0; i < Af.rows(); ++i) {
      if (Af.row(i).cwiseAbs().maxCoeff() > 0) {
        keep.push_back(static_cast<int>(i));
      } else if (std::abs(bf[i]) > tol) {
        throw QpSolveError("equality row " + std::to_string(i) + " is infeasible with fixed variables",
                           {x_full});
      }
    }
    r.A.resize(static_cast<Eigen::Index>(keep.size()), nf);
    r.b.resize(static_cast<Eigen::Index>(keep.size()));
    for (std::size_t k = 0; k < keep.size(); ++k) {
      r.A.row(k) = Af.row(keep[k]);
      r.b[k] = bf[keep[k]];
    }
  }
  {
    const Eigen::MatrixXd Gf = take_cols(qp.ineq_matrix);
    const Eigen::VectorXd shift = qp.ineq_matrix * x_full;
    std::vector<int> keep;
    for (Eigen::Index i = 0; i < Gf.rows(); ++i) {
      const double lo = qp.ineq_lower[i] - shift[i];
      const double hi = qp.ineq_upper[i] - shift[i];
      if (Gf.row(i).cwiseAbs().maxCoeff() > 0) {
        if (std::isfinite(lo) || std::isfinite(hi)) keep.push_back(static_cast<int>(i));
      } else if (lo > tol || hi < -tol) {
        throw QpSolveError("inequality row " + std::to_string(i) + " is infeasible with fixed variables",
                           {x_full});
      }
    }
    r.G.resize(static_cast<Eigen::Index>(keep.size()), nf);
    std::vector<double> glv, guv;
    for (std::size_t k = 0; k < keep.size(); ++k) {
      const int i = keep[k];
      r.G.row(k) = Gf.row(i);
      const double lo = qp.ineq_lower[i] - shift[i];
      const double hi = qp.ineq_upper[i] - shift[i];
      if (std::isfinite(lo)) {
        r.gl_idx.push_back(static_cast<int>(k));
        glv.push_back(lo);
      }
      if (std::isfinite(hi)) {
        r.gu_idx.push_back(static_cast<int>(k));
        guv.push_back(hi);
      }
    }
    r.gl_val = Eigen::Map<Eigen::VectorXd>(glv.data(), static_cast<Eigen::Index>(glv.size()));
    r.gu_val = Eigen::Map<Eigen::VectorXd>(guv.data(), static_cast<Eigen::Index>(guv.size()));
  }
  {
    std::vector<double> lbv, ubv;
    for (int a = 0; a < nf; ++a) {
      const int j = free_vars[a];
      if (std::isfinite(qp.lower[j])) {
        r.lb_idx.push_back(a);
        lbv.push_back(qp.lower[j]);
      }
      if (std::isfinite(qp.upper[j])) {
        r.ub_idx.push_back(a);
        ubv.push_back(qp.upper[j]);
      }
    }
    r.lb_val = Eigen::Map<Eigen::VectorXd>(lbv.data(), static_cast<Eigen::Index>(lbv.size()));
    r.ub_val = Eigen::Map<Eigen::VectorXd>(ubv.data(), static_cast<Eigen::Index>(ubv.size()));
  }

  auto finish = [&](const Eigen::VectorXd& xf, int iters, double rp, double rd, double mu) {
    QpResult out;
    out.x = x_full;
    for (int a = 0; a < nf; ++a) {
      const int j = free_vars[a];
      out.x[j] = std::clamp(xf[a], qp.lower[j], qp.upper[j]);
    }
    out.objective = qp.objective(out.x);
    out.iterations = iters;
    out.primal_residual = rp;
    out.dual_residual = rd;
    out.complementarity = mu;
    return out;
  };

  if (nf == 0) {
    const auto res = constraint_residuals(qp, x_full);
    if (res.max() > tol) throw QpSolveError("fixed point violates constraints", finish({}, 0, res.max(), 0, 0));
    return finish(Eigen::VectorXd(0), 0, res.max(), 0.0, 0.0);
  }

  const int m = r.m();
  const int p = static_cast<int>(r.A.rows());

  // --- starting point --------------------------------------------------------
  Eigen::VectorXd x = Eigen::VectorXd::Zero(nf);
  for (int a = 0; a < nf; ++a) {
    const int j = free_vars[a];
    const double lo = qp.lower[j], hi = qp.upper[j];
    if (std::isfinite(lo) && std::isfinite(hi)) {
      x[a] = 0.5 * (lo + hi);
    } else if (std::isfinite(lo)) {
      x[a] = lo + 1.0;
    } else if (std::isfinite(hi)) {
      x[a] = hi - 1.0;
    }
  }
  Eigen::VectorXd y = Eigen::VectorXd::Zero(p);
  Cone k;
  k.s = constraint_values(r, x).cwiseMax(1.0);
  k.z = Eigen::VectorXd::Ones(m);

  const double scale_c = 1.0 + inf_norm(r.c);
  const double scale_b = 1.0 + std::max(inf_norm(r.b), std::max(inf_norm(r.lb_val), inf_norm(r.ub_val)));

  QpResult best;
  double best_merit = kInf;
  const double reg = 1e-13;

  for (int iter = 0; iter <= settings.max_iterations; ++iter) {
    const Eigen::VectorXd cx = constraint_values(r, x);
    const Eigen::VectorXd r_c = cx - k.s;
    const Eigen::VectorXd r_p = p ? Eigen::VectorXd(r.A * x - r.b) : Eigen::VectorXd(0);
    Eigen::VectorXd r_d = r.H * x + r.c - apply_ct(r, k.z);
    if (p) r_d -= r.A.transpose() * y;
    const double mu = m ? k.s.dot(k.z) / m : 0.0;

    const double pres = std::max(inf_norm(r_p), inf_norm(r_c));
    const double dres = inf_norm(r_d);
    const double merit = std::max({pres / scale_b, dres / scale_c, mu});
    if (merit < best_merit) {
      best_merit = merit;
      best = finish(x, iter, pres, dres, mu);
    }
    if (pres <= tol && dres <= tol * scale_c && mu <= 0.1 * tol) return finish(x, iter, pres, dres, mu);
    if (iter == settings.max_iterations) break;
    if (m && inf_norm(k.z) > 1e14)
      throw QpSolveError("dual iterates diverged; problem is likely infeasible", best);

    const Eigen::VectorXd w = k.z.cwiseQuotient(k.s);
    Eigen::MatrixXd M = normal_matrix(r, w);
    M.diagonal().array() += reg;
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    // Near convergence the barrier weights span many orders of magnitude and
    // roundoff can make M numerically indefinite; shift it back.
    for (double shift = 1e-14 * M.diagonal().cwiseAbs().maxCoeff();
         llt.info() != Eigen::Success && shift < 1e-4 * (1.0 + M.diagonal().cwiseAbs().maxCoeff());
         shift *= 100.0) {
      M.diagonal().array() += shift;
      llt.compute(M);
    }
    if (llt.info() != Eigen::Success) throw QpSolveError("normal matrix factorization failed", best);

    Eigen::MatrixXd MinvAt;
    Eigen::LDLT<Eigen::MatrixXd> schur;
    if (p) {
      MinvAt = llt.solve(r.A.transpose());
      Eigen::MatrixXd K = r.A * MinvAt;
      K.diagonal().array() += reg;
      schur.compute(K);
    }

    // Solves the Newton system for a given complementarity right-hand side.
    auto direction = [&](const Eigen::VectorXd& r_sz, Eigen::VectorXd& dx, Eigen::VectorXd& dy,
                         Eigen::VectorXd& ds, Eigen::VectorXd& dz) {
      const Eigen::VectorXd v = r_sz.cwiseQuotient(k.s) - w.cwiseProduct(r_c);
      const Eigen::VectorXd rhs = -r_d + apply_ct(r, v);
      Eigen::VectorXd m_rhs = llt.solve(rhs);
      if (p) {
        dy = schur.solve(-r_p - r.A * m_rhs);
        dx = m_rhs + MinvAt * dy;
      } else {
        dy.resize(0);
        dx = m_rhs;
      }
      ds = apply_c(r, dx) + r_c;
      dz = v - w.cwiseProduct(apply_c(r, dx));
    };

    Eigen::VectorXd dx, dy, ds, dz;
    direction(-k.s.cwiseProduct(k.z), dx, dy, ds, dz);
    const double a_aff = std::min(max_step(k.s, ds), max_step(k.z, dz));
    const double mu_aff =
        m ? (k.s + a_aff * ds).dot(k.z + a_aff * dz) / m : 0.0;
    const double sigma = mu > 0 ? std::pow(mu_aff / mu, 3) : 0.0;

    const Eigen::VectorXd r_sz =
        (-k.s.cwiseProduct(k.z) - ds.cwiseProduct(dz)).array() + sigma * mu;
    direction(r_sz, dx, dy, ds, dz);
    const double a = std::min(1.0, 0.995 * std::min(max_step(k.s, ds), max_step(k.z, dz)));

    x += a * dx;
    if (p) y += a * dy;
    k.s += a * ds;
    k.z += a * dz;
  }
  throw QpSolveError("interior point method did not converge within " +
                         std::to_string(settings.max_iterations) + " iterations",
                     best);
}

void write_qp_text(std::ostream& out, const DenseQp& qp) {
  const Eigen::IOFormat fmt(Eigen::FullPrecision, 0, " ", "\n");
  out << std::setprecision(17);
  out << "# n " << qp.num_vars() << "\n";
  out << "# constant\n" << qp.constant << "\n";
  out << "# hessian " << qp.hessian.rows() << " " << qp.hessian.cols() << "\n"
      << qp.hessian.format(fmt) << "\n";
  out << "# linear\n" << qp.linear.transpose().format(fmt) << "\n";
  out << "# lower\n" << qp.lower.transpose().format(fmt) << "\n";
  out << "# upper\n" << qp.upper.transpose().format(fmt) << "\n";
  out << "# eq_matrix " << qp.eq_matrix.rows() << " " << qp.eq_matrix.cols() << "\n";
  if (qp.eq_matrix.rows()) out << qp.eq_matrix.format(fmt) << "\n";
  out << "# eq_rhs\n";
  if (qp.eq_rhs.size()) out << qp.eq_rhs.transpose().format(fmt) << "\n";
  out << "# ineq_matrix " << qp.ineq_matrix.rows() << " " << qp.ineq_matrix.cols() << "\n";
  if (qp.ineq_matrix.rows()) out << qp.ineq_matrix.format(fmt) << "\n";
  out << "# ineq_lower\n";
  if (qp.ineq_lower.size()) out << qp.ineq_lower.transpose().format(fmt) << "\n";
  out << "# ineq_upper\n";
  if (qp.ineq_upper.size()) out << qp.ineq_upper.transpose().format(fmt) << "\n";
}

}  // namespace tev
