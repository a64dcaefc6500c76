// Primal-dual interior point method for block-diagonal Hermitian SDPs.
//
// The complex program is mapped to a real symmetric one by
//   Y -> [[Re Y, -Im Y], [Im Y, Re Y]],  A -> embed(A) / 2,
// so that <A_hat, Y_hat> = Tr(A Y) on embedded points. The real problem is
// solved in the minimization form
//   min <C', X>  s.t.  A(X) = b, X >= 0       (C' = -C)
//   max b'y      s.t.  A^T y + Z = C', Z >= 0
// with Nesterov-Todd scaling and a Mehrotra predictor-corrector.

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "qipl/sdp.hpp"

namespace qipl {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd embed(const ComplexMatrix& a) {
  const Eigen::Index r = a.rows();
  MatrixXd out(2 * r, 2 * r);
  const MatrixXd re = a.real();
  const MatrixXd im = a.imag();
  out.topLeftCorner(r, r) = re;
  out.topRightCorner(r, r) = -im;
  out.bottomLeftCorner(r, r) = im;
  out.bottomRightCorner(r, r) = re;
  return out;
}

ComplexMatrix unembed(const MatrixXd& y) {
  const Eigen::Index r = y.rows() / 2;
  ComplexMatrix out(r, r);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < r; ++j)
      out(i, j) = cplx(0.5 * (y(i, j) + y(r + i, r + j)),
                       0.5 * (y(r + i, j) - y(i, r + j)));
  return out;
}

using Blocks = std::vector<MatrixXd>;

double inner(const MatrixXd& a, const MatrixXd& b) { return (a.array() * b.array()).sum(); }

double inner(const Blocks& a, const Blocks& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += inner(a[i], b[i]);
  return s;
}

double fro(const Blocks& a) {
  double s = 0;
  for (const auto& m : a) s += m.squaredNorm();
  return std::sqrt(s);
}

MatrixXd sym(const MatrixXd& m) { return 0.5 * (m + m.transpose()); }

// Real form of the program restricted to nonempty faces.
struct RealProgram {
  std::vector<int> src_block;                 // program block index per real block
  std::vector<ComplexMatrix> face;            // d x r basis (identity when no face)
  std::vector<Eigen::Index> size;             // 2r
  Blocks c;                                   // minimization cost C'
  std::vector<std::vector<MatrixXd>> a;       // a[k][i], empty when zero
  VectorXd b;
  std::vector<int> src_constraint;            // original index per kept row
};

RealProgram reduce(const SdpProgram& p) {
  RealProgram rp;
  std::vector<int> real_index(p.blocks.size(), -1);
  for (std::size_t i = 0; i < p.blocks.size(); ++i) {
    const auto& blk = p.blocks[i];
    ComplexMatrix f = blk.face ? *blk.face : identity(std::size_t(blk.dim));
    if (f.cols() == 0) continue;
    real_index[i] = int(rp.src_block.size());
    rp.src_block.push_back(int(i));
    rp.size.push_back(2 * f.cols());
    rp.face.push_back(std::move(f));
  }
  const std::size_t nb = rp.src_block.size();
  auto restrict_coeff = [&](int blk, const ComplexMatrix& coeff) {
    const auto& f = rp.face[std::size_t(real_index[std::size_t(blk)])];
    return MatrixXd(0.5 * embed(hermitian_part(f.adjoint() * coeff * f)));
  };
  rp.c.resize(nb);
  for (std::size_t i = 0; i < nb; ++i) rp.c[i] = MatrixXd::Zero(rp.size[i], rp.size[i]);
  for (const auto& t : p.objective) {
    const int ri = real_index[std::size_t(t.block)];
    if (ri < 0) continue;
    rp.c[std::size_t(ri)] -= restrict_coeff(t.block, t.coeff);
  }

  // Vectorize rows and drop linearly dependent ones.
  const std::size_t m = p.constraints.size();
  std::vector<std::vector<MatrixXd>> rows(m, std::vector<MatrixXd>(nb));
  VectorXd rhs = VectorXd::Zero(Eigen::Index(m));
  Eigen::Index total = 0;
  for (auto s : rp.size) total += s * s;
  MatrixXd cols = MatrixXd::Zero(total, Eigen::Index(m));
  for (std::size_t k = 0; k < m; ++k) {
    rhs(Eigen::Index(k)) = p.constraints[k].rhs.real();
    for (const auto& t : p.constraints[k].terms) {
      const int ri = real_index[std::size_t(t.block)];
      if (ri < 0) continue;
      MatrixXd r = restrict_coeff(t.block, t.coeff);
      auto& slot = rows[k][std::size_t(ri)];
      if (slot.size() == 0) slot = std::move(r);
      else slot += r;
    }
    Eigen::Index off = 0;
    for (std::size_t i = 0; i < nb; ++i) {
      const Eigen::Index s = rp.size[i];
      if (rows[k][i].size() != 0)
        cols.col(Eigen::Index(k)).segment(off, s * s) =
            Eigen::Map<const VectorXd>(rows[k][i].data(), s * s);
      off += s * s;
    }
  }

  std::vector<int> keep;
  if (m > 0 && total > 0) {
    Eigen::ColPivHouseholderQR<MatrixXd> qr(cols);
    const double scale = std::max(1.0, cols.colwise().norm().maxCoeff());
    qr.setThreshold(1e-10 * scale / std::max(1.0, std::sqrt(double(total))));
    const Eigen::Index rank = qr.rank();
    for (Eigen::Index i = 0; i < rank; ++i) keep.push_back(int(qr.colsPermutation().indices()(i)));
    std::sort(keep.begin(), keep.end());
  }
  // Rows outside the kept span must be consistent, or the program is infeasible.
  std::vector<bool> kept(m, false);
  for (int k : keep) kept[std::size_t(k)] = true;
  MatrixXd basis(total, Eigen::Index(keep.size()));
  VectorXd bk = VectorXd::Zero(Eigen::Index(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    basis.col(Eigen::Index(j)) = cols.col(keep[j]);
    bk(Eigen::Index(j)) = rhs(keep[j]);
  }
  std::optional<Eigen::ColPivHouseholderQR<MatrixXd>> bqr;
  if (!keep.empty()) bqr.emplace(basis);
  for (std::size_t k = 0; k < m; ++k) {
    if (kept[k]) continue;
    double implied = 0.0;
    if (bqr) {
      const VectorXd coef = bqr->solve(VectorXd(cols.col(Eigen::Index(k))));
      implied = coef.dot(bk);
    }
    const double bv = rhs(Eigen::Index(k));
    if (std::abs(bv - implied) > 1e-7 * (1.0 + std::abs(bv))) {
      throw InfeasibleError(
          fmt::format("constraint '{}' contradicts the others (rhs {} vs implied {})",
                      p.constraints[k].label, bv, implied),
          VectorXd());
    }
  }
  rp.b.resize(Eigen::Index(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    rp.a.push_back(std::move(rows[std::size_t(keep[j])]));
    rp.b(Eigen::Index(j)) = rhs(keep[j]);
    rp.src_constraint.push_back(keep[j]);
  }
  return rp;
}

VectorXd apply_a(const RealProgram& rp, const Blocks& x) {
  VectorXd out(rp.b.size());
  for (std::size_t k = 0; k < rp.a.size(); ++k) {
    double s = 0;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (rp.a[k][i].size() != 0) s += inner(rp.a[k][i], x[i]);
    out(Eigen::Index(k)) = s;
  }
  return out;
}

Blocks apply_at(const RealProgram& rp, const VectorXd& y) {
  Blocks out(rp.size.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = MatrixXd::Zero(rp.size[i], rp.size[i]);
  for (std::size_t k = 0; k < rp.a.size(); ++k)
    for (std::size_t i = 0; i < out.size(); ++i)
      if (rp.a[k][i].size() != 0) out[i] += y(Eigen::Index(k)) * rp.a[k][i];
  return out;
}

// Largest alpha with x + alpha*dx PSD, given the Cholesky factor of x.
double max_step(const MatrixXd& chol_lower, const MatrixXd& dx) {
  const auto l = chol_lower.triangularView<Eigen::Lower>();
  MatrixXd t = l.solve(dx);
  t = l.solve(MatrixXd(t.transpose()));
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(sym(t), Eigen::EigenvaluesOnly);
  const double lmin = es.eigenvalues()(0);
  if (lmin >= 0) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

struct Scaling {
  MatrixXd lx, lz;  // Cholesky factors
  MatrixXd g, ginv, w;
  VectorXd d;
};

bool make_scaling(const MatrixXd& x, const MatrixXd& z, Scaling& s) {
  Eigen::LLT<MatrixXd> cx(x), cz(z);
  if (cx.info() != Eigen::Success || cz.info() != Eigen::Success) return false;
  s.lx = cx.matrixL();
  s.lz = cz.matrixL();
  Eigen::JacobiSVD<MatrixXd> svd(s.lz.transpose() * s.lx, Eigen::ComputeFullU | Eigen::ComputeFullV);
  s.d = svd.singularValues();
  if (s.d.minCoeff() <= 0) return false;
  const VectorXd isq = s.d.array().rsqrt();
  const VectorXd sq = s.d.array().sqrt();
  s.g = s.lx * svd.matrixV() * isq.asDiagonal();
  // G^{-1} = Sigma^{1/2} V^T L^{-1}
  const MatrixXd linv = s.lx.triangularView<Eigen::Lower>().solve(
      MatrixXd::Identity(x.rows(), x.cols()));
  s.ginv = sq.asDiagonal() * svd.matrixV().transpose() * linv;
  s.w = s.g * s.g.transpose();
  return true;
}

struct Iterate {
  Blocks x, z;
  VectorXd y;
};

}  // namespace

SdpSolution solve(const SdpProgram& program, const SolverOptions& opt) {
  program.validate();
  const RealProgram rp = reduce(program);
  const std::size_t nb = rp.size.size();
  const std::size_t m = std::size_t(rp.b.size());

  auto finish = [&](const Iterate& it, int iters) {
    SdpSolution sol;
    sol.blocks.resize(program.blocks.size());
    for (std::size_t i = 0; i < program.blocks.size(); ++i)
      sol.blocks[i] = ComplexMatrix::Zero(program.blocks[i].dim, program.blocks[i].dim);
    for (std::size_t i = 0; i < nb; ++i) {
      const ComplexMatrix y = unembed(it.x[i]);
      const auto& f = rp.face[i];
      sol.blocks[std::size_t(rp.src_block[i])] = hermitian_part(f * y * f.adjoint());
    }
    sol.y = it.y;
    sol.objective_value = program.evaluate_objective(sol.blocks);
    sol.dual_value = -rp.b.dot(it.y) + program.objective_offset;
    sol.gap = sol.dual_value - sol.objective_value;
    const auto res = program.residuals(sol.blocks);
    double r2 = 0;
    for (double r : res) r2 += r * r;
    sol.primal_residual = std::sqrt(r2);
    Blocks rd = apply_at(rp, it.y);
    double d2 = 0;
    for (std::size_t i = 0; i < nb; ++i) d2 += (rp.c[i] - it.z[i] - rd[i]).squaredNorm();
    sol.dual_residual = std::sqrt(d2);
    sol.iterations = iters;
    return sol;
  };

  Iterate it;
  it.y = VectorXd::Zero(Eigen::Index(m));
  if (nb == 0) {
    if (rp.b.size() > 0 && rp.b.cwiseAbs().maxCoeff() > opt.tol)
      throw InfeasibleError("program has no free variables but nonzero constraints", VectorXd());
    return finish(it, 0);
  }

  // Starting point in the style of SDPT3.
  const double bnorm = rp.b.norm();
  const double cnorm = fro(rp.c);
  Eigen::Index ntot = 0;
  for (std::size_t i = 0; i < nb; ++i) {
    const Eigen::Index n = rp.size[i];
    ntot += n;
    double xi = std::max(10.0, std::sqrt(double(n)));
    double eta = std::max({10.0, std::sqrt(double(n)), rp.c[i].norm()});
    for (std::size_t k = 0; k < m; ++k) {
      if (rp.a[k][i].size() == 0) continue;
      const double an = rp.a[k][i].norm();
      xi = std::max(xi, double(n) * (1.0 + std::abs(rp.b(Eigen::Index(k)))) / (1.0 + an));
      eta = std::max(eta, an);
    }
    it.x.push_back(xi * MatrixXd::Identity(n, n));
    it.z.push_back(eta * MatrixXd::Identity(n, n));
  }

  Iterate best = it;
  double best_merit = std::numeric_limits<double>::infinity();
  const double tol = opt.tol;
  MatrixXd schur = MatrixXd::Zero(Eigen::Index(m), Eigen::Index(m));

  for (int iter = 0; iter < opt.max_iterations; ++iter) {
    const VectorXd rp_vec = rp.b - apply_a(rp, it.x);
    Blocks aty = apply_at(rp, it.y);
    Blocks rd(nb);
    for (std::size_t i = 0; i < nb; ++i) rd[i] = rp.c[i] - it.z[i] - aty[i];
    const double pobj = inner(rp.c, it.x);
    const double dobj = rp.b.dot(it.y);
    const double xz = inner(it.x, it.z);
    const double mu = xz / double(ntot);
    const double denom = 1.0 + std::abs(pobj) + std::abs(dobj);
    const double relgap = std::max(std::abs(pobj - dobj), xz) / denom;
    const double pinf = rp_vec.norm();
    const double dinf = fro(rd) / (1.0 + cnorm);
    const double merit = std::max({relgap, pinf / (1.0 + bnorm), dinf});
    if (merit < best_merit) {
      best_merit = merit;
      best = it;
    }
    if (relgap <= tol && pinf <= tol && dinf <= tol) return finish(it, iter);
    if (it.y.size() > 0 && it.y.norm() > opt.infeasibility_bound && pinf > tol)
      throw InfeasibleError("dual multipliers diverged; program is infeasible", it.y);

    std::vector<Scaling> sc(nb);
    bool ok = true;
    for (std::size_t i = 0; i < nb && ok; ++i) ok = make_scaling(it.x[i], it.z[i], sc[i]);
    if (!ok) break;

    // Schur complement M_kl = <A_k, W A_l W>.
    for (std::size_t l = 0; l < m; ++l) {
      Blocks t(nb);
      for (std::size_t i = 0; i < nb; ++i)
        if (rp.a[l][i].size() != 0) t[i] = sc[i].w * rp.a[l][i] * sc[i].w;
      for (std::size_t k = l; k < m; ++k) {
        double s = 0;
        for (std::size_t i = 0; i < nb; ++i)
          if (t[i].size() != 0 && rp.a[k][i].size() != 0) s += inner(rp.a[k][i], t[i]);
        schur(Eigen::Index(k), Eigen::Index(l)) = s;
        schur(Eigen::Index(l), Eigen::Index(k)) = s;
      }
    }
    Eigen::LLT<MatrixXd> mchol(schur);
    Eigen::LDLT<MatrixXd> mldlt;
    const bool use_llt = mchol.info() == Eigen::Success;
    if (!use_llt) mldlt.compute(schur);
    auto schur_solve = [&](const VectorXd& h) -> VectorXd {
      return use_llt ? VectorXd(mchol.solve(h)) : VectorXd(mldlt.solve(h));
    };

    Blocks wrdw(nb);
    for (std::size_t i = 0; i < nb; ++i) wrdw[i] = sc[i].w * rd[i] * sc[i].w;

    // Direction for a given scaled complementarity target R'.
    auto direction = [&](const std::vector<MatrixXd>& rprime, Blocks& dx, Blocks& dz,
                         VectorXd& dy) {
      Blocks rc(nb), tmp(nb);
      for (std::size_t i = 0; i < nb; ++i) {
        const VectorXd& d = sc[i].d;
        MatrixXd s(d.size(), d.size());
        for (Eigen::Index a = 0; a < d.size(); ++a)
          for (Eigen::Index b = 0; b < d.size(); ++b) s(a, b) = 2.0 * rprime[i](a, b) / (d(a) + d(b));
        rc[i] = sym(sc[i].g * s * sc[i].g.transpose());
        tmp[i] = rc[i] - wrdw[i];
      }
      dy = schur_solve(rp_vec - apply_a(rp, tmp));
      Blocks atdy = apply_at(rp, dy);
      dx.resize(nb);
      dz.resize(nb);
      for (std::size_t i = 0; i < nb; ++i) {
        dz[i] = sym(rd[i] - atdy[i]);
        dx[i] = sym(rc[i] - sc[i].w * dz[i] * sc[i].w);
      }
    };
    auto step_lengths = [&](const Blocks& dx, const Blocks& dz, double& ap, double& ad) {
      ap = ad = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < nb; ++i) {
        ap = std::min(ap, max_step(sc[i].lx, dx[i]));
        ad = std::min(ad, max_step(sc[i].lz, dz[i]));
      }
    };

    // Predictor.
    std::vector<MatrixXd> rprime(nb);
    for (std::size_t i = 0; i < nb; ++i)
      rprime[i] = MatrixXd(VectorXd(-sc[i].d.array().square()).asDiagonal());
    Blocks dx, dz;
    VectorXd dy;
    direction(rprime, dx, dz, dy);
    double ap = 0, ad = 0;
    step_lengths(dx, dz, ap, ad);
    ap = std::min(1.0, ap);
    ad = std::min(1.0, ad);
    double xz_aff = 0;
    for (std::size_t i = 0; i < nb; ++i)
      xz_aff += inner(it.x[i] + ap * dx[i], it.z[i] + ad * dz[i]);
    const double mu_aff = xz_aff / double(ntot);
    const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);

    // Corrector.
    for (std::size_t i = 0; i < nb; ++i) {
      const MatrixXd dxs = sc[i].ginv * dx[i] * sc[i].ginv.transpose();
      const MatrixXd dzs = sc[i].g.transpose() * dz[i] * sc[i].g;
      rprime[i] = sigma * mu * MatrixXd::Identity(sc[i].d.size(), sc[i].d.size());
      rprime[i].diagonal() -= sc[i].d.array().square().matrix();
      rprime[i] -= 0.5 * (dxs * dzs + dzs * dxs);
    }
    direction(rprime, dx, dz, dy);
    step_lengths(dx, dz, ap, ad);
    ap = std::min(1.0, opt.step_fraction * ap);
    ad = std::min(1.0, opt.step_fraction * ad);
    if (ap < 1e-12 && ad < 1e-12) break;
    for (std::size_t i = 0; i < nb; ++i) {
      it.x[i] = sym(it.x[i] + ap * dx[i]);
      it.z[i] = sym(it.z[i] + ad * dz[i]);
    }
    it.y += ad * dy;
  }

  SdpSolution b = finish(best, opt.max_iterations);
  throw ConvergenceError(
      fmt::format("interior point method stopped before reaching tolerance {} "
                  "(best merit {:.3e})", tol, best_merit),
      std::move(b));
}

// ---------------------------------------------------------------------------

namespace {
cplx trace_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  return (a.array() * b.transpose().array()).sum();
}
}  // namespace

void SdpProgram::validate() const {
  auto check_term = [&](const SdpTerm& t, const std::string& where) {
    if (t.block < 0 || std::size_t(t.block) >= blocks.size())
      throw ArgumentError(where + ": block index out of range");
    const int d = blocks[std::size_t(t.block)].dim;
    if (t.coeff.rows() != d || t.coeff.cols() != d)
      throw ArgumentError(where + ": coefficient shape does not match block");
    if (!is_hermitian(t.coeff, 1e-9)) throw ArgumentError(where + ": coefficient not Hermitian");
  };
  for (const auto& b : blocks) {
    if (b.dim < 0) throw ArgumentError("negative block dimension");
    if (b.face && (b.face->rows() != b.dim || b.face->cols() > b.dim))
      throw ArgumentError("face basis shape does not match block " + b.name);
  }
  for (const auto& t : objective) check_term(t, "objective");
  for (const auto& c : constraints) {
    for (const auto& t : c.terms) check_term(t, "constraint " + c.label);
    if (std::abs(c.rhs.imag()) > 1e-9)
      throw ArgumentError("constraint " + c.label + " has a non-real right-hand side");
  }
}

double SdpProgram::evaluate_objective(const std::vector<ComplexMatrix>& x) const {
  double s = objective_offset;
  for (const auto& t : objective) s += trace_product(t.coeff, x[std::size_t(t.block)]).real();
  return s;
}

std::vector<double> SdpProgram::residuals(const std::vector<ComplexMatrix>& x) const {
  std::vector<double> out;
  out.reserve(constraints.size());
  for (const auto& c : constraints) {
    cplx s = 0;
    for (const auto& t : c.terms) s += trace_product(t.coeff, x[std::size_t(t.block)]);
    out.push_back(std::abs(s - c.rhs));
  }
  return out;
}

}  // namespace qipl
