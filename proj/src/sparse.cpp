#include "chic/sparse.hpp"

#include <algorithm>
#include <cmath>

#include "chic/errors.hpp"
#include "chic/parallel.hpp"

namespace chic::sparse {

namespace {

double row_dot(const Csr& a, int row, const double* x) {
  double s = 0.0;
  for (int p = a.row_ptr[row]; p < a.row_ptr[row + 1]; ++p)
    s += a.val[p] * x[a.col[p]];
  return s;
}

}  // namespace

void spmv(const Csr& a, const double* x, double* y) {
  par::for_each_index(a.n, [&](std::size_t i) { y[i] = row_dot(a, static_cast<int>(i), x); });
}

void spmv_serial(const Csr& a, const double* x, double* y) {
  for (int i = 0; i < a.n; ++i) y[i] = row_dot(a, i, x);
}

Ilu0 Ilu0::factor(const Csr& a) {
  Ilu0 f;
  f.lu = a;
  f.diag.assign(a.n, -1);
  Csr& lu = f.lu;

  // Position of each column of the current row, for O(1) updates.
  std::vector<int> pos(a.n, -1);
  for (int i = 0; i < a.n; ++i) {
    const int r0 = lu.row_ptr[i], r1 = lu.row_ptr[i + 1];
    for (int p = r0; p < r1; ++p) pos[lu.col[p]] = p;

    for (int p = r0; p < r1 && lu.col[p] < i; ++p) {
      const int k = lu.col[p];
      const int dk = f.diag[k];
      const double piv = lu.val[dk];
      if (piv == 0.0) throw SolverError("ILU(0): zero pivot", {});
      const double lik = lu.val[p] / piv;
      lu.val[p] = lik;
      for (int q = dk + 1; q < lu.row_ptr[k + 1]; ++q) {
        const int j = lu.col[q];
        const int pj = pos[j];
        if (pj >= 0) lu.val[pj] -= lik * lu.val[q];
      }
    }

    const int dp = pos[i];
    if (dp < 0 || lu.val[dp] == 0.0)
      throw SolverError("ILU(0): zero or missing diagonal", {});
    f.diag[i] = dp;
    for (int p = r0; p < r1; ++p) pos[lu.col[p]] = -1;
  }
  return f;
}

void Ilu0::solve(const double* r, double* z) const {
  const int n = lu.n;
  for (int i = 0; i < n; ++i) {
    double s = r[i];
    for (int p = lu.row_ptr[i]; p < diag[i]; ++p) s -= lu.val[p] * z[lu.col[p]];
    z[i] = s;
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = z[i];
    for (int p = diag[i] + 1; p < lu.row_ptr[i + 1]; ++p)
      s -= lu.val[p] * z[lu.col[p]];
    z[i] = s / lu.val[diag[i]];
  }
}

GmresResult gmres(const Csr& a, const Ilu0* prec, const std::vector<double>& b,
                  std::vector<double>& x, const GmresOptions& opt) {
  const int n = a.n;
  const int m = opt.restart;
  GmresResult res;

  const double bnorm = par::nrm2(b.data(), n);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    res.converged = true;
    return res;
  }
  const double target = opt.rel_tol * bnorm;

  std::vector<std::vector<double>> V(m + 1, std::vector<double>(n));
  std::vector<double> H((m + 1) * m, 0.0);
  std::vector<double> cs(m), sn(m), g(m + 1);
  std::vector<double> w(n), zmv(n);

  auto apply_op = [&](const double* v, double* out) {
    if (prec) {
      prec->solve(v, zmv.data());
      spmv(a, zmv.data(), out);
    } else {
      spmv(a, v, out);
    }
  };

  double rho = 0.0;
  while (true) {
    // r = b - A x
    spmv(a, x.data(), w.data());
    par::for_each_index(n, [&](std::size_t i) { w[i] = b[i] - w[i]; });
    rho = par::nrm2(w.data(), n);
    if (rho <= target || res.iterations >= opt.max_iters) break;

    const double inv = 1.0 / rho;
    par::for_each_index(n, [&](std::size_t i) { V[0][i] = w[i] * inv; });
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = rho;

    int j = 0;
    for (; j < m && res.iterations < opt.max_iters; ++j) {
      apply_op(V[j].data(), w.data());
      // Modified Gram-Schmidt (deterministic blocked dot products).
      for (int i = 0; i <= j; ++i) {
        const double h = par::dot(w.data(), V[i].data(), n);
        H[i * m + j] = h;
        par::axpy(n, -h, V[i].data(), w.data());
      }
      double hn = par::nrm2(w.data(), n);
      H[(j + 1) * m + j] = hn;
      if (hn > 0.0) {
        const double ih = 1.0 / hn;
        par::for_each_index(n, [&](std::size_t i) { V[j + 1][i] = w[i] * ih; });
      }
      // Apply accumulated Givens rotations, then form the new one.
      for (int i = 0; i < j; ++i) {
        const double t = cs[i] * H[i * m + j] + sn[i] * H[(i + 1) * m + j];
        H[(i + 1) * m + j] =
            -sn[i] * H[i * m + j] + cs[i] * H[(i + 1) * m + j];
        H[i * m + j] = t;
      }
      const double hjj = H[j * m + j];
      const double r = std::hypot(hjj, hn);
      cs[j] = r == 0.0 ? 1.0 : hjj / r;
      sn[j] = r == 0.0 ? 0.0 : hn / r;
      H[j * m + j] = r;
      g[j + 1] = -sn[j] * g[j];
      g[j] = cs[j] * g[j];
      ++res.iterations;
      rho = std::abs(g[j + 1]);
      res.history.push_back(rho);
      if (rho <= target || hn == 0.0) {
        ++j;
        break;
      }
    }

    // y = H^{-1} g by back substitution; x += M^{-1} (V y).
    std::vector<double> y(j, 0.0);
    for (int i = j - 1; i >= 0; --i) {
      double s = g[i];
      for (int l = i + 1; l < j; ++l) s -= H[i * m + l] * y[l];
      y[i] = s / H[i * m + i];
    }
    std::fill(w.begin(), w.end(), 0.0);
    for (int i = 0; i < j; ++i) par::axpy(n, y[i], V[i].data(), w.data());
    if (prec) {
      prec->solve(w.data(), zmv.data());
      par::axpy(n, 1.0, zmv.data(), x.data());
    } else {
      par::axpy(n, 1.0, w.data(), x.data());
    }
    // Loop back: the restart head recomputes the true residual, so the
    // convergence decision never trusts the Givens estimate alone.
  }

  res.rel_residual = rho / bnorm;
  res.converged = rho <= target;
  return res;
}

}  // namespace chic::sparse
