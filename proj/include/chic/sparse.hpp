#pragma once

#include <vector>

namespace chic::sparse {

// Compressed-sparse-row matrix with columns sorted ascending within each row
// (the ILU(0) factorization and the diagonal lookup rely on the ordering).
struct Csr {
  int n = 0;
  std::vector<int> row_ptr;  // size n+1
  std::vector<int> col;      // size nnz, ascending per row
  std::vector<double> val;   // size nnz

  int nnz() const { return static_cast<int>(col.size()); }
};

// y = A x. The parallel version distributes rows; each row is a serial dot
// product, so the result is bitwise identical to the serial version.
void spmv(const Csr& a, const double* x, double* y);
void spmv_serial(const Csr& a, const double* x, double* y);

// Zero-fill-in incomplete LU on the matrix's own sparsity pattern; unit lower
// diagonal is implicit. Factorization and triangular solves are serial (they
// carry sequential dependencies), which also keeps them deterministic.
struct Ilu0 {
  Csr lu;
  std::vector<int> diag;  // position of the diagonal entry in each row

  static Ilu0 factor(const Csr& a);      // throws SolverError on a zero pivot
  void solve(const double* r, double* z) const;  // z = U^{ -1} L^{-1} r
};

struct GmresOptions {
  int restart = 30;
  int max_iters = 600;
  double rel_tol = 1e-8;  // on ||b - A x|| / ||b||
};

struct GmresResult {
  bool converged = false;
  int iterations = 0;
  double rel_residual = 0.0;
  std::vector<double> history;  // absolute residual norms, one per iteration
};

// Restarted GMRES, right-preconditioned with ILU(0) (prec may be null for an
// unpreconditioned solve). x carries the initial guess in and the solution
// out. Never throws; the caller decides what non-convergence means.
GmresResult gmres(const Csr& a, const Ilu0* prec, const std::vector<double>& b,
                  std::vector<double>& x, const GmresOptions& opt);

}  // namespace chic::sparse
