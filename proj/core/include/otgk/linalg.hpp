#pragma once

#include <Eigen/Dense>

namespace otgk {

// Spectrum of a real symmetric matrix.
//
// Eigenvalues are sorted by absolute value, largest first; values whose
// magnitudes agree to within round-off are ordered algebraically larger
// first, so (1, -1) rather than (-1, 1). Column j of `eigenvectors` belongs
// to eigenvalues[j].
//
// Eigenvectors are made deterministic:
//  * inside a repeated eigenvalue the basis is rebuilt from projections of
//    vectors derived from the matrix itself (the all-ones vector, the
//    subspace's projector diagonal, and their images under powers of the
//    matrix), so permuting rows and columns of the input permutes the
//    eigenvector rows in the same way whenever those projections span the
//    subspace;
//  * each vector's entry of largest absolute value is made positive. When
//    that entry is tied between opposite signs the sign of the third moment
//    sum(u_i^3) decides, then the larger of the descending value sequences
//    of u and -u. A vector whose values are symmetric about zero keeps the
//    sign the solver gave it.
struct SymmetricEig {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;

  Eigen::MatrixXd reconstruct() const;
};

struct JacobiOptions {
  // Stop once the off-diagonal Frobenius norm drops below
  // tolerance * max(1, ||m||_F).
  double tolerance = 1e-12;
  int max_sweeps = 100;
};

// max |m - m^T| <= tol * max(1, max |m|)
bool is_symmetric(const Eigen::MatrixXd& m, double tol = 1e-10);

// Throws ContractViolation on empty or asymmetric input and NumericalError
// if the sweep cap is hit before convergence.
SymmetricEig symmetric_eig(const Eigen::MatrixXd& m,
                           const JacobiOptions& options = {});

// Nearest positive semidefinite matrix in Frobenius norm: eigenvalues of
// (m + m^T) / 2 are clipped at zero.
Eigen::MatrixXd psd_project(const Eigen::MatrixXd& m);

// Smallest eigenvalue of (m + m^T) / 2.
double min_eigenvalue(const Eigen::MatrixXd& m);

}  // namespace otgk
