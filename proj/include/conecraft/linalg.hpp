#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "conecraft/common.hpp"
#include "conecraft/rng.hpp"

namespace conecraft {

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

Mat kron(const Mat& a, const Mat& b);

// k = 0..3 -> I, X, Y, Z.
Mat pauli(int k);

Mat matrix_unit(int dim, int i, int j);

// Haar-distributed unitary, deterministic in the rng stream: fills a
// Gaussian matrix row by row, then orthonormalizes columns left to right
// (modified Gram-Schmidt). The implicit R factor has positive diagonal,
// which makes the QR decomposition unique and the Q factor Haar.
Mat haar_unitary(int dim, Rng& rng);

// GUE-distributed Hermitian matrix: (A + A^dag)/2 with A complex Gaussian.
Mat random_hermitian(int dim, Rng& rng);

// Eigenvalues of a Hermitian matrix, ascending. Symmetrizes the input
// first so tiny anti-Hermitian noise cannot leak into complex pairs.
Eigen::VectorXd hermitian_eigenvalues(const Mat& m);

// Largest singular value.
double op_norm(const Mat& m);

// Sum of singular values.
double trace_norm(const Mat& m);

bool is_hermitian(const Mat& m, double tol = 1e-10);

// Column-stacking: vec(M)[r + rows*c] = M(r, c).
Vec vec(const Mat& m);
Mat unvec(const Vec& v, int rows);

// Partial trace over the given qubit positions (position p <-> index bit
// n-1-p). Kept positions retain their relative order in the result.
Mat partial_trace(const Mat& rho, int n_qubits, const std::vector<int>& traced_positions);

// Embed a k-qubit operator acting on the listed positions (ascending)
// into the full 2^n space, identity elsewhere.
Mat embed_operator(const Mat& op, const std::vector<int>& positions, int n_qubits);

// Row-major flat buffer <-> Eigen matrix.
Mat mat_from_flat(std::span<const cx> flat, int dim);
void mat_to_flat(const Mat& m, std::span<cx> flat);

}  // namespace conecraft
