#include "conecraft/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace conecraft {

Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Mat pauli(int k) {
  Mat m(2, 2);
  switch (k) {
    case 0: m << 1, 0, 0, 1; break;
    case 1: m << 0, 1, 1, 0; break;
    case 2: m << 0, cx(0, -1), cx(0, 1), 0; break;
    case 3: m << 1, 0, 0, -1; break;
    default: fail(ErrorKind::usage, "pauli index must be 0..3");
  }
  return m;
}

Mat matrix_unit(int dim, int i, int j) {
  Mat m = Mat::Zero(dim, dim);
  m(i, j) = 1.0;
  return m;
}

Mat haar_unitary(int dim, Rng& rng) {
  Mat z(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) z(r, c) = rng.next_complex_gaussian();
  Mat q(dim, dim);
  for (int j = 0; j < dim; ++j) {
    Vec v = z.col(j);
    for (int i = 0; i < j; ++i) {
      cx rij = q.col(i).dot(v);  // Eigen dot conjugates the left argument
      v -= rij * q.col(i);
    }
    double nrm = v.norm();
    if (!(nrm > 0.0)) fail(ErrorKind::validation, "degenerate Gaussian draw in haar_unitary");
    q.col(j) = v / nrm;
  }
  return q;
}

Mat random_hermitian(int dim, Rng& rng) {
  Mat a(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) a(r, c) = rng.next_complex_gaussian();
  return 0.5 * (a + a.adjoint());
}

Eigen::VectorXd hermitian_eigenvalues(const Mat& m) {
  Mat h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double op_norm(const Mat& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  Eigen::BDCSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

double trace_norm(const Mat& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0.0;
  Eigen::BDCSVD<Mat> svd(m);
  return svd.singularValues().sum();
}

bool is_hermitian(const Mat& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

Vec vec(const Mat& m) {
  Vec v(m.rows() * m.cols());
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < m.rows(); ++r) v(r + m.rows() * c) = m(r, c);
  return v;
}

Mat unvec(const Vec& v, int rows) {
  if (rows <= 0 || v.size() % rows != 0) fail(ErrorKind::usage, "unvec: size not divisible by rows");
  Mat m(rows, v.size() / rows);
  for (Eigen::Index c = 0; c < m.cols(); ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = v(r + rows * c);
  return m;
}

namespace {

// x's bit i lands on target bit bits[i].
uint64_t deposit(uint64_t x, const std::vector<int>& bits) {
  uint64_t out = 0;
  for (size_t i = 0; i < bits.size(); ++i) out |= ((x >> i) & 1u) << bits[i];
  return out;
}

}  // namespace

Mat partial_trace(const Mat& rho, int n_qubits, const std::vector<int>& traced_positions) {
  const int dim = 1 << n_qubits;
  if (rho.rows() != dim || rho.cols() != dim)
    fail(ErrorKind::usage, "partial_trace: matrix does not match qubit count");
  std::vector<bool> traced(n_qubits, false);
  for (int p : traced_positions) {
    if (p < 0 || p >= n_qubits) fail(ErrorKind::usage, "partial_trace: position out of range");
    if (traced[p]) fail(ErrorKind::usage, "partial_trace: duplicate position");
    traced[p] = true;
  }
  std::vector<int> keep_bits, trace_bits;
  for (int b = 0; b < n_qubits; ++b) {
    // bit b is position n-1-b
    (traced[n_qubits - 1 - b] ? trace_bits : keep_bits).push_back(b);
  }
  const int kd = 1 << keep_bits.size();
  const int td = 1 << trace_bits.size();
  Mat out = Mat::Zero(kd, kd);
  for (int a = 0; a < kd; ++a) {
    for (int b = 0; b < kd; ++b) {
      cx s = 0.0;
      for (int u = 0; u < td; ++u) {
        uint64_t t = deposit(static_cast<uint64_t>(u), trace_bits);
        s += rho(deposit(static_cast<uint64_t>(a), keep_bits) | t,
                 deposit(static_cast<uint64_t>(b), keep_bits) | t);
      }
      out(a, b) = s;
    }
  }
  return out;
}

Mat embed_operator(const Mat& op, const std::vector<int>& positions, int n_qubits) {
  const int k = static_cast<int>(positions.size());
  if (op.rows() != (1 << k) || op.cols() != (1 << k))
    fail(ErrorKind::usage, "embed_operator: operator does not match position count");
  for (int i = 0; i < k; ++i) {
    if (positions[i] < 0 || positions[i] >= n_qubits)
      fail(ErrorKind::usage, "embed_operator: position out of range");
    if (i > 0 && positions[i] <= positions[i - 1])
      fail(ErrorKind::usage, "embed_operator: positions must be strictly ascending");
  }
  // op bit m is op position k-1-m, which sits at full bit n-1-positions[k-1-m].
  std::vector<int> op_bits(k);
  for (int m = 0; m < k; ++m) op_bits[m] = n_qubits - 1 - positions[k - 1 - m];
  std::vector<bool> used(n_qubits, false);
  for (int b : op_bits) used[b] = true;
  std::vector<int> rest_bits;
  for (int b = 0; b < n_qubits; ++b)
    if (!used[b]) rest_bits.push_back(b);
  const int od = 1 << k;
  const int rd = 1 << rest_bits.size();
  Mat out = Mat::Zero(1 << n_qubits, 1 << n_qubits);
  for (int r = 0; r < rd; ++r) {
    uint64_t base = deposit(static_cast<uint64_t>(r), rest_bits);
    for (int i = 0; i < od; ++i)
      for (int j = 0; j < od; ++j)
        out(base | deposit(static_cast<uint64_t>(i), op_bits),
            base | deposit(static_cast<uint64_t>(j), op_bits)) = op(i, j);
  }
  return out;
}

Mat mat_from_flat(std::span<const cx> flat, int dim) {
  if (static_cast<int>(flat.size()) != dim * dim)
    fail(ErrorKind::usage, "mat_from_flat: size mismatch");
  Mat m(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) m(r, c) = flat[static_cast<size_t>(r) * dim + c];
  return m;
}

void mat_to_flat(const Mat& m, std::span<cx> flat) {
  const int dim = static_cast<int>(m.rows());
  if (m.cols() != dim || static_cast<int>(flat.size()) != dim * dim)
    fail(ErrorKind::usage, "mat_to_flat: size mismatch");
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) flat[static_cast<size_t>(r) * dim + c] = m(r, c);
}

}  // namespace conecraft
