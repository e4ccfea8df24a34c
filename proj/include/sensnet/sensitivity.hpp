#pragma once

#include <cstdint>

#include "sensnet/types.hpp"

namespace sensnet {

// Low-rank form of a sensitivity S = q^T r, q: rank x |X_i|, r: rank x |X_j|.
// A rank-0 factor pair keeps its outer dimensions (0 x |X_i|, 0 x |X_j|).
struct QRFactors {
  Matrix q;
  Matrix r;

  std::size_t rank() const { return static_cast<std::size_t>(q.rows()); }
  Eigen::Index child_states() const { return q.cols(); }
  Eigen::Index parent_states() const { return r.cols(); }
  Matrix dense() const;

  static QRFactors zero(Eigen::Index child_states, Eigen::Index parent_states);
};

// I - E/n.
Matrix centering(Eigen::Index n);

// S = P (I - E/|X_j|).
Matrix cpt_to_sensitivity(const ConditionalMatrix& p);

// Singular values below max(tol * sigma_max, kRankFloor) count as zero.
std::size_t numerical_rank(const Matrix& m, double tol = kRankTolerance);

QRFactors qr_factor(const Matrix& s, double tol = kRankTolerance);

// Re-factors q^T r into orthonormal-row form, dropping dependent directions.
QRFactors retruncate(const Matrix& q, const Matrix& r, double tol = kRankTolerance);

bool sensitivity_rank_law_check(const ConditionalMatrix& p, double tol = kRankTolerance);

// S_ik = S_ij S_jk.
QRFactors reduce(const QRFactors& s_ij, const QRFactors& s_jk, double tol = kRankTolerance);

// S_ji from S_ij. Throws kSingularWeight if p_i has a zero entry.
QRFactors reverse(const QRFactors& s_ij, const Distribution& p_i, const Distribution& p_j);
Matrix reverse_dense(const Matrix& s_ij, const Distribution& p_i, const Distribution& p_j);

// Lambda - P P^T.
Matrix weight_covariance(const Vector& p);

// q Lambda^-1 (I - E/n): the R factor of the reversed edge. With
// allow_zero_states, states with p = 0 use a zero weight instead of throwing.
Matrix reverse_r(const Matrix& q_ij, const Vector& p_i, bool allow_zero_states = false);

// p(i|j) = S + P_i 1^T - (S P_j) 1^T. Throws kRange on an entry outside
// [-1e-9, 1+1e-9].
ConditionalMatrix sensitivity_to_cpt(const Matrix& s_ij, const Distribution& p_i,
                                     const Distribution& p_j);
ConditionalMatrix sensitivity_to_cpt(const QRFactors& s_ij, const Distribution& p_i,
                                     const Distribution& p_j);

// dP_i = q^T (r dP_j).
Vector apply_update(const QRFactors& s_ij, const Vector& delta_pj);

struct BinarySensitivity {
  double value = 0.0;

  bool deterministic() const;
};

// Arithmetic done by the binary fast paths on the calling thread.
struct BinaryOpCount {
  std::uint64_t multiplications = 0;
  std::uint64_t divisions = 0;
  std::uint64_t additions = 0;
};
BinaryOpCount& binary_op_count();

BinarySensitivity binary_sensitivity(const ConditionalMatrix& p);
BinarySensitivity binary_reduce(BinarySensitivity a, BinarySensitivity b);
BinarySensitivity binary_reverse(BinarySensitivity s, const Distribution& p_i,
                                 const Distribution& p_j);
// Throws kRange when the result leaves [-1e-9, 1+1e-9].
double binary_update(double p0_i, BinarySensitivity s, double delta_pj);
// s (I - E/2).
Matrix binary_dense(BinarySensitivity s);
// Scalar of a 2x2 sensitivity: S(1,1) - S(1,0).
BinarySensitivity binary_value(const Matrix& s);

}  // namespace sensnet
