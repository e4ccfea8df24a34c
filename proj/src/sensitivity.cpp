#include "sensnet/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sensnet/error.hpp"

namespace sensnet {

namespace {

double rank_threshold(const Eigen::VectorXd& singular_values, double tol) {
  const double top = singular_values.size() > 0 ? singular_values(0) : 0.0;
  return std::max(tol * top, kRankFloor);
}

std::size_t count_above(const Eigen::VectorXd& sv, double threshold) {
  std::size_t r = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k) {
    if (sv(k) > threshold) ++r;
  }
  return r;
}

void check_same_size(const Matrix& s, const Distribution& p_i, const Distribution& p_j) {
  if (static_cast<std::size_t>(s.rows()) != p_i.size() ||
      static_cast<std::size_t>(s.cols()) != p_j.size()) {
    std::ostringstream os;
    os << "sensitivity is " << s.rows() << "x" << s.cols() << " but distributions have "
       << p_i.size() << " and " << p_j.size() << " states";
    throw Error(ErrorKind::kDimension, os.str());
  }
}

}  // namespace

Matrix QRFactors::dense() const { return q.transpose() * r; }

QRFactors QRFactors::zero(Eigen::Index child_states, Eigen::Index parent_states) {
  return QRFactors{Matrix(0, child_states), Matrix(0, parent_states)};
}

Matrix centering(Eigen::Index n) {
  return Matrix::Identity(n, n) - Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
}

Matrix cpt_to_sensitivity(const ConditionalMatrix& p) {
  const Matrix& e = p.entries();
  // P (I - E/n) subtracts each row's mean.
  Matrix s = e;
  s.colwise() -= e.rowwise().mean();
  return s;
}

std::size_t numerical_rank(const Matrix& m, double tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return count_above(svd.singularValues(), rank_threshold(svd.singularValues(), tol));
}

QRFactors qr_factor(const Matrix& s, double tol) {
  const std::size_t r = numerical_rank(s, tol);
  if (r == 0) return QRFactors::zero(s.rows(), s.cols());
  Eigen::ColPivHouseholderQR<Matrix> qr(s);
  const auto rr = static_cast<Eigen::Index>(r);
  Matrix qh = qr.householderQ() * Matrix::Identity(s.rows(), rr);
  Matrix rh = qr.matrixR().topRows(rr).triangularView<Eigen::Upper>();
  QRFactors out;
  out.q = qh.transpose();
  out.r = rh * qr.colsPermutation().transpose();
  return out;
}

QRFactors retruncate(const Matrix& q, const Matrix& r, double tol) {
  const Eigen::Index m = q.cols();
  const Eigen::Index n = r.cols();
  if (q.rows() == 0) return QRFactors::zero(m, n);
  // q^T = U T with U orthonormal, so q^T r = U (T r) and T r carries the spectrum.
  Eigen::HouseholderQR<Matrix> thin(q.transpose());
  const Eigen::Index k = std::min(q.rows(), m);
  Matrix u = thin.householderQ() * Matrix::Identity(m, k);
  Matrix t = thin.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  Matrix core = t * r;
  QRFactors inner = qr_factor(core, tol);
  if (inner.rank() == 0) return QRFactors::zero(m, n);
  QRFactors out;
  out.q = inner.q * u.transpose();
  out.r = std::move(inner.r);
  return out;
}

bool sensitivity_rank_law_check(const ConditionalMatrix& p, double tol) {
  const std::size_t rank_p = numerical_rank(p.entries(), tol);
  const std::size_t rank_s = numerical_rank(cpt_to_sensitivity(p), tol);
  return rank_p >= 1 && rank_s == rank_p - 1;
}

QRFactors reduce(const QRFactors& s_ij, const QRFactors& s_jk, double tol) {
  if (s_ij.parent_states() != s_jk.child_states()) {
    std::ostringstream os;
    os << "cannot chain sensitivities: inner dimensions " << s_ij.parent_states() << " and "
       << s_jk.child_states();
    throw Error(ErrorKind::kDimension, os.str());
  }
  if (s_ij.rank() == 0 || s_jk.rank() == 0) {
    return QRFactors::zero(s_ij.child_states(), s_jk.parent_states());
  }
  Matrix r = (s_ij.r * s_jk.q.transpose()) * s_jk.r;
  return retruncate(s_ij.q, r, tol);
}

Matrix weight_covariance(const Vector& p) {
  Matrix a = -p * p.transpose();
  a.diagonal() += p;
  return a;
}

Matrix reverse_r(const Matrix& q_ij, const Vector& p_i, bool allow_zero_states) {
  Vector inv(p_i.size());
  for (Eigen::Index k = 0; k < p_i.size(); ++k) {
    if (p_i(k) > 0.0) {
      inv(k) = 1.0 / p_i(k);
    } else if (allow_zero_states) {
      inv(k) = 0.0;
    } else {
      throw Error(ErrorKind::kSingularWeight,
                  "state " + std::to_string(k) +
                      " has zero probability; prune it before reversing");
    }
  }
  Matrix scaled = q_ij * inv.asDiagonal();
  // Right-multiplying by I - E/n subtracts each row's mean.
  scaled.colwise() -= scaled.rowwise().mean();
  return scaled;
}

QRFactors reverse(const QRFactors& s_ij, const Distribution& p_i, const Distribution& p_j) {
  if (static_cast<std::size_t>(s_ij.child_states()) != p_i.size() ||
      static_cast<std::size_t>(s_ij.parent_states()) != p_j.size()) {
    throw Error(ErrorKind::kDimension, "factor dimensions do not match the distributions");
  }
  QRFactors out;
  out.r = reverse_r(s_ij.q, p_i.probs());
  out.q = s_ij.r * weight_covariance(p_j.probs());
  return out;
}

Matrix reverse_dense(const Matrix& s_ij, const Distribution& p_i, const Distribution& p_j) {
  check_same_size(s_ij, p_i, p_j);
  return weight_covariance(p_j.probs()) * reverse_r(s_ij.transpose(), p_i.probs());
}

ConditionalMatrix sensitivity_to_cpt(const Matrix& s_ij, const Distribution& p_i,
                                     const Distribution& p_j) {
  check_same_size(s_ij, p_i, p_j);
  Vector shift = p_i.probs() - s_ij * p_j.probs();
  Matrix cpt = s_ij;
  cpt.colwise() += shift;
  for (Eigen::Index a = 0; a < cpt.rows(); ++a) {
    for (Eigen::Index b = 0; b < cpt.cols(); ++b) {
      const double v = cpt(a, b);
      if (!(v >= -kNormTolerance && v <= 1.0 + kNormTolerance)) {
        std::ostringstream os;
        os << "reconstructed conditional probability " << v << " at (" << a << "," << b
           << ") is out of range; sensitivity and marginals are inconsistent";
        throw Error(ErrorKind::kRange, os.str());
      }
    }
  }
  cpt = cpt.cwiseMax(0.0);
  for (Eigen::Index b = 0; b < cpt.cols(); ++b) cpt.col(b) /= cpt.col(b).sum();
  return ConditionalMatrix(std::move(cpt));
}

ConditionalMatrix sensitivity_to_cpt(const QRFactors& s_ij, const Distribution& p_i,
                                     const Distribution& p_j) {
  return sensitivity_to_cpt(s_ij.dense(), p_i, p_j);
}

Vector apply_update(const QRFactors& s_ij, const Vector& delta_pj) {
  if (delta_pj.size() != s_ij.parent_states()) {
    throw Error(ErrorKind::kDimension, "change vector length does not match the parent");
  }
  if (std::abs(delta_pj.sum()) > kNormTolerance) {
    throw Error(ErrorKind::kValidation, "change vector does not sum to zero");
  }
  if (s_ij.rank() == 0) return Vector::Zero(s_ij.child_states());
  return s_ij.q.transpose() * (s_ij.r * delta_pj);
}

bool BinarySensitivity::deterministic() const { return std::abs(value) >= 1.0 - 1e-12; }

BinaryOpCount& binary_op_count() {
  thread_local BinaryOpCount count;
  return count;
}

BinarySensitivity binary_sensitivity(const ConditionalMatrix& p) {
  if (p.rows() != 2 || p.cols() != 2) {
    throw Error(ErrorKind::kDimension, "binary sensitivity needs a 2x2 table");
  }
  // State 1 is "true": s = p(i|j) - p(i|not j).
  return BinarySensitivity{p.entries()(1, 1) - p.entries()(1, 0)};
}

BinarySensitivity binary_reduce(BinarySensitivity a, BinarySensitivity b) {
  ++binary_op_count().multiplications;
  return BinarySensitivity{a.value * b.value};
}

BinarySensitivity binary_reverse(BinarySensitivity s, const Distribution& p_i,
                                 const Distribution& p_j) {
  if (p_i.size() != 2 || p_j.size() != 2) {
    throw Error(ErrorKind::kDimension, "binary reverse needs binary distributions");
  }
  auto& ops = binary_op_count();
  const double wi = p_i[0] * p_i[1];
  if (!(wi > 0.0)) {
    throw Error(ErrorKind::kSingularWeight, "p(not i) p(i) is zero");
  }
  const double wj = p_j[0] * p_j[1];
  ops.multiplications += 3;
  ops.divisions += 1;
  return BinarySensitivity{wj / wi * s.value};
}

double binary_update(double p0_i, BinarySensitivity s, double delta_pj) {
  auto& ops = binary_op_count();
  ops.multiplications += 1;
  ops.additions += 1;
  const double p1 = p0_i + s.value * delta_pj;
  if (!(p1 >= -kNormTolerance && p1 <= 1.0 + kNormTolerance)) {
    throw Error(ErrorKind::kRange, "binary update left [0, 1]: " + std::to_string(p1));
  }
  return p1;
}

Matrix binary_dense(BinarySensitivity s) { return s.value * centering(2); }

BinarySensitivity binary_value(const Matrix& s) {
  if (s.rows() != 2 || s.cols() != 2) {
    throw Error(ErrorKind::kDimension, "binary sensitivity needs a 2x2 matrix");
  }
  return BinarySensitivity{s(1, 1) - s(1, 0)};
}

}  // namespace sensnet
