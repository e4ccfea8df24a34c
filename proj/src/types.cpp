#include "sensnet/types.hpp"

#include <charconv>
#include <cmath>

#include "sensnet/error.hpp"

namespace sensnet {

std::size_t Variable::state_index(const std::string& name) const {
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i] == name) return i;
  }
  std::size_t idx = 0;
  auto [ptr, ec] = std::from_chars(name.data(), name.data() + name.size(), idx);
  if (ec == std::errc() && ptr == name.data() + name.size() && idx < states.size()) {
    return idx;
  }
  throw Error(ErrorKind::kUnknownLabel,
              "node " + label + " has no state '" + name + "'");
}

bool is_valid_distribution(const Vector& probs, double tol) {
  if (probs.size() == 0) return false;
  if (!probs.allFinite()) return false;
  if (probs.minCoeff() < -kNegativeSlack) return false;
  if (probs.maxCoeff() > 1.0 + kNegativeSlack) return false;
  return std::abs(probs.sum() - 1.0) <= tol;
}

Distribution::Distribution(Vector probs) : probs_(std::move(probs)) {
  if (!is_valid_distribution(probs_)) {
    throw Error(ErrorKind::kRange, "not a probability distribution (sum " +
                                       std::to_string(probs_.sum()) + ")");
  }
  probs_ = probs_.cwiseMax(0.0);
  // Leave sums already at 1 up to rounding alone so reloading is bit-exact.
  const double sum = probs_.sum();
  if (std::abs(sum - 1.0) > 1e-15) probs_ /= sum;
}

Distribution Distribution::indicator(std::size_t size, std::size_t state) {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(size));
  v(static_cast<Eigen::Index>(state)) = 1.0;
  return Distribution(std::move(v));
}

Distribution Distribution::uniform(std::size_t size) {
  return Distribution(Vector::Constant(static_cast<Eigen::Index>(size),
                                       1.0 / static_cast<double>(size)));
}

ConditionalMatrix::ConditionalMatrix(Matrix entries) : entries_(std::move(entries)) {
  if (entries_.size() == 0) {
    throw Error(ErrorKind::kDimension, "empty conditional probability matrix");
  }
  for (Eigen::Index q = 0; q < entries_.cols(); ++q) {
    if (!is_valid_distribution(entries_.col(q))) {
      throw Error(ErrorKind::kValidation,
                  "conditional probability column " + std::to_string(q) +
                      " does not sum to 1");
    }
  }
}

Evidence::Evidence(std::initializer_list<std::pair<std::string, std::size_t>> items) {
  for (const auto& [label, state] : items) set(label, state);
}

void Evidence::set(const std::string& label, std::size_t state) {
  if (find(label) != nullptr) {
    throw Error(ErrorKind::kValidation, "evidence for " + label + " given twice");
  }
  items_.emplace_back(label, state);
}

const std::size_t* Evidence::find(const std::string& label) const {
  for (const auto& [l, s] : items_) {
    if (l == label) return &s;
  }
  return nullptr;
}

}  // namespace sensnet
