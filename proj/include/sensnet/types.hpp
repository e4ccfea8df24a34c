#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sensnet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Column sums of CPTs and sums of distributions must be 1 within this.
inline constexpr double kNormTolerance = 1e-9;
// Entries of a distribution may dip this far below zero from rounding.
inline constexpr double kNegativeSlack = 1e-12;
// Probabilities driven below this by an update are treated as exact zeros.
inline constexpr double kZeroClamp = 1e-12;
// Relative singular-value threshold shared by qr_factor and rank checks.
inline constexpr double kRankTolerance = 1e-10;
// Absolute singular-value floor; sensitivities are O(1) so anything below is
// rounding noise from an exactly independent pair.
inline constexpr double kRankFloor = 1e-13;

struct NodeId {
  std::uint32_t value = 0;

  constexpr NodeId() = default;
  constexpr explicit NodeId(std::size_t v) : value(static_cast<std::uint32_t>(v)) {}

  constexpr std::size_t index() const { return value; }
  constexpr auto operator<=>(const NodeId&) const = default;
};

// Assignment of simple-node labels to state indices.
using Assignment = std::map<std::string, std::size_t>;

struct Variable {
  std::string label;
  std::vector<std::string> states;

  std::size_t cardinality() const { return states.size(); }
  // Index of a state by name; also accepts a decimal index. Throws kUnknownLabel.
  std::size_t state_index(const std::string& name) const;
};

// Probability column over the states of one node.
class Distribution {
 public:
  Distribution() = default;
  // Validates non-negativity and unit sum (within kNormTolerance) and
  // renormalizes once.
  explicit Distribution(Vector probs);

  static Distribution indicator(std::size_t size, std::size_t state);
  static Distribution uniform(std::size_t size);

  const Vector& probs() const { return probs_; }
  std::size_t size() const { return static_cast<std::size_t>(probs_.size()); }
  double operator[](std::size_t i) const { return probs_(static_cast<Eigen::Index>(i)); }

 private:
  Vector probs_;
};

bool is_valid_distribution(const Vector& probs, double tol = kNormTolerance);

// p(X_i | X_j): rows are child states, columns parent states. Columns sum to 1.
class ConditionalMatrix {
 public:
  ConditionalMatrix() = default;
  explicit ConditionalMatrix(Matrix entries);

  const Matrix& entries() const { return entries_; }
  Eigen::Index rows() const { return entries_.rows(); }
  Eigen::Index cols() const { return entries_.cols(); }

 private:
  Matrix entries_;
};

// Observed simple nodes, kept in insertion order.
class Evidence {
 public:
  Evidence() = default;
  Evidence(std::initializer_list<std::pair<std::string, std::size_t>> items);

  // Throws kValidation when the label is already present.
  void set(const std::string& label, std::size_t state);

  const std::vector<std::pair<std::string, std::size_t>>& items() const { return items_; }
  bool empty() const { return items_.empty(); }
  std::size_t size() const { return items_.size(); }
  const std::size_t* find(const std::string& label) const;

 private:
  std::vector<std::pair<std::string, std::size_t>> items_;
};

}  // namespace sensnet
