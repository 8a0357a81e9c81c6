#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "kite/errors.hpp"

namespace kite {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
// Banks store one candidate per row; row-major keeps each candidate contiguous.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using VectorRef = Eigen::Ref<const Vector>;

/// Immutable pool of candidate vectors (one per row) with optional string ids.
class EmbeddingBank {
 public:
  EmbeddingBank() = default;

  explicit EmbeddingBank(RowMatrix vectors, std::vector<std::string> ids = {},
                         std::string source_path = {})
      : vectors_(std::move(vectors)), ids_(std::move(ids)), source_(std::move(source_path)) {
    detail::require(vectors_.rows() >= 1, "embedding bank must contain at least one row");
    detail::require(vectors_.cols() >= 1, "embedding bank rows must have dimension >= 1");
    detail::require(vectors_.allFinite(), "embedding bank contains non-finite values");
    if (ids_.empty()) {
      ids_.reserve(static_cast<std::size_t>(vectors_.rows()));
      for (Eigen::Index i = 0; i < vectors_.rows(); ++i) ids_.push_back(std::to_string(i));
    }
    detail::require(ids_.size() == static_cast<std::size_t>(vectors_.rows()),
                    "id count does not match row count");
  }

  std::size_t size() const { return static_cast<std::size_t>(vectors_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(vectors_.cols()); }

  auto row(std::size_t i) const { return vectors_.row(static_cast<Eigen::Index>(i)).transpose(); }

  const RowMatrix& vectors() const { return vectors_; }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::string& source_path() const { return source_; }

 private:
  RowMatrix vectors_;
  std::vector<std::string> ids_;
  std::string source_;
};

namespace detail {

inline void require_dim(Eigen::Index got, Eigen::Index want, const char* what) {
  if (got != want) {
    throw InvalidArgument(std::string(what) + ": dimension mismatch (got " + std::to_string(got) +
                          ", expected " + std::to_string(want) + ")");
  }
}

}  // namespace detail
}  // namespace kite
