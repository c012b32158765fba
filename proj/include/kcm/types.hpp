#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <string_view>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace kcm {

using cplx = std::complex<double>;

template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXc = Matrix<cplx>;
using VectorXc = Vector<cplx>;

/// Sparse operator over the 2^N spin space or its 4^N doubled extension.
/// Assembly goes through setFromTriplets, which merges duplicate (row, col) pairs.
template <class Scalar>
using Sparse = Eigen::SparseMatrix<Scalar, Eigen::ColMajor, std::int64_t>;

using SparseOperator = Sparse<cplx>;
using SparseReal = Sparse<double>;

/// Computational basis state of an N-site chain.
///
/// Sites are 1-indexed; bit 0 of `bits` is site 1. A set bit is |1> (spin up,
/// the +1 eigenstate of sigma^z). The string form lists site 1 first, so
/// "00010001" has sites 4 and 8 up.
struct BasisState {
  std::uint64_t bits = 0;
  int n_sites = 0;

  [[nodiscard]] int spin(int site) const { return static_cast<int>((bits >> (site - 1)) & 1U); }
  [[nodiscard]] BasisState flipped(int site) const {
    return {bits ^ (std::uint64_t{1} << (site - 1)), n_sites};
  }
  [[nodiscard]] std::size_t index() const { return static_cast<std::size_t>(bits); }
  [[nodiscard]] std::string to_string() const;

  static BasisState from_string(std::string_view s);

  friend bool operator==(const BasisState&, const BasisState&) = default;
  friend auto operator<=>(const BasisState&, const BasisState&) = default;
};

inline std::size_t hilbert_dim(int n_sites) { return std::size_t{1} << n_sites; }

}  // namespace kcm
