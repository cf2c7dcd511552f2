#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "trdsa/errors.hpp"
#include "trdsa/numeric.hpp"

namespace trdsa::combinatorics {

/// The i-th Catalan number (2i)!/((i+1)! i!), built with the exact ratio
/// C_{k+1} = C_k (4k+2)/(k+2).
inline BigCount catalan(std::size_t i) {
  BigCount c(1);
  for (std::size_t k = 0; k < i; ++k) {
    c *= 4 * k + 2;
    c /= k + 2;
  }
  return c;
}

inline BigCount binomial(std::size_t n, std::size_t k) {
  if (k > n) return BigCount(0);
  if (k > n - k) k = n - k;
  BigCount result(1);
  for (std::size_t j = 1; j <= k; ++j) {
    result *= n - k + j;
    result /= j;
  }
  return result;
}

/// Memoized path counts a_{i,m}: the number of lattice walks that start at
/// lag m, take i honest steps (+1) and m+1+i attacker steps (-1), and first
/// reach lag -1 on the last step.
///
/// Filled row by row using a_{i,m} = a_{i,m-1} + a_{i-1,m+1}. Row i is kept
/// for lags up to max_m + (max_i - i) so the lookup into row i-1 at m+1 is
/// always in range. Immutable once constructed.
class CoefficientTable {
 public:
  CoefficientTable(std::size_t max_i, std::size_t max_m) : max_i_(max_i), max_m_(max_m) {
    catalan_.reserve(max_i + 2);
    catalan_.emplace_back(1);
    for (std::size_t k = 0; k <= max_i; ++k) {
      BigCount next = catalan_.back() * (4 * k + 2);
      next /= k + 2;
      catalan_.push_back(std::move(next));
    }

    rows_.resize(max_i + 1);
    rows_[0].assign(row_width(0), BigCount(1));
    for (std::size_t i = 1; i <= max_i; ++i) {
      const std::size_t width = row_width(i);
      const auto& prev = rows_[i - 1];
      auto& row = rows_[i];
      row.reserve(width);
      row.push_back(catalan_[i]);
      if (width > 1) row.push_back(catalan_[i + 1]);
      for (std::size_t m = 2; m < width; ++m) row.push_back(row[m - 1] + prev[m + 1]);
    }
  }

  [[nodiscard]] std::size_t max_i() const { return max_i_; }
  [[nodiscard]] std::size_t max_m() const { return max_m_; }

  [[nodiscard]] bool covers(std::size_t i, std::size_t m) const {
    return i <= max_i_ && m < row_width(i);
  }

  /// a_{i,m}; lags beyond max_m are available for rows below max_i.
  [[nodiscard]] const BigCount& at(std::size_t i, std::size_t m) const {
    if (!covers(i, m)) {
      throw std::out_of_range("coefficient a(" + std::to_string(i) + "," + std::to_string(m) +
                              ") outside table built for i<=" + std::to_string(max_i_) +
                              ", m<=" + std::to_string(max_m_));
    }
    return rows_[i][m];
  }

  /// C_k for k <= max_i + 1.
  [[nodiscard]] const BigCount& catalan(std::size_t k) const { return catalan_.at(k); }

 private:
  [[nodiscard]] std::size_t row_width(std::size_t i) const { return max_m_ + (max_i_ - i) + 1; }

  std::size_t max_i_;
  std::size_t max_m_;
  std::vector<BigCount> catalan_;
  std::vector<std::vector<BigCount>> rows_;
};

/// a_{i,m} through a freshly built table.
inline BigCount coefficient(std::size_t i, std::size_t m) { return CoefficientTable(i, m).at(i, m); }

/// a_{i,m} for i > 1, m > 1 by the literal nested-sum expression
///
///   C_{i+1} + sum_{j1=3}^{m+1} C_i + sum_{j1} sum_{j2=3}^{j1+1} C_{i-1} + ...
///           + sum_{j1} ... sum_{j_{i-2}} C_3
///           + sum_{j1} ... sum_{j_{i-1}=3}^{j_{i-2}+1} (1 + j_{i-1}).
///
/// Exponential in i; only meant as a cross-check for small arguments.
inline BigCount coefficient_reference(std::size_t i, std::size_t m) {
  if (i <= 1 || m <= 1) {
    throw ValidationError("coefficient_reference needs i > 1 and m > 1 (got i=" + std::to_string(i) +
                          ", m=" + std::to_string(m) + ")");
  }
  // Sum of leaf(j_depth) over every index chain j1 in [3, m+1], j_{k+1} in
  // [3, j_k + 1], nested `depth` deep.
  std::function<BigCount(std::size_t, std::size_t, const std::function<BigCount(std::size_t)>&)> nested =
      [&nested](std::size_t depth, std::size_t upper, const std::function<BigCount(std::size_t)>& leaf) {
        BigCount total(0);
        for (std::size_t j = 3; j <= upper; ++j) {
          total += depth == 1 ? leaf(j) : nested(depth - 1, j + 1, leaf);
        }
        return total;
      };

  BigCount total = catalan(i + 1);
  for (std::size_t depth = 1; depth + 2 <= i; ++depth) {
    const BigCount c = catalan(i + 1 - depth);
    total += nested(depth, m + 1, [&c](std::size_t) { return c; });
  }
  total += nested(i - 1, m + 1, [](std::size_t j) { return BigCount(1 + j); });
  return total;
}

/// Partial sum of the Catalan generating function, sum_{i<terms} C_i x^i,
/// accumulated with compensation. Each term is derived from the previous one
/// by the Catalan ratio so no intermediate overflows.
inline double catalan_gf_partial(double x, std::size_t terms) {
  if (!(x >= 0.0 && x <= 0.25)) {
    throw std::domain_error("catalan_gf_partial: x must lie in [0, 1/4]");
  }
  if (terms == 0) throw ValidationError("catalan_gf_partial: terms must be at least 1");
  CompensatedSum sum;
  double term = 1.0;
  for (std::size_t i = 0; i < terms; ++i) {
    sum.add(term);
    term *= x * static_cast<double>(4 * i + 2) / static_cast<double>(i + 2);
  }
  return sum.value();
}

}  // namespace trdsa::combinatorics
