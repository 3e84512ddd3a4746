#pragma once

#include <span>
#include <utility>
#include <vector>

namespace pcq {

/// Sparse linear combination of global degrees of freedom, kept sorted by
/// index. Weights below kPruneTolerance in magnitude are dropped.
class LinearForm {
 public:
  static constexpr double kPruneTolerance = 1e-14;
  using Term = std::pair<int, double>;

  LinearForm() = default;
  static LinearForm unit(int index, double weight = 1.0);

  const std::vector<Term>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  double apply(std::span<const double> x) const;
  double max_abs() const;

  friend LinearForm operator+(const LinearForm& a, const LinearForm& b);
  friend LinearForm operator-(const LinearForm& a, const LinearForm& b);
  friend LinearForm operator*(double s, const LinearForm& a);
  friend LinearForm operator*(const LinearForm& a, double s) { return s * a; }
  friend LinearForm operator/(const LinearForm& a, double s) { return (1.0 / s) * a; }
  LinearForm& operator+=(const LinearForm& b) { return *this = *this + b; }
  LinearForm& operator-=(const LinearForm& b) { return *this = *this - b; }

 private:
  static LinearForm combine(const LinearForm& a, double sa, const LinearForm& b, double sb);
  std::vector<Term> terms_;
};

/// Largest weight magnitude of a - b.
double difference(const LinearForm& a, const LinearForm& b);

}  // namespace pcq
