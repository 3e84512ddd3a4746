#include "pcq/linear_form.hpp"

#include <algorithm>
#include <cmath>

namespace pcq {

LinearForm LinearForm::unit(int index, double weight) {
  LinearForm f;
  if (std::abs(weight) >= kPruneTolerance) f.terms_.emplace_back(index, weight);
  return f;
}

double LinearForm::apply(std::span<const double> x) const {
  double s = 0;
  for (const auto& [i, w] : terms_) s += w * x[static_cast<std::size_t>(i)];
  return s;
}

double LinearForm::max_abs() const {
  double m = 0;
  for (const auto& t : terms_) m = std::max(m, std::abs(t.second));
  return m;
}

LinearForm LinearForm::combine(const LinearForm& a, double sa, const LinearForm& b, double sb) {
  LinearForm r;
  r.terms_.reserve(a.terms_.size() + b.terms_.size());
  auto ia = a.terms_.begin(), ib = b.terms_.begin();
  auto push = [&](int idx, double w) {
    if (std::abs(w) >= kPruneTolerance) r.terms_.emplace_back(idx, w);
  };
  while (ia != a.terms_.end() || ib != b.terms_.end()) {
    if (ib == b.terms_.end() || (ia != a.terms_.end() && ia->first < ib->first)) {
      push(ia->first, sa * ia->second);
      ++ia;
    } else if (ia == a.terms_.end() || ib->first < ia->first) {
      push(ib->first, sb * ib->second);
      ++ib;
    } else {
      push(ia->first, sa * ia->second + sb * ib->second);
      ++ia;
      ++ib;
    }
  }
  return r;
}

LinearForm operator+(const LinearForm& a, const LinearForm& b) {
  return LinearForm::combine(a, 1.0, b, 1.0);
}

LinearForm operator-(const LinearForm& a, const LinearForm& b) {
  return LinearForm::combine(a, 1.0, b, -1.0);
}

LinearForm operator*(double s, const LinearForm& a) {
  LinearForm r;
  return LinearForm::combine(a, s, r, 0.0);
}

double difference(const LinearForm& a, const LinearForm& b) {
  double m = 0;
  auto ia = a.terms().begin(), ib = b.terms().begin();
  while (ia != a.terms().end() || ib != b.terms().end()) {
    if (ib == b.terms().end() || (ia != a.terms().end() && ia->first < ib->first)) {
      m = std::max(m, std::abs(ia->second));
      ++ia;
    } else if (ia == a.terms().end() || ib->first < ia->first) {
      m = std::max(m, std::abs(ib->second));
      ++ib;
    } else {
      m = std::max(m, std::abs(ia->second - ib->second));
      ++ia;
      ++ib;
    }
  }
  return m;
}

}  // namespace pcq
