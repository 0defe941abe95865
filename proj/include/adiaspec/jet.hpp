#pragma once

#include <cmath>
#include <vector>

namespace adiaspec {

// Truncated Taylor series c_0 + c_1 t + ... + c_K t^K around a point.
// The k-th derivative at that point is k! c_k.
class Jet {
 public:
  explicit Jet(int order, double value = 0.0) : c_(order + 1, 0.0) { c_[0] = value; }
  static Jet variable(int order, double at) {
    Jet j(order, at);
    if (order >= 1) j.c_[1] = 1.0;
    return j;
  }

  int order() const { return static_cast<int>(c_.size()) - 1; }
  double coeff(int k) const { return c_[k]; }
  double& coeff(int k) { return c_[k]; }
  double derivative(int k) const {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) f *= i;
    return f * c_[k];
  }

  friend Jet operator+(Jet a, const Jet& b) {
    for (int k = 0; k <= a.order(); ++k) a.c_[k] += b.c_[k];
    return a;
  }
  friend Jet operator-(Jet a, const Jet& b) {
    for (int k = 0; k <= a.order(); ++k) a.c_[k] -= b.c_[k];
    return a;
  }
  friend Jet operator*(double s, Jet a) {
    for (double& c : a.c_) c *= s;
    return a;
  }
  friend Jet operator+(double s, Jet a) {
    a.c_[0] += s;
    return a;
  }
  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r(a.order());
    for (int k = 0; k <= a.order(); ++k)
      for (int i = 0; i <= k; ++i) r.c_[k] += a.c_[i] * b.c_[k - i];
    return r;
  }
  Jet operator-() const { return -1.0 * *this; }

  friend Jet reciprocal(const Jet& a) {
    Jet r(a.order());
    r.c_[0] = 1.0 / a.c_[0];
    for (int k = 1; k <= a.order(); ++k) {
      double s = 0;
      for (int i = 1; i <= k; ++i) s += a.c_[i] * r.c_[k - i];
      r.c_[k] = -s / a.c_[0];
    }
    return r;
  }

  // e^a via k r_k = sum_i i a_i r_{k-i}
  friend Jet exp(const Jet& a) {
    Jet r(a.order());
    r.c_[0] = std::exp(a.c_[0]);
    for (int k = 1; k <= a.order(); ++k) {
      double s = 0;
      for (int i = 1; i <= k; ++i) s += i * a.c_[i] * r.c_[k - i];
      r.c_[k] = s / k;
    }
    return r;
  }

  // sin and cos together, same recurrence
  friend void sincos(const Jet& a, Jet& s, Jet& c) {
    s = Jet(a.order());
    c = Jet(a.order());
    s.c_[0] = std::sin(a.c_[0]);
    c.c_[0] = std::cos(a.c_[0]);
    for (int k = 1; k <= a.order(); ++k) {
      double ss = 0, cc = 0;
      for (int i = 1; i <= k; ++i) {
        ss += i * a.c_[i] * c.c_[k - i];
        cc -= i * a.c_[i] * s.c_[k - i];
      }
      s.c_[k] = ss / k;
      c.c_[k] = cc / k;
    }
  }

 private:
  std::vector<double> c_;
};

}  // namespace adiaspec
