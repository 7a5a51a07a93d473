#pragma once

#include <cmath>
#include <complex>

#include "oracles.hpp"
#include "torsion/detline.hpp"

namespace testing_support {

inline oracle::Mat to_oracle(const torsion::CMatrix& a) {
  oracle::Mat m = oracle::zeros(a.rows(), a.cols());
  for (torsion::Index i = 0; i < a.rows(); ++i)
    for (torsion::Index j = 0; j < a.cols(); ++j) m[i][j] = oracle::Cx(a(i, j).real(), a(i, j).imag());
  return m;
}

inline oracle::Complex_ to_oracle(const torsion::GradedComplex& c) {
  oracle::Complex_ out;
  out.dims = c.dims();
  for (const auto& b : c.boundaries()) out.boundaries.push_back(to_oracle(b));
  return out;
}

inline std::complex<double> narrow(oracle::Cx z) {
  return {static_cast<double>(z.real()), static_cast<double>(z.imag())};
}

inline double rel(std::complex<double> a, std::complex<double> b) {
  const double s = std::max({std::abs(a), std::abs(b), 1e-300});
  return std::abs(a - b) / s;
}

inline torsion::CMatrix mat(std::initializer_list<std::initializer_list<std::complex<double>>> rows) {
  const auto r = static_cast<torsion::Index>(rows.size());
  const auto c = r == 0 ? 0 : static_cast<torsion::Index>(rows.begin()->size());
  torsion::CMatrix m(r, c);
  torsion::Index i = 0;
  for (const auto& row : rows) {
    torsion::Index j = 0;
    for (const auto& x : row) m(i, j++) = x;
    ++i;
  }
  return m;
}

}  // namespace testing_support
