#include "torsion/refined.hpp"

#include <sstream>

#include "torsion/error.hpp"

namespace torsion {

namespace {

void require_odd(const GradedComplex& c) {
  if (c.length() % 2 == 0) {
    throw ValidationError("chirality needs a complex of odd length");
  }
}

}  // namespace

Chirality::Chirality(std::vector<CMatrix> blocks) : blocks_(std::move(blocks)) {
  for (const auto& b : blocks_) require_finite(b, "chirality block");
}

Chirality Chirality::from_lower(const GradedComplex& c, const std::vector<CMatrix>& lower) {
  require_odd(c);
  const int d = c.length();
  const int r = (d + 1) / 2;
  if (static_cast<int>(lower.size()) != r) {
    std::ostringstream msg;
    msg << "chirality needs " << r << " blocks (degrees 0.." << r - 1 << "), got " << lower.size();
    throw ValidationError(msg.str());
  }
  std::vector<CMatrix> blocks(d + 1);
  for (int j = 0; j < r; ++j) {
    const CMatrix& g = lower[j];
    if (c.dim(j) != c.dim(d - j) || g.rows() != c.dim(d - j) || g.cols() != c.dim(j)) {
      throw ValidationError("chirality block has the wrong shape");
    }
    require_finite(g, "chirality block");
    Eigen::FullPivLU<CMatrix> lu(g);
    if (g.rows() > 0 && !lu.isInvertible()) {
      throw ValidationError("chirality block is singular");
    }
    blocks[j] = g;
    blocks[d - j] = g.rows() > 0 ? CMatrix(lu.inverse()) : g;
  }
  return Chirality(std::move(blocks));
}

std::vector<CMatrix> Chirality::lower() const {
  const int r = (length() + 1) / 2;
  return {blocks_.begin(), blocks_.begin() + r};
}

bool Chirality::operator==(const Chirality& other) const {
  if (blocks_.size() != other.blocks_.size()) return false;
  for (std::size_t j = 0; j < blocks_.size(); ++j) {
    if (blocks_[j] != other.blocks_[j]) return false;
  }
  return true;
}

double check_chirality(const GradedComplex& c, const Chirality& g) {
  require_odd(c);
  const int d = c.length();
  if (g.length() != d) throw ValidationError("chirality length does not match the complex");
  for (int j = 0; j <= d; ++j) {
    if (c.dim(j) != c.dim(d - j)) {
      throw ValidationError("chirality needs m_j = m_{d-j}");
    }
    const CMatrix& b = g.block(j);
    if (b.rows() != c.dim(d - j) || b.cols() != c.dim(j)) {
      throw ValidationError("chirality block has the wrong shape");
    }
  }
  double worst = 0.0;
  for (int j = 0; j <= d; ++j) {
    const int m = c.dim(j);
    const CMatrix square = g.block(d - j) * g.block(j) - CMatrix::Identity(m, m);
    worst = std::max(worst, norm(square));
  }
  return worst;
}

void require_chirality(const GradedComplex& c, const Chirality& g, double tol) {
  const double residual = check_chirality(c, g);
  if (residual > tol) {
    std::ostringstream msg;
    msg << "chirality is not an involution (residual " << residual << ")";
    throw ValidationError(msg.str());
  }
}

long r_sign(const std::vector<int>& dims) {
  const int d = static_cast<int>(dims.size()) - 1;
  if (d < 1 || d % 2 == 0) throw ValidationError("R(C) needs a complex of odd length");
  const int r = (d + 1) / 2;
  long twice = 0;
  for (int j = 0; j < r; ++j) {
    const long m = dims[j];
    twice += m * (m + (((r + j) % 2 == 0) ? 1 : -1));
  }
  if (twice % 2 != 0) throw NumericalError("R(C) is not an integer");
  return twice / 2;
}

DetElement c_gamma(const GradedComplex& c, const Chirality& g, const std::vector<CMatrix>& bases) {
  require_chirality(c, g);
  const int d = c.length();
  const int r = (d + 1) / 2;
  if (!bases.empty() && static_cast<int>(bases.size()) != r) {
    throw ValidationError("c_gamma needs one basis per degree below the middle");
  }
  Complex value(1.0);
  for (int j = 0; j < r; ++j) {
    const int m = c.dim(j);
    const CMatrix basis = bases.empty() ? CMatrix(CMatrix::Identity(m, m)) : bases[j];
    if (basis.rows() != m || basis.cols() != m) {
      throw ValidationError("c_gamma basis has the wrong shape");
    }
    const Complex x = det(basis);
    if (std::abs(x) == 0.0) throw ValidationError("c_gamma basis is singular");
    // c_j carries exponent (-1)^j, Gamma c_j sits in degree d-j with (-1)^{d-j}.
    const Complex image = det(CMatrix(g.block(j) * basis));
    if (j % 2 == 0) {
      value *= x / image;
    } else {
      value *= image / x;
    }
  }
  if (r_sign(c) % 2 != 0) value = -value;
  return DetElement(value, Frame::standard(c));
}

DetElement c_gamma_scalar(const GradedComplex& c, const Chirality& g,
                          const std::vector<Complex>& parts) {
  const int r = (c.length() + 1) / 2;
  if (static_cast<int>(parts.size()) != r) {
    throw ValidationError("c_gamma needs one coordinate per degree below the middle");
  }
  std::vector<CMatrix> bases;
  for (int j = 0; j < r; ++j) {
    if (parts[j] == Complex(0.0)) throw ValidationError("c_gamma coordinate is zero");
    CMatrix b = CMatrix::Identity(c.dim(j), c.dim(j));
    if (c.dim(j) > 0) b(0, 0) = parts[j];
    bases.push_back(b);
  }
  return c_gamma(c, g, bases);
}

DetElement refined_torsion(const GradedComplex& c, const Chirality& g,
                           std::shared_ptr<const CohomologyData> h, const PhiOptions& options) {
  if (!h) {
    h = std::make_shared<const CohomologyData>(cohomology(c, options.rank_tol, options.rank_scale));
  }
  return phi(c, c_gamma(c, g), std::move(h), options);
}

}  // namespace torsion
