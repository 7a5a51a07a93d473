#include "torsion/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "torsion/error.hpp"

namespace torsion {

namespace {

constexpr double kZeroModulus = 1e-10;

CMatrix embed(const OddSignatureModel& m, const std::vector<CMatrix>& per_degree, bool even_only) {
  const GradedComplex& c = m.complex;
  int cols = 0;
  for (int k = 0; k <= c.length(); ++k) {
    if (!even_only || k % 2 == 0) cols += static_cast<int>(per_degree[k].cols());
  }
  CMatrix out = CMatrix::Zero(c.total_dim(), cols);
  int col = 0;
  for (int k = 0; k <= c.length(); ++k) {
    if (even_only && k % 2 != 0) continue;
    const CMatrix& b = per_degree[k];
    out.block(c.offset(k), col, b.rows(), b.cols()) = b;
    col += static_cast<int>(b.cols());
  }
  return out;
}

// Matrix of `op` on the invariant subspace spanned by the columns of p.
CMatrix restrict_to(const CMatrix& op, const CMatrix& p, const char* what) {
  if (p.cols() == 0) return CMatrix(0, 0);
  const CMatrix image = op * p;
  const CMatrix x = solve_least_squares(p, image);
  const double residual = norm(image - p * x);
  if (residual > 1e-8 * (norm(op) * norm(p) + 1.0)) {
    std::ostringstream msg;
    msg << what << " is not invariant under B (residual " << residual << ")";
    throw NumericalError(msg.str());
  }
  return x;
}

struct Moduli {
  std::vector<std::vector<double>> per_degree;
  double max = 0.0;
};

Moduli moduli_of(const OddSignatureModel& m) {
  Moduli out;
  for (int k = 0; k <= m.complex.length(); ++k) {
    std::vector<double> mods;
    for (Complex z : eig(m.b_squared_block(k)).values_with_multiplicity()) {
      mods.push_back(std::abs(z));
      out.max = std::max(out.max, std::abs(z));
    }
    out.per_degree.push_back(std::move(mods));
  }
  for (auto& mods : out.per_degree) {
    for (double& x : mods) {
      if (x <= kZeroModulus * out.max) x = 0.0;
    }
  }
  return out;
}

double effective_modulus(Complex mu, double max) {
  const double a = std::abs(mu);
  return a <= kZeroModulus * max ? 0.0 : a;
}

bool in_cut(double x, const SpectralCut& cut) {
  switch (cut.kind) {
    case SpectralCut::Kind::closed:
      return x <= cut.lambda;
    case SpectralCut::Kind::annulus:
      return x > cut.lambda && x <= cut.mu;
    case SpectralCut::Kind::exterior:
      return x > cut.lambda;
  }
  return false;
}

double cut_gap(const Moduli& moduli, const SpectralCut& cut) {
  std::vector<double> circles{cut.lambda};
  if (cut.kind == SpectralCut::Kind::annulus) circles.push_back(cut.mu);
  double gap = std::numeric_limits<double>::infinity();
  for (const auto& mods : moduli.per_degree) {
    for (double x : mods) {
      for (double r : circles) {
        if (r == 0.0 && x == 0.0) continue;
        gap = std::min(gap, std::abs(x - r));
      }
    }
  }
  return gap;
}

void validate_cut(const SpectralCut& cut) {
  if (!(cut.lambda >= 0.0) || !std::isfinite(cut.lambda)) {
    throw ValidationError("spectral cut needs a finite lambda >= 0");
  }
  if (cut.kind == SpectralCut::Kind::annulus && !(cut.mu > cut.lambda)) {
    throw ValidationError("spectral cut (lambda, mu] needs mu > lambda");
  }
}

struct Restricted {
  CMatrix plus;
  CMatrix minus;  // matrix of -B
};

Restricted restricted_operators(const OddSignatureModel& m, const SpectralCut& cut,
                                double gap_tol) {
  const SpectralSubspace sub = spectral_subspace(m, cut, gap_tol);
  const PlusMinus pm = split_pm(m, cut, sub);
  Restricted out;
  out.plus = restrict_to(m.b, embed(m, pm.plus, true), "plus subspace");
  out.minus = restrict_to(CMatrix(-m.b), embed(m, pm.minus, true), "minus subspace");
  return out;
}

}  // namespace

CMatrix OddSignatureModel::b_squared_block(int k) const {
  const int off = complex.offset(k);
  const int mk = complex.dim(k);
  const CMatrix rows = b.middleRows(off, mk);
  return rows * b.middleCols(off, mk);
}

CMatrix OddSignatureModel::b_block(int k) const {
  return b.middleCols(complex.offset(k), complex.dim(k));
}

OddSignatureModel odd_signature(const GradedComplex& c, const Chirality& g) {
  require_complex(c);
  require_chirality(c, g);
  const int d = c.length();
  const int n = c.total_dim();
  OddSignatureModel m{c, g, CMatrix::Zero(n, n), CMatrix::Zero(n, n), CMatrix(), CMatrix()};
  for (int j = 0; j <= d; ++j) {
    m.gamma.block(c.offset(d - j), c.offset(j), c.dim(d - j), c.dim(j)) = g.block(j);
    if (j < d) {
      m.boundary.block(c.offset(j + 1), c.offset(j), c.dim(j + 1), c.dim(j)) = c.boundaries()[j];
    }
  }
  m.b = m.gamma * m.boundary + m.boundary * m.gamma;

  std::vector<Index> even;
  for (int k = 0; k <= d; k += 2) {
    for (int i = 0; i < c.dim(k); ++i) even.push_back(c.offset(k) + i);
  }
  m.b_even = CMatrix(even.size(), even.size());
  for (std::size_t i = 0; i < even.size(); ++i) {
    for (std::size_t j = 0; j < even.size(); ++j) m.b_even(i, j) = m.b(even[i], even[j]);
  }
  return m;
}

std::vector<double> b_squared_moduli(const OddSignatureModel& m) {
  const Moduli moduli = moduli_of(m);
  std::vector<double> out;
  for (const auto& mods : moduli.per_degree) out.insert(out.end(), mods.begin(), mods.end());
  std::sort(out.begin(), out.end());
  return out;
}

int SpectralSubspace::dimension() const {
  int total = 0;
  for (const auto& b : bases) total += static_cast<int>(b.cols());
  return total;
}

SpectralSubspace spectral_subspace(const OddSignatureModel& m, const SpectralCut& cut,
                                   double gap_tol) {
  validate_cut(cut);
  const Moduli moduli = moduli_of(m);
  SpectralSubspace out;
  out.gap = cut_gap(moduli, cut);
  if (moduli.max > 0.0 && out.gap < gap_tol * moduli.max) {
    std::ostringstream msg;
    msg << "spectral cut at " << cut.lambda << " is within " << out.gap
        << " of an eigenvalue modulus of B^2 (gap tolerance " << gap_tol * moduli.max << ")";
    throw ValidationError(msg.str());
  }
  for (int k = 0; k <= m.complex.length(); ++k) {
    const CMatrix block = m.b_squared_block(k);
    const double max = moduli.max;
    CMatrix basis = invariant_subspace(
        block, [&](Complex mu) { return in_cut(effective_modulus(mu, max), cut); });
    int expected = 0;
    for (double x : moduli.per_degree[k]) expected += in_cut(x, cut) ? 1 : 0;
    if (basis.cols() != expected) {
      throw NumericalError("spectral subspace dimension disagrees with the eigenvalue count");
    }
    out.bases.push_back(std::move(basis));
  }
  return out;
}

PlusMinus split_pm(const OddSignatureModel& m, const SpectralCut& cut,
                   const SpectralSubspace& sub) {
  if (cut.contains_zero()) throw ValidationError("the +/- grading needs a cut excluding 0");
  const GradedComplex& c = m.complex;
  const int d = c.length();
  PlusMinus out;
  for (int k = 0; k <= d; ++k) {
    const CMatrix& v = sub.bases[k];
    const CMatrix dk = c.boundary(k);
    const CMatrix dgamma = c.boundary(d - k) * m.chirality.block(k);
    const CMatrix minus = v * kernel_basis(dk * v, 1e-9 * (norm(dk) + 1e-300));
    const CMatrix plus = v * kernel_basis(dgamma * v, 1e-9 * (norm(dgamma) + 1e-300));
    if (plus.cols() + minus.cols() != v.cols()) {
      std::ostringstream msg;
      msg << "in degree " << k << " the +/- parts have dimensions " << plus.cols() << " and "
          << minus.cols() << " but the spectral subspace has dimension " << v.cols();
      throw NumericalError(msg.str());
    }
    if (v.cols() > 0) {
      CMatrix both(v.rows(), v.cols());
      both << plus, minus;
      const Eigen::VectorXd sigma = Eigen::JacobiSVD<CMatrix>(both).singularValues();
      if (sigma(sigma.size() - 1) < 1e-8) {
        throw NumericalError("the +/- parts of the spectral subspace are not complementary");
      }
    }
    out.plus.push_back(plus);
    out.minus.push_back(minus);
  }
  return out;
}

GradedDeterminant graded_det(const OddSignatureModel& m, const SpectralCut& cut,
                             AgmonAngle theta, double gap_tol) {
  const Restricted ops = restricted_operators(m, cut, gap_tol);
  const ThetaDeterminant plus = det_theta(ops.plus, theta);
  const ThetaDeterminant minus = det_theta(ops.minus, theta);
  GradedDeterminant out;
  out.value = plus.value / minus.value;
  out.log_plus = plus.log_sum;
  out.log_minus = minus.log_sum;
  out.dim_plus = static_cast<int>(ops.plus.rows());
  out.dim_minus = static_cast<int>(ops.minus.rows());
  return out;
}

std::vector<Complex> graded_spectrum(const OddSignatureModel& m, const SpectralCut& cut,
                                     double gap_tol) {
  const Restricted ops = restricted_operators(m, cut, gap_tol);
  std::vector<Complex> out = eig(ops.plus).values_with_multiplicity();
  const std::vector<Complex> minus = eig(ops.minus).values_with_multiplicity();
  out.insert(out.end(), minus.begin(), minus.end());
  return out;
}

DetElement rho_lambda(const OddSignatureModel& m, double lambda, AgmonAngle theta,
                      const PhiOptions& options, double gap_tol) {
  const GradedComplex& c = m.complex;
  const int d = c.length();
  const int r = (d + 1) / 2;
  const double scale = options.rank_scale > 0.0 ? options.rank_scale : boundary_scale(c);
  auto h = std::make_shared<const CohomologyData>(cohomology(c, options.rank_tol, scale));

  const SpectralSubspace small = spectral_subspace(m, SpectralCut::closed_ball(lambda), gap_tol);
  if (small.dimension() == c.total_dim()) {
    return refined_torsion(c, m.chirality, h, options);
  }
  const GradedDeterminant large = graded_det(m, SpectralCut::exterior(lambda), theta, gap_tol);

  // Orthonormal basis of Omega_[0,lambda] in every degree.
  std::vector<CMatrix> w = small.bases;
  std::vector<int> dims(d + 1);
  for (int j = 0; j <= d; ++j) dims[j] = static_cast<int>(w[j].cols());
  std::vector<CMatrix> boundaries;
  for (int j = 0; j < d; ++j) {
    const CMatrix image = c.boundaries()[j] * w[j];
    const CMatrix x = w[j + 1].adjoint() * image;
    if (norm(image - w[j + 1] * x) > 1e-8 * (norm(c.boundaries()[j]) + 1.0)) {
      throw NumericalError("small spectral subspace is not a subcomplex");
    }
    boundaries.push_back(x);
  }
  const GradedComplex sub(dims, boundaries);
  std::vector<CMatrix> lower;
  for (int j = 0; j < r; ++j) lower.push_back(w[d - j].adjoint() * m.chirality.block(j) * w[j]);
  const Chirality sub_gamma = Chirality::from_lower(sub, lower);
  PhiOptions sub_options = options;
  sub_options.rank_scale = scale;
  auto sub_h = std::make_shared<const CohomologyData>(cohomology(sub, options.rank_tol, scale));
  if (sub_h->betti != h->betti) {
    throw NumericalError("small spectral subspace does not carry the cohomology of the complex");
  }
  const DetElement small_rho = refined_torsion(sub, sub_gamma, sub_h, sub_options);

  // Express the subcomplex frame through the frame of the full complex.
  Complex transport(1.0);
  for (int j = 0; j <= d; ++j) {
    const int b = h->betti[j];
    if (b == 0) continue;
    const CMatrix cocycles = w[j] * sub_h->representatives[j];
    const CMatrix& image = h->coboundaries[j];
    CMatrix system(c.dim(j), b + image.cols());
    system << h->representatives[j], image;
    const CMatrix coeffs = solve_least_squares(system, cocycles);
    if (norm(system * coeffs - cocycles) > 1e-8 * (norm(cocycles) + 1.0)) {
      throw NumericalError("cohomology frames of the subcomplex and the complex do not match");
    }
    const Complex t = det(CMatrix(coeffs.topRows(b)));
    transport = (j % 2 == 0) ? transport * t : transport / t;
  }
  return DetElement(large.value * small_rho.value() * transport, Frame::of(h));
}

std::vector<double> admissible_lambdas(const OddSignatureModel& m, double gap_tol) {
  std::vector<double> mods = b_squared_moduli(m);
  const double max = mods.empty() ? 0.0 : mods.back();
  std::vector<double> out;
  if (max == 0.0) {
    out.push_back(1.0);
    return out;
  }
  const double margin = 2.0 * gap_tol * max;
  const auto positive = std::find_if(mods.begin(), mods.end(), [](double x) { return x > 0.0; });
  if (positive == mods.end() || *positive > margin) out.push_back(0.0);
  for (std::size_t i = 0; i + 1 < mods.size(); ++i) {
    if (mods[i] > 0.0 && mods[i + 1] - mods[i] > 2.0 * margin) {
      out.push_back(0.5 * (mods[i] + mods[i + 1]));
    }
  }
  out.push_back(2.0 * max + 1.0);
  return out;
}

std::string EtaData::rational() const {
  std::ostringstream out;
  if (twice_eta % 2 == 0) {
    out << twice_eta / 2;
  } else {
    out << twice_eta << "/2";
  }
  return out.str();
}

EtaData eta_invariant(const CMatrix& d) {
  if (d.rows() != d.cols()) throw ValidationError("eta invariant needs a square matrix");
  EtaData out;
  const double scale = norm(d);
  if (d.rows() == 0) return out;
  if (scale == 0.0) {
    out.m_zero = static_cast<int>(d.rows());
    out.twice_eta = out.m_zero;
    return out;
  }
  const double axis = 1e-9 * scale;
  const Spectrum spectrum = eig(d, 1e-6);
  for (const auto& g : spectrum.groups) {
    const double re = std::abs(g.value.real());
    const double im = std::abs(g.value.imag());
    const auto ambiguous = [axis](double x) { return x > axis / 10.0 && x < axis * 10.0; };
    if (ambiguous(re) || ambiguous(im)) {
      std::ostringstream msg;
      msg << "eigenvalue " << g.value.real() << (g.value.imag() < 0 ? "" : "+") << g.value.imag()
          << "i is too close to an axis to classify";
      throw NumericalError(msg.str());
    }
    const bool on_imaginary = re < axis;
    if (on_imaginary && im < axis) {
      out.m_zero += g.multiplicity;
    } else if (on_imaginary) {
      (g.value.imag() > 0 ? out.m_plus : out.m_minus) += g.multiplicity;
    } else {
      out.eta_zero += g.value.real() > 0 ? g.multiplicity : -g.multiplicity;
    }
  }
  out.twice_eta = out.eta_zero + out.m_plus - out.m_minus + out.m_zero;
  return out;
}

}  // namespace torsion
