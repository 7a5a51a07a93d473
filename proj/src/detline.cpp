#include "torsion/detline.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "torsion/error.hpp"

namespace torsion {

namespace {

CMatrix random_matrix(std::mt19937_64& rng, Index rows, Index cols) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  CMatrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = Complex(gauss(rng), gauss(rng));
  return m;
}

// Orthonormal basis of the subspace spanned by the columns of `basis`,
// canonicalized through the orthogonal projector so that it depends only on
// the subspace.
CMatrix canonical_frame(const CMatrix& basis) {
  const Index m = basis.rows();
  const Index b = basis.cols();
  if (b == 0) return CMatrix(m, 0);
  const CMatrix projector = basis * basis.adjoint();
  Eigen::ColPivHouseholderQR<CMatrix> qr(projector);
  CMatrix q = qr.householderQ() * CMatrix::Identity(m, b);
  // Fix the phase of each column: largest-modulus entry real positive.
  for (Index k = 0; k < b; ++k) {
    Index arg_max = 0;
    for (Index i = 1; i < m; ++i) {
      if (std::abs(q(i, k)) > std::abs(q(arg_max, k)) * (1.0 + 1e-12)) arg_max = i;
    }
    const Complex pivot = q(arg_max, k);
    q.col(k) *= std::conj(pivot) / std::abs(pivot);
  }
  return q;
}

RankNullspace checked_rank(const CMatrix& a, double tol, int degree, double scale) {
  RankNullspace r = rank_nullspace(a, tol, scale);
  if (r.ambiguous) {
    std::ostringstream msg;
    msg << "rank of the boundary in degree " << degree
        << " is ambiguous at tolerance " << tol;
    throw NumericalError(msg.str());
  }
  return r;
}

}  // namespace

GradedComplex::GradedComplex(std::vector<int> dims, std::vector<CMatrix> boundaries)
    : dims_(std::move(dims)), boundaries_(std::move(boundaries)) {
  if (dims_.empty()) throw ValidationError("complex needs at least one degree");
  for (int m : dims_) {
    if (m < 0) throw ValidationError("negative dimension in complex");
  }
  if (static_cast<int>(boundaries_.size()) != length()) {
    std::ostringstream msg;
    msg << "complex of length " << length() << " needs " << length() << " boundaries, got "
        << boundaries_.size();
    throw ValidationError(msg.str());
  }
  for (int j = 0; j < length(); ++j) {
    const CMatrix& b = boundaries_[j];
    if (b.rows() != dims_[j + 1] || b.cols() != dims_[j]) {
      std::ostringstream msg;
      msg << "boundary " << j << " has shape " << b.rows() << "x" << b.cols() << ", expected "
          << dims_[j + 1] << "x" << dims_[j];
      throw ValidationError(msg.str());
    }
    require_finite(b, "boundary");
  }
}

GradedComplex GradedComplex::zero(std::vector<int> dims) {
  std::vector<CMatrix> boundaries;
  for (std::size_t j = 0; j + 1 < dims.size(); ++j) {
    boundaries.push_back(CMatrix::Zero(dims[j + 1], dims[j]));
  }
  return GradedComplex(std::move(dims), std::move(boundaries));
}

CMatrix GradedComplex::boundary(int j) const {
  if (j >= 0 && j < length()) return boundaries_[j];
  return CMatrix::Zero(dim(j + 1), dim(j));
}

int GradedComplex::total_dim() const {
  int total = 0;
  for (int m : dims_) total += m;
  return total;
}

int GradedComplex::offset(int j) const {
  int total = 0;
  for (int k = 0; k < j; ++k) total += dims_[k];
  return total;
}

bool GradedComplex::operator==(const GradedComplex& other) const {
  if (dims_ != other.dims_) return false;
  for (std::size_t j = 0; j < boundaries_.size(); ++j) {
    if (boundaries_[j] != other.boundaries_[j]) return false;
  }
  return true;
}

double check_complex(const GradedComplex& c) {
  double worst = 0.0;
  for (int j = 0; j + 1 < c.length(); ++j) {
    const CMatrix& first = c.boundaries()[j];
    const CMatrix& second = c.boundaries()[j + 1];
    const double composed = norm(second * first);
    worst = std::max(worst, composed / (norm(second) * norm(first) + 1.0));
  }
  return worst;
}

void require_complex(const GradedComplex& c, double tol) {
  const double residual = check_complex(c);
  if (residual > tol) {
    std::ostringstream msg;
    msg << "boundaries do not compose to zero (residual " << residual << ")";
    throw ValidationError(msg.str());
  }
}

// Ranks are cut relative to the largest boundary so that a numerically zero
// boundary has rank 0.
double boundary_scale(const GradedComplex& c) {
  double scale = 0.0;
  for (const auto& b : c.boundaries()) {
    if (b.size() > 0) scale = std::max(scale, Eigen::JacobiSVD<CMatrix>(b).singularValues()(0));
  }
  return scale;
}

bool CohomologyData::acyclic() const {
  return std::all_of(betti.begin(), betti.end(), [](int b) { return b == 0; });
}

bool CohomologyData::operator==(const CohomologyData& other) const {
  if (betti != other.betti || representatives.size() != other.representatives.size()) return false;
  for (std::size_t j = 0; j < representatives.size(); ++j) {
    if (representatives[j] != other.representatives[j]) return false;
  }
  return true;
}

CohomologyData cohomology(const GradedComplex& c, double tol, double scale) {
  require_complex(c);
  const int d = c.length();
  if (scale <= 0.0) scale = boundary_scale(c);
  std::vector<RankNullspace> ranks;
  for (int j = 0; j < d; ++j) ranks.push_back(checked_rank(c.boundaries()[j], tol, j, scale));

  CohomologyData out;
  for (int j = 0; j <= d; ++j) {
    const int m = c.dim(j);
    const CMatrix kernel = (j < d) ? ranks[j].kernel : CMatrix(CMatrix::Identity(m, m));
    CMatrix reps = kernel;
    if (j > 0 && ranks[j - 1].rank > 0) {
      const CMatrix overlap = ranks[j - 1].image.adjoint() * kernel;
      reps = kernel * kernel_basis(overlap, 1e-8);
    }
    const int betti = m - (j < d ? ranks[j].rank : 0) - (j > 0 ? ranks[j - 1].rank : 0);
    if (betti != reps.cols()) {
      throw NumericalError("coboundaries are not contained in the cocycles at this tolerance");
    }
    out.betti.push_back(betti);
    out.representatives.push_back(canonical_frame(reps));
    out.coboundaries.push_back(j > 0 ? ranks[j - 1].image : CMatrix(m, 0));
  }
  return out;
}

Frame Frame::standard(const GradedComplex& c) { return Frame{Kind::standard, c.dims(), nullptr}; }

Frame Frame::of(std::shared_ptr<const CohomologyData> h) {
  if (!h) throw ValidationError("cohomology frame without data");
  return Frame{Kind::cohomology, h->betti, std::move(h)};
}

bool Frame::same_as(const Frame& other) const {
  if (kind != other.kind || dims != other.dims) return false;
  if (kind == Kind::standard) return true;
  return cohomology == other.cohomology || *cohomology == *other.cohomology;
}

DetElement::DetElement(Complex value, Frame frame) : value_(value), frame_(std::move(frame)) {
  if (value_ == Complex(0.0) || !std::isfinite(value_.real()) || !std::isfinite(value_.imag())) {
    throw ValidationError("determinant line element must be a finite nonzero coordinate");
  }
}

Complex DetElement::ratio_to(const DetElement& other) const {
  if (!frame_.same_as(other.frame_)) {
    throw ValidationError("determinant line elements refer to different frames");
  }
  return value_ / other.value_;
}

namespace sign_convention {

SignConvention trivial() {
  return [](const ComplexShape&) { return 0L; };
}

SignConvention calibrated() {
  // N = sum_j binom(r_j, 2) + r_mid (d - 1) / 2, r_j = rank d_j and r_mid the
  // rank of the middle boundary (odd d only).
  return [](const ComplexShape& shape) {
    const long d = static_cast<long>(shape.dims.size()) - 1;
    long n = 0;
    for (long j = 1; j <= d; ++j) {
      const long r = shape.coboundary[j];
      n += r * (r - 1) / 2;
    }
    if (d % 2 == 1) n += shape.coboundary[(d + 1) / 2] * ((d - 1) / 2);
    return n;
  };
}

SignConvention standard() { return calibrated(); }

}  // namespace sign_convention

ComplexShape complex_shape(const GradedComplex& complex, double tol, double scale) {
  ComplexShape shape;
  shape.dims = complex.dims();
  const int d = complex.length();
  std::vector<int> ranks(d);
  if (scale <= 0.0) scale = boundary_scale(complex);
  for (int j = 0; j < d; ++j) ranks[j] = checked_rank(complex.boundaries()[j], tol, j, scale).rank;
  for (int j = 0; j <= d; ++j) {
    const int below = j > 0 ? ranks[j - 1] : 0;
    const int above = j < d ? ranks[j] : 0;
    shape.coboundary.push_back(below);
    shape.betti.push_back(complex.dim(j) - below - above);
  }
  return shape;
}

DetElement phi(const GradedComplex& complex, const DetElement& c,
               std::shared_ptr<const CohomologyData> h, const PhiOptions& options) {
  require_complex(complex, options.complex_tol);
  if (!c.frame().same_as(Frame::standard(complex))) {
    throw ValidationError("phi expects an element in the standard frame of the complex");
  }
  if (!h) throw ValidationError("phi needs cohomology data");
  const int d = complex.length();

  const double scale = options.rank_scale > 0.0 ? options.rank_scale : boundary_scale(complex);
  std::vector<RankNullspace> ranks;
  for (int j = 0; j < d; ++j) {
    ranks.push_back(checked_rank(complex.boundaries()[j], options.rank_tol, j, scale));
  }

  ComplexShape shape;
  shape.dims = complex.dims();
  for (int j = 0; j <= d; ++j) {
    const int below = j > 0 ? ranks[j - 1].rank : 0;
    const int above = j < d ? ranks[j].rank : 0;
    shape.coboundary.push_back(below);
    shape.betti.push_back(complex.dim(j) - below - above);
  }
  if (h->betti != shape.betti || static_cast<int>(h->representatives.size()) != d + 1) {
    throw ValidationError("cohomology data does not match the complex (betti numbers differ)");
  }
  for (int j = 0; j <= d; ++j) {
    const CMatrix& reps = h->representatives[j];
    if (reps.rows() != complex.dim(j) || reps.cols() != shape.betti[j]) {
      throw ValidationError("cohomology representatives have the wrong shape");
    }
  }

  // Complements b_j of Ker d_j: the row space, or a random oblique rescaled
  // version of it.
  std::optional<std::mt19937_64> rng;
  if (options.complement_seed) rng.emplace(*options.complement_seed);
  std::vector<CMatrix> lifts(d + 1);
  for (int j = 0; j <= d; ++j) {
    if (j == d) {
      lifts[j] = CMatrix(complex.dim(j), 0);
      continue;
    }
    CMatrix b = ranks[j].coimage;
    if (rng) {
      const Index r = b.cols();
      const CMatrix& kernel = ranks[j].kernel;
      b += kernel * random_matrix(*rng, kernel.cols(), r);
      b = b * (CMatrix::Identity(r, r) + 0.5 * random_matrix(*rng, r, r));
    }
    lifts[j] = b;
  }

  Complex value = c.value();
  for (int j = 0; j <= d; ++j) {
    const int m = complex.dim(j);
    CMatrix a(m, m);
    Index col = 0;
    if (j > 0) {
      const CMatrix image = complex.boundaries()[j - 1] * lifts[j - 1];
      a.middleCols(col, image.cols()) = image;
      col += image.cols();
    }
    a.middleCols(col, h->representatives[j].cols()) = h->representatives[j];
    col += h->representatives[j].cols();
    a.middleCols(col, lifts[j].cols()) = lifts[j];

    if (m > 0) {
      CMatrix normalized = a;
      for (Index k = 0; k < m; ++k) {
        const double n = a.col(k).norm();
        if (n > 0.0) normalized.col(k) /= n;
      }
      const Eigen::VectorXd sigma = Eigen::JacobiSVD<CMatrix>(normalized).singularValues();
      if (sigma(m - 1) < 1e-10) {
        std::ostringstream msg;
        msg << "cohomology representatives in degree " << j
            << " are not independent modulo coboundaries";
        throw ValidationError(msg.str());
      }
    }
    const Complex det_a = det(a);
    value = (j % 2 == 0) ? value / det_a : value * det_a;
  }
  if (options.convention(shape) % 2 != 0) value = -value;
  return DetElement(value, Frame::of(std::move(h)));
}

Complex torsion_acyclic(const GradedComplex& complex, const PhiOptions& options) {
  auto h = std::make_shared<const CohomologyData>(
      cohomology(complex, options.rank_tol, options.rank_scale));
  if (!h->acyclic()) throw ValidationError("complex is not acyclic");
  return phi(complex, DetElement(1.0, Frame::standard(complex)), h, options).value();
}

}  // namespace torsion
