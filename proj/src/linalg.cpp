#include "torsion/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "torsion/error.hpp"

namespace torsion {

namespace {

// Swap the adjacent diagonal entries k, k+1 of the upper triangular T,
// updating the unitary U so that A = U T U^* still holds.
void swap_schur_pair(CMatrix& t, CMatrix& u, Index k) {
  Eigen::JacobiRotation<Complex> rotation;
  rotation.makeGivens(t(k, k + 1), t(k + 1, k + 1) - t(k, k));
  t.applyOnTheLeft(k, k + 1, rotation.adjoint());
  t.applyOnTheRight(k, k + 1, rotation);
  u.applyOnTheRight(k, k + 1, rotation);
  t(k + 1, k) = Complex(0.0);
}

// Moves the flagged diagonal entries to the leading block; returns its size.
Index reorder_schur(CMatrix& t, CMatrix& u, std::vector<bool> flags) {
  const Index n = t.rows();
  Index front = 0;
  for (Index i = 0; i < n; ++i) {
    if (!flags[i]) continue;
    for (Index k = i; k > front; --k) {
      swap_schur_pair(t, u, k - 1);
      std::swap(flags[k - 1], flags[k]);
    }
    ++front;
  }
  return front;
}

struct SchurData {
  CMatrix t;
  CMatrix u;
};

SchurData schur(const CMatrix& a) {
  if (a.rows() != a.cols()) {
    throw ValidationError("eigendecomposition needs a square matrix");
  }
  require_finite(a, "matrix");
  if (a.rows() == 0) return {CMatrix(0, 0), CMatrix(0, 0)};
  Eigen::ComplexSchur<CMatrix> solver(a, true);
  if (solver.info() != Eigen::Success) {
    const CMatrix residual =
        solver.matrixU() * solver.matrixT() * solver.matrixU().adjoint() - a;
    std::ostringstream msg;
    msg << "Schur iteration did not converge (residual " << norm(residual) << ")";
    throw NumericalError(msg.str());
  }
  return {solver.matrixT(), solver.matrixU()};
}

int find_root(std::vector<int>& parent, int i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

// Distance of two angles modulo pi, in [0, pi/2].
double ray_distance(double a, double b) {
  double diff = std::fmod(std::abs(a - b), kPi);
  return std::min(diff, kPi - diff);
}

}  // namespace

void require_finite(const CMatrix& a, std::string_view what) {
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      if (!std::isfinite(a(i, j).real()) || !std::isfinite(a(i, j).imag())) {
        throw ValidationError(std::string(what) + " has a non-finite entry");
      }
    }
  }
}

double norm(const CMatrix& a) { return a.size() == 0 ? 0.0 : a.norm(); }

Complex det(const CMatrix& a) {
  if (a.rows() != a.cols()) throw ValidationError("determinant of a non-square matrix");
  if (a.rows() == 0) return Complex(1.0);
  return a.partialPivLu().determinant();
}

int Spectrum::dimension() const {
  int total = 0;
  for (const auto& g : groups) total += g.multiplicity;
  return total;
}

std::vector<Complex> Spectrum::values_with_multiplicity() const {
  std::vector<Complex> out;
  for (const auto& g : groups) out.insert(out.end(), g.multiplicity, g.value);
  return out;
}

Spectrum eig(const CMatrix& a, double tol) {
  if (!(tol > 0.0)) throw ValidationError("eig tolerance must be positive");
  const SchurData s = schur(a);
  const Index n = s.t.rows();
  const double threshold = tol * norm(a);

  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      if (std::abs(s.t(i, i) - s.t(j, j)) <= threshold) {
        parent[find_root(parent, static_cast<int>(i))] = find_root(parent, static_cast<int>(j));
      }
    }
  }

  std::vector<int> roots;
  for (Index i = 0; i < n; ++i) {
    int r = find_root(parent, static_cast<int>(i));
    if (std::find(roots.begin(), roots.end(), r) == roots.end()) roots.push_back(r);
  }

  Spectrum spectrum;
  for (int root : roots) {
    std::vector<bool> flags(n, false);
    Complex sum(0.0);
    int count = 0;
    for (Index i = 0; i < n; ++i) {
      if (find_root(parent, static_cast<int>(i)) == root) {
        flags[i] = true;
        sum += s.t(i, i);
        ++count;
      }
    }
    CMatrix t = s.t;
    CMatrix u = s.u;
    const Index k = reorder_schur(t, u, flags);
    spectrum.groups.push_back({sum / static_cast<double>(count), count, u.leftCols(k)});
  }
  std::sort(spectrum.groups.begin(), spectrum.groups.end(),
            [](const EigenGroup& x, const EigenGroup& y) {
              if (x.value.real() != y.value.real()) return x.value.real() < y.value.real();
              return x.value.imag() < y.value.imag();
            });
  return spectrum;
}

CMatrix invariant_subspace(const CMatrix& a, const std::function<bool(Complex)>& select) {
  SchurData s = schur(a);
  const Index n = s.t.rows();
  std::vector<bool> flags(n);
  for (Index i = 0; i < n; ++i) flags[i] = select(s.t(i, i));
  const Index k = reorder_schur(s.t, s.u, flags);
  return s.u.leftCols(k);
}

RankNullspace rank_nullspace(const CMatrix& a, double tol, double scale) {
  if (!(tol > 0.0)) throw ValidationError("rank tolerance must be positive");
  require_finite(a, "matrix");
  RankNullspace out;
  const Index rows = a.rows();
  const Index cols = a.cols();
  if (rows == 0 || cols == 0) {
    out.kernel = CMatrix::Identity(cols, cols);
    out.image = CMatrix(rows, 0);
    out.coimage = CMatrix(cols, 0);
    out.singular_values = Eigen::VectorXd(0);
    return out;
  }
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  out.singular_values = svd.singularValues();
  const double sigma_max = scale > 0.0 ? scale : out.singular_values(0);
  const double cutoff = tol * sigma_max;
  for (Index i = 0; i < out.singular_values.size(); ++i) {
    const double sigma = out.singular_values(i);
    if (sigma > cutoff && sigma_max > 0.0) ++out.rank;
    if (sigma_max > 0.0 && sigma > cutoff / 10.0 && sigma < cutoff * 10.0) out.ambiguous = true;
  }
  out.image = svd.matrixU().leftCols(out.rank);
  out.coimage = svd.matrixV().leftCols(out.rank);
  out.kernel = svd.matrixV().rightCols(cols - out.rank);
  return out;
}

CMatrix kernel_basis(const CMatrix& a, double cutoff) {
  const Index cols = a.cols();
  if (a.rows() == 0 || cols == 0) return CMatrix::Identity(cols, cols);
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  Index rank = 0;
  for (Index i = 0; i < sigma.size(); ++i) {
    if (sigma(i) > cutoff) ++rank;
  }
  return svd.matrixV().rightCols(cols - rank);
}

CMatrix solve_least_squares(const CMatrix& a, const CMatrix& b) {
  if (a.cols() == 0) return CMatrix(0, b.cols());
  if (a.rows() == 0) return CMatrix::Zero(a.cols(), b.cols());
  return a.completeOrthogonalDecomposition().solve(b);
}

AgmonAngle::AgmonAngle(double theta) : theta_(theta) {
  if (!(theta > -kPi && theta < 0.0)) {
    throw ValidationError("Agmon angle must lie in (-pi, 0)");
  }
}

double AgmonAngle::clearance(std::span<const Complex> eigenvalues) const {
  double best = kPi / 2.0;
  for (Complex z : eigenvalues) {
    if (z == Complex(0.0)) continue;
    best = std::min(best, ray_distance(std::arg(z), theta_));
  }
  return best;
}

bool AgmonAngle::admissible_for(std::span<const Complex> eigenvalues) const {
  return clearance(eigenvalues) >= kAngularTolerance;
}

AgmonAngle default_agmon_angle(std::span<const Complex> eigenvalues) {
  AgmonAngle preferred(-kPi / 2.0);
  if (preferred.admissible_for(eigenvalues)) return preferred;

  std::vector<double> angles;
  for (Complex z : eigenvalues) {
    if (z == Complex(0.0)) continue;
    double a = std::fmod(std::arg(z), kPi);
    if (a < 0.0) a += kPi;
    angles.push_back(a);
  }
  std::sort(angles.begin(), angles.end());
  // Largest circular gap modulo pi; its midpoint is the farthest ray.
  double best_gap = -1.0;
  double best_mid = kPi / 2.0;
  for (std::size_t i = 0; i < angles.size(); ++i) {
    const double lo = angles[i];
    const double hi = (i + 1 < angles.size()) ? angles[i + 1] : angles[0] + kPi;
    if (hi - lo > best_gap) {
      best_gap = hi - lo;
      best_mid = 0.5 * (lo + hi);
    }
  }
  double theta = std::fmod(best_mid, kPi) - kPi;  // representative in [-pi, 0)
  // The real axis itself is not a valid cut; stay inside the gap.
  if (theta <= -kPi + 1e-6) theta = -kPi + best_gap / 4.0;
  return AgmonAngle(theta);
}

Complex log_branch(Complex lambda, AgmonAngle theta) {
  if (lambda == Complex(0.0)) throw ValidationError("logarithm of zero");
  const double lo = theta.value();
  double arg = std::arg(lambda);
  while (arg <= lo) arg += 2.0 * kPi;
  while (arg >= lo + 2.0 * kPi) arg -= 2.0 * kPi;
  if (arg - lo < AgmonAngle::kAngularTolerance ||
      lo + 2.0 * kPi - arg < AgmonAngle::kAngularTolerance) {
    throw ValidationError("eigenvalue lies on the branch ray of the Agmon angle");
  }
  return {std::log(std::abs(lambda)), arg};
}

ThetaDeterminant det_theta(const CMatrix& a, AgmonAngle theta) {
  const Spectrum spectrum = eig(a);
  const std::vector<Complex> values = spectrum.values_with_multiplicity();
  const double scale = norm(a);
  for (Complex z : values) {
    if (std::abs(z) <= 1e-14 * std::max(scale, 1e-300)) {
      throw ValidationError("det_theta of a singular operator");
    }
  }
  if (!theta.admissible_for(values)) {
    throw ValidationError("Agmon angle is not admissible for the operator");
  }
  Complex log_sum(0.0);
  for (const auto& g : spectrum.groups) {
    log_sum += static_cast<double>(g.multiplicity) * log_branch(g.value, theta);
  }
  return {std::exp(log_sum), log_sum};
}

}  // namespace torsion
