#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

namespace torsion {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Index = Eigen::Index;

inline constexpr double kPi = 3.14159265358979323846;

/// Throws ValidationError if any entry is NaN or infinite.
void require_finite(const CMatrix& a, std::string_view what);

/// Frobenius norm; the scale used by every relative tolerance in the library.
double norm(const CMatrix& a);

/// Determinant with the empty-matrix convention det([]) = 1.
Complex det(const CMatrix& a);

/// One cluster of numerically coincident eigenvalues.
struct EigenGroup {
  Complex value;      // mean of the clustered Schur eigenvalues
  int multiplicity;   // algebraic multiplicity
  CMatrix basis;      // orthonormal basis of the generalized eigenspace
};

struct Spectrum {
  std::vector<EigenGroup> groups;  // ordered by (Re, Im)

  int dimension() const;
  std::vector<Complex> values_with_multiplicity() const;
};

/// Eigenvalues with algebraic multiplicities. Schur eigenvalues closer than
/// tol * ||A|| are merged (single linkage). Throws NumericalError if the
/// QR iteration does not converge.
Spectrum eig(const CMatrix& a, double tol = 1e-8);

/// Orthonormal basis of the A-invariant subspace belonging to the
/// eigenvalues accepted by `select` (sum of generalized eigenspaces).
/// Computed by reordering the complex Schur form.
CMatrix invariant_subspace(const CMatrix& a, const std::function<bool(Complex)>& select);

struct RankNullspace {
  int rank = 0;
  CMatrix kernel;        // orthonormal columns spanning the numerical nullspace
  CMatrix image;         // orthonormal columns spanning the column space
  CMatrix coimage;       // orthonormal columns spanning the row space (Ker^perp)
  Eigen::VectorXd singular_values;
  bool ambiguous = false;  // a singular value lies within a factor 10 of the cutoff
};

/// rank = #{sigma > tol * sigma_max}. A positive `scale` replaces sigma_max
/// (used to rank all boundaries of a complex against a common scale).
RankNullspace rank_nullspace(const CMatrix& a, double tol = 1e-10, double scale = 0.0);

/// Orthonormal kernel basis of A with an absolute cutoff: singular values
/// <= cutoff count as zero.
CMatrix kernel_basis(const CMatrix& a, double cutoff);

/// Least-squares solution X of A X = B (complete orthogonal decomposition).
CMatrix solve_least_squares(const CMatrix& a, const CMatrix& b);

/// Spectral cut angle for branch-cut logarithms, theta in (-pi, 0).
class AgmonAngle {
 public:
  static constexpr double kAngularTolerance = 1e-9;

  explicit AgmonAngle(double theta);
  double value() const { return theta_; }

  /// No eigenvalue on the rays arg = theta or arg = theta + pi.
  bool admissible_for(std::span<const Complex> eigenvalues) const;

  /// Smallest angular distance from the rays to any nonzero eigenvalue.
  double clearance(std::span<const Complex> eigenvalues) const;

 private:
  double theta_;
};

/// -pi/2 if admissible, else the angle in (-pi, 0) farthest from every
/// eigenvalue argument (and its antipode).
AgmonAngle default_agmon_angle(std::span<const Complex> eigenvalues);

/// log|lambda| + i arg(lambda) with arg in (theta, theta + 2 pi).
Complex log_branch(Complex lambda, AgmonAngle theta);

struct ThetaDeterminant {
  Complex value;    // exp(log_sum)
  Complex log_sum;  // sum of multiplicity-weighted branch logarithms
};

/// Zeta-regularized determinant of a finite operator for the cut theta.
ThetaDeterminant det_theta(const CMatrix& a, AgmonAngle theta);

}  // namespace torsion
