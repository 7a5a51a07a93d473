#pragma once

#include <string>
#include <vector>

#include "torsion/refined.hpp"

namespace torsion {

inline constexpr double kGapTolerance = 1e-6;

/// B = Gamma d + d Gamma on the direct sum of all C^j.
struct OddSignatureModel {
  GradedComplex complex;
  Chirality chirality;
  CMatrix gamma;     // full involution
  CMatrix boundary;  // full differential
  CMatrix b;         // Gamma d + d Gamma
  CMatrix b_even;    // b on the even degrees (b preserves parity)

  /// Degree-k diagonal block of B^2.
  CMatrix b_squared_block(int k) const;
  /// Columns of B belonging to degree k (B_k, total x m_k).
  CMatrix b_block(int k) const;
};

OddSignatureModel odd_signature(const GradedComplex& c, const Chirality& g);

struct SpectralCut {
  enum class Kind { closed, annulus, exterior };  // [0,l], (l,mu], (l,inf)

  Kind kind = Kind::closed;
  double lambda = 0.0;
  double mu = 0.0;

  static SpectralCut closed_ball(double lambda) { return {Kind::closed, lambda, 0.0}; }
  static SpectralCut annulus(double lambda, double mu) { return {Kind::annulus, lambda, mu}; }
  static SpectralCut exterior(double lambda) { return {Kind::exterior, lambda, 0.0}; }

  bool contains_zero() const { return kind == Kind::closed; }
};

/// Eigenvalue moduli of B^2, one entry per eigenvalue with multiplicity;
/// moduli below 1e-10 * max are reported as 0.
std::vector<double> b_squared_moduli(const OddSignatureModel& m);

struct SpectralSubspace {
  std::vector<CMatrix> bases;  // orthonormal, m_k x n_k per degree
  double gap = 0.0;            // distance of the cut circles to the nearest |mu|

  int dimension() const;
};

/// Sum of the generalized eigenspaces of B^2 with |mu| in the cut, per
/// degree. Throws ValidationError when an eigenvalue modulus lies within
/// gap_tol * max|mu| of a cut circle.
SpectralSubspace spectral_subspace(const OddSignatureModel& m, const SpectralCut& cut,
                                   double gap_tol = kGapTolerance);

struct PlusMinus {
  std::vector<CMatrix> plus;   // Ker(d Gamma) in the subspace, per degree
  std::vector<CMatrix> minus;  // Ker d in the subspace, per degree
};

/// Throws ValidationError if the cut contains 0 and NumericalError if the
/// two kernels do not add up to the subspace.
PlusMinus split_pm(const OddSignatureModel& m, const SpectralCut& cut,
                   const SpectralSubspace& sub);

struct GradedDeterminant {
  Complex value;
  Complex log_plus;   // branch-log sum of B on the even plus part
  Complex log_minus;  // branch-log sum of -B on the even minus part
  int dim_plus = 0;
  int dim_minus = 0;
};

/// Det_theta(B^+_even) / Det_theta(-B^-_even) over the cut.
GradedDeterminant graded_det(const OddSignatureModel& m, const SpectralCut& cut,
                             AgmonAngle theta, double gap_tol = kGapTolerance);

/// Spectrum of both restricted operators, for choosing admissible angles.
std::vector<Complex> graded_spectrum(const OddSignatureModel& m, const SpectralCut& cut,
                                     double gap_tol = kGapTolerance);

/// rho = Det_gr(B_even over (lambda, inf)) * rho_Gamma(Omega_[0,lambda]),
/// expressed against the cohomology frame of the full complex.
DetElement rho_lambda(const OddSignatureModel& m, double lambda, AgmonAngle theta,
                      const PhiOptions& options = {}, double gap_tol = kGapTolerance);

/// Cuts that are admissible for the model: 0 (if allowed by the gap rule),
/// the midpoints between consecutive distinct moduli, and one value above
/// the spectrum.
std::vector<double> admissible_lambdas(const OddSignatureModel& m,
                                       double gap_tol = kGapTolerance);

struct EtaData {
  int eta_zero = 0;  // #(Re > 0) - #(Re < 0), imaginary axis excluded
  int m_plus = 0;    // positive imaginary axis
  int m_minus = 0;   // negative imaginary axis
  int m_zero = 0;    // algebraic multiplicity of 0
  long twice_eta = 0;

  /// eta as "p/q" in lowest terms with q in {1, 2}.
  std::string rational() const;
  double value() const { return 0.5 * static_cast<double>(twice_eta); }
};

/// Sign-refined eta invariant of a finite operator. Eigenvalues are grouped
/// with tolerance 1e-6 * ||D||; a group whose real or imaginary part is
/// within a factor 10 of the axis tolerance 1e-9 * ||D|| raises NumericalError.
EtaData eta_invariant(const CMatrix& d);

}  // namespace torsion
