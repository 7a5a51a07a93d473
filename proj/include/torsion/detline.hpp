#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "torsion/linalg.hpp"

namespace torsion {

inline constexpr double kComplexTolerance = 1e-10;
inline constexpr double kRankTolerance = 1e-10;

/// 0 -> C^{m_0} -> C^{m_1} -> ... -> C^{m_d} -> 0 with boundaries[j] : C^j -> C^{j+1}.
class GradedComplex {
 public:
  GradedComplex() = default;
  /// Validates shapes (boundaries[j] is m_{j+1} x m_j) and finiteness.
  GradedComplex(std::vector<int> dims, std::vector<CMatrix> boundaries);

  /// All boundaries zero.
  static GradedComplex zero(std::vector<int> dims);

  int length() const { return static_cast<int>(dims_.size()) - 1; }
  int dim(int j) const { return (j < 0 || j > length()) ? 0 : dims_[j]; }
  const std::vector<int>& dims() const { return dims_; }
  const std::vector<CMatrix>& boundaries() const { return boundaries_; }
  /// boundary(j) : C^j -> C^{j+1}; an empty matrix of the right shape outside 0..d-1.
  CMatrix boundary(int j) const;
  int total_dim() const;
  /// Offset of degree j inside the direct sum of all C^k.
  int offset(int j) const;

  bool operator==(const GradedComplex& other) const;

 private:
  std::vector<int> dims_;
  std::vector<CMatrix> boundaries_;
};

/// max_j ||d_{j+1} d_j|| / (||d_{j+1}|| ||d_j|| + 1).
double check_complex(const GradedComplex& c);

/// Throws ValidationError if check_complex exceeds tol.
void require_complex(const GradedComplex& c, double tol = kComplexTolerance);

/// Cohomology H^j with a chosen basis of cocycle representatives per degree.
struct CohomologyData {
  std::vector<int> betti;
  std::vector<CMatrix> representatives;  // m_j x b_j
  std::vector<CMatrix> coboundaries;     // orthonormal basis of Im d_{j-1}, m_j x rank

  bool acyclic() const;
  bool operator==(const CohomologyData& other) const;
};

/// Betti numbers and the deterministic orthonormal frame of the orthogonal
/// complement of Im d_{j-1} inside Ker d_j. Throws NumericalError when a
/// singular value sits within a factor 10 of the rank cutoff.
/// A positive `scale` replaces the largest singular value of the boundaries
/// as the reference for the relative rank cutoff.
CohomologyData cohomology(const GradedComplex& c, double tol = kRankTolerance,
                          double scale = 0.0);

/// Largest singular value over all boundaries (0 for a zero complex).
double boundary_scale(const GradedComplex& c);

/// Frame a determinant-line coordinate refers to.
struct Frame {
  enum class Kind { standard, cohomology };

  Kind kind = Kind::standard;
  std::vector<int> dims;                              // dims (standard) or betti (cohomology)
  std::shared_ptr<const CohomologyData> cohomology;   // set for cohomology frames

  static Frame standard(const GradedComplex& c);
  static Frame of(std::shared_ptr<const CohomologyData> h);

  bool same_as(const Frame& other) const;
};

/// Nonzero coordinate of an element of Det(C) or Det(H) against a frame.
class DetElement {
 public:
  DetElement(Complex value, Frame frame);

  Complex value() const { return value_; }
  const Frame& frame() const { return frame_; }

  DetElement scaled(Complex s) const { return DetElement(value_ * s, frame_); }
  /// this / other; throws ValidationError if the frames differ.
  Complex ratio_to(const DetElement& other) const;

 private:
  Complex value_;
  Frame frame_;
};

/// Dimension data a sign convention may depend on.
struct ComplexShape {
  std::vector<int> dims;        // m_j
  std::vector<int> coboundary;  // dim Im d_{j-1} inside C^j
  std::vector<int> betti;       // b_j
};

/// The integer N(C) in phi(c) = (-1)^N * prod_j det(A_j)^{(-1)^{j+1}}.
using SignConvention = std::function<long(const ComplexShape&)>;

namespace sign_convention {
/// N = 0.
SignConvention trivial();
/// N = sum_j binom(r_j, 2) + r_mid (d - 1) / 2, with r_j the rank of d_j and
/// r_mid the rank of the middle boundary d_{(d-1)/2} (odd d). With this choice the spectral element rho does not
/// depend on the cut (see the lambda suite).
SignConvention calibrated();
/// The library default (calibrated).
SignConvention standard();
}  // namespace sign_convention

struct PhiOptions {
  double rank_tol = kRankTolerance;
  double complex_tol = kComplexTolerance;
  /// Reference for the rank cutoff; 0 means boundary_scale of the complex.
  double rank_scale = 0.0;
  SignConvention convention = sign_convention::standard();
  /// When set, complements of Ker d_j are drawn at random (oblique and
  /// rescaled) instead of the orthogonal complement. Used to test that
  /// the result does not depend on this choice.
  std::optional<std::uint64_t> complement_seed;
};

/// Canonical isomorphism Det(C) -> Det(H). `c` must be in the standard frame
/// of `complex`; the result is a coordinate against the frame of `h`.
DetElement phi(const GradedComplex& complex, const DetElement& c,
               std::shared_ptr<const CohomologyData> h, const PhiOptions& options = {});

/// phi of the standard element of an acyclic complex, as a complex number.
Complex torsion_acyclic(const GradedComplex& complex, const PhiOptions& options = {});

/// Shape data of a complex (ranks computed with tol).
ComplexShape complex_shape(const GradedComplex& complex, double tol = kRankTolerance,
                           double scale = 0.0);

}  // namespace torsion
