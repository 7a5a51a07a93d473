#pragma once

#include <optional>
#include <vector>

#include "torsion/detline.hpp"

namespace torsion {

/// Involution Gamma with Gamma(C^j) = C^{d-j}; blocks[j] : C^{m_j} -> C^{m_{d-j}}.
class Chirality {
 public:
  Chirality() = default;
  /// All d+1 blocks given. Shapes are checked, the involution identity is not
  /// (see check_chirality).
  explicit Chirality(std::vector<CMatrix> blocks);

  /// Blocks for degrees 0..r-1; degrees r..d are filled in by inversion.
  static Chirality from_lower(const GradedComplex& c, const std::vector<CMatrix>& lower);

  const std::vector<CMatrix>& blocks() const { return blocks_; }
  const CMatrix& block(int j) const { return blocks_.at(j); }
  int length() const { return static_cast<int>(blocks_.size()) - 1; }
  /// Lower half, degrees 0..r-1 (what the file format stores).
  std::vector<CMatrix> lower() const;

  bool operator==(const Chirality& other) const;

 private:
  std::vector<CMatrix> blocks_;
};

/// max_j ||Gamma_{d-j} Gamma_j - I||. Throws ValidationError for even d,
/// m_j != m_{d-j}, or shapes that do not fit the complex.
double check_chirality(const GradedComplex& c, const Chirality& g);

/// Throws ValidationError when check_chirality exceeds tol.
void require_chirality(const GradedComplex& c, const Chirality& g, double tol = 1e-10);

/// R(C) = 1/2 sum_{j<r} m_j (m_j + (-1)^{r+j}), r = (d+1)/2.
long r_sign(const std::vector<int>& dims);
inline long r_sign(const GradedComplex& c) { return r_sign(c.dims()); }

/// c_Gamma against the standard frame of Det(C). `bases` holds one basis
/// c_j of C^j for every j < r (square invertible matrices); the Gamma-images
/// are formed explicitly and their coordinates taken as determinants.
/// An empty vector means unit bases.
DetElement c_gamma(const GradedComplex& c, const Chirality& g,
                   const std::vector<CMatrix>& bases = {});

/// Same, with scalar coordinates c_j = x_j e_j.
DetElement c_gamma_scalar(const GradedComplex& c, const Chirality& g,
                          const std::vector<Complex>& parts);

/// rho_Gamma = phi(c_Gamma) against the frame of `h` (computed when null).
DetElement refined_torsion(const GradedComplex& c, const Chirality& g,
                           std::shared_ptr<const CohomologyData> h = nullptr,
                           const PhiOptions& options = {});

}  // namespace torsion
