#pragma once

#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "torsion/cw_rep.hpp"

namespace torsion {

/// Polynomial in z and conj(z): sum_k c_k z^{p_k} conj(z)^{q_k}.
struct Polynomial {
  std::vector<std::tuple<Complex, int, int>> terms;

  Complex operator()(Complex z) const;
  bool operator==(const Polynomial& other) const { return terms == other.terms; }
};

struct PolynomialMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<Polynomial> entries;  // row-major

  CMatrix operator()(Complex z) const;
  bool operator==(const PolynomialMatrix& other) const;
};

/// Axis-aligned square grid: rows along Im z, cols along Re z, centred.
struct GridSpec {
  Complex center;
  double h = 0.1;
  int rows = 3;
  int cols = 3;

  /// Throws ValidationError when the grid cannot carry a 5-point stencil.
  void validate() const;
  Complex point(int row, int col) const;
  std::vector<Complex> points() const;  // row-major
  GridSpec halved() const;
};

/// One-parameter family: explicit polynomial boundaries, or a CW system with
/// generator images polynomial in z.
struct AnalyticFamily {
  enum class Mode { explicit_matrices, cw };

  GridSpec grid;
  Mode mode = Mode::explicit_matrices;
  std::vector<int> dims;                   // explicit mode
  std::vector<PolynomialMatrix> boundaries;
  CWSystem cw;                             // cw mode
  int n = 1;
  std::vector<PolynomialMatrix> images;

  GradedComplex at(Complex z) const;
};

struct FamilySample {
  Complex z;
  Complex value;
  std::vector<int> betti;
  int stratum = 0;
};

struct FamilyValues {
  std::vector<FamilySample> samples;  // grid order
  bool stratum_crossing = false;
  int strata = 1;
};

/// Torsion at every grid point. Non-acyclic members use cocycle frames that
/// solve d(z)(F + Q Y) = 0 with F, Q frozen at the first point of their
/// stratum, so the values vary holomorphically along with d(z). Points whose
/// betti numbers differ from earlier points open a new stratum.
FamilyValues torsion_family(const AnalyticFamily& f, const GridSpec& grid,
                            const PhiOptions& options = {});
inline FamilyValues torsion_family(const AnalyticFamily& f, const PhiOptions& options = {}) {
  return torsion_family(f, f.grid, options);
}

struct HolomorphyReport {
  std::vector<Complex> points;      // interior points at spacing h
  std::vector<double> residuals;    // |discrete d/dzbar| at those points
  double max_residual = 0.0;
  double max_residual_half = 0.0;   // same at spacing h/2
  std::optional<double> exponent;   // log2(max(h) / max(h/2)); unset at the roundoff floor
  bool roundoff_floor = false;      // both maxima at roundoff level
};

/// Discrete Cauchy-Riemann residuals of samples on a grid (grid order).
/// Returns one residual per interior point.
std::vector<double> cr_residuals(const std::vector<Complex>& values, const GridSpec& grid);

/// CR residuals at h and h/2 with the scaling exponent.
HolomorphyReport cr_residual(const AnalyticFamily& f, const PhiOptions& options = {});
HolomorphyReport cr_residual(const std::vector<Complex>& values_h,
                             const std::vector<Complex>& values_half, const GridSpec& grid);

struct PhaseVerdict {
  bool constant = false;
  std::vector<double> phases;      // estimated constant phase per component
  std::vector<int> component;      // component id per sample (-1: skipped)
  double max_variation = 0.0;      // largest deviation from the component phase
  double max_modulus_defect = 0.0;
};

/// Does f / (g w) have locally constant phase? Components follow 4-neighbour
/// connectivity on `grid` (or a path through the samples when grid is
/// unset). Throws ValidationError if |f| and |g w| differ by more than
/// tol * max modulus or a sample vanishes.
PhaseVerdict phase_constancy(const std::vector<Complex>& f, const std::vector<Complex>& g,
                             double tol, const std::vector<Complex>& weight = {},
                             const std::optional<GridSpec>& grid = std::nullopt);

struct ConeOptions {
  /// Use the block matrix [[d, 0], [J, d_C]] exactly as written (no sign on
  /// the C block). It only squares to zero when J d = 0.
  bool verbatim = false;
  double tol = kComplexTolerance;
};

struct ConeComplex {
  GradedComplex source;  // W
  GradedComplex target;  // C
  std::vector<CMatrix> map;
  GradedComplex assembled;
};

/// max_j ||d^C_j J_j - J_{j+1} d^W_j|| / (||d^C|| ||J|| + ||J|| ||d^W|| + 1).
double chain_map_residual(const GradedComplex& w, const GradedComplex& c,
                          const std::vector<CMatrix>& j);

/// Cone^j = W^j + C^{j-1} with differential [[d_j, 0], [J_j, -d^C_{j-1}]]
/// (or the verbatim variant). Throws ValidationError when J is not a chain
/// map or the assembled differential does not square to zero.
ConeComplex cone(const GradedComplex& w, const GradedComplex& c, const std::vector<CMatrix>& j,
                 const ConeOptions& options = {});

/// det of the map induced by J on H^j, in the cohomology frames of W and C.
/// Throws ValidationError when J is not a quasi-isomorphism.
std::vector<Complex> cohomology_map_dets(const GradedComplex& w, const GradedComplex& c,
                                         const std::vector<CMatrix>& j,
                                         const PhiOptions& options = {});

/// |tau(W)| * prod_j |det H^j(J)|^{(-1)^j} / |tau(C)|, the predicted modulus
/// of the cone torsion.
double cone_modulus_prediction(const GradedComplex& w, const GradedComplex& c,
                               const std::vector<CMatrix>& j, const PhiOptions& options = {});

}  // namespace torsion
