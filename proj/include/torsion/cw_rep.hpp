#pragma once

#include <random>
#include <vector>

#include "torsion/detline.hpp"

namespace torsion {

/// Group word: signed 1-based generator indices, read left to right.
using Word = std::vector<int>;

struct GroupPresentation {
  int generators = 0;
  std::vector<Word> relations;

  /// Throws ValidationError on an index out of range or zero.
  void validate_word(const Word& w) const;
};

struct Representation {
  int n = 0;
  std::vector<CMatrix> images;  // one invertible n x n matrix per generator
};

/// alpha(w) = alpha(w_1) alpha(w_2) ... with alpha(g^-1) = alpha(g)^-1.
CMatrix evaluate_word(const Representation& a, const Word& w);

/// max over relations of ||alpha(w) - I||. Throws ValidationError on shape
/// mismatch or a singular generator image.
double rep_check(const GroupPresentation& g, const Representation& a);

/// Throws ValidationError when rep_check exceeds tol.
void require_representation(const GroupPresentation& g, const Representation& a,
                            double tol = 1e-8);

/// sum_g c_g g with integer coefficients.
struct GroupRingElement {
  std::vector<std::pair<long, Word>> terms;
  bool operator==(const GroupRingElement& other) const { return terms == other.terms; }
};

struct GroupRingMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<GroupRingElement> entries;  // row-major

  const GroupRingElement& at(int i, int j) const { return entries.at(i * cols + j); }
  GroupRingElement& at(int i, int j) { return entries.at(i * cols + j); }
  bool operator==(const GroupRingMatrix& other) const;
};

/// Each entry sum c_g g becomes the n x n block sum c_g alpha(g).
CMatrix evaluate_boundary(const GroupRingMatrix& b, const Representation& a);

/// Cells in order (the order is the orientation datum), boundary matrices
/// per degree: boundaries[j] is k_{j+1} x k_j and entry (e, f) is the
/// coefficient of the lift of f in the boundary of the lift of e.
struct CWSystem {
  std::vector<int> cell_dims;
  std::vector<GroupRingMatrix> boundaries;
  GroupPresentation presentation;

  int dimension() const;
  /// Number of cells of dimension j.
  int count(int j) const;
  /// Global indices of the cells of dimension j, in order.
  std::vector<int> cells_of_dim(int j) const;

  /// Throws ValidationError on inconsistent shapes or words.
  void validate() const;
  bool operator==(const CWSystem& other) const;
};

/// Cochain complex C(K, alpha): degree j has dimension n k_j.
GradedComplex twisted_complex(const CWSystem& k, const Representation& a,
                              double flat_tol = kComplexTolerance);

/// Combinatorial torsion: phi of the standard element of C(K, alpha)
/// against the cohomology frame of C(K, alpha). With flip_orientation the
/// cell data of flip_orientation(K) is used and the result is expressed in
/// the same frame.
DetElement ft_torsion(const CWSystem& k, const Representation& a, bool flip_orientation = false,
                      const PhiOptions& options = {});

/// Replace the lift of cell e by g_e times it: a'_{ef} = g_e a_{ef} g_f^{-1}.
/// shifts holds one word per cell (empty words leave the cell alone); an
/// empty vector leaves the system unchanged.
CWSystem shift_lifts(const CWSystem& k, const std::vector<Word>& shifts);

/// Exponent s with torsion(shifted) / torsion = prod_e det alpha(g_e)^{s(dim e)}.
int euler_shift_exponent(int cell_dim);

/// prod_e det alpha(g_e)^{s(dim e)}.
Complex euler_shift_factor(const CWSystem& k, const Representation& a,
                           const std::vector<Word>& shifts);

/// Reverse the cohomological orientation: swap the first two cells of the
/// lowest dimension that has two cells, or else reverse the orientation of
/// the first cell.
CWSystem flip_orientation(const CWSystem& k);

/// det alpha(w).
Complex det_rep_word(const Representation& a, const Word& w);

/// Random representation for presentations whose relations are powers of a
/// single generator (g^p = 1) or commutators; generators without a power
/// relation get random nonzero eigenvalues. All images are simultaneously
/// diagonalizable. With nontrivial, power-constrained generators avoid the
/// eigenvalue 1. Throws ValidationError for other relation types.
Representation random_representation(std::mt19937_64& rng, const GroupPresentation& g, int n,
                                     bool nontrivial = true);

}  // namespace torsion
