#include "torsion/cw_rep.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "torsion/error.hpp"
#include "torsion/random_models.hpp"

namespace torsion {

namespace {

Word inverse(const Word& w) {
  Word out(w.rbegin(), w.rend());
  for (int& g : out) g = -g;
  return out;
}

Word concat(const Word& a, const Word& b, const Word& c) {
  Word out = a;
  out.insert(out.end(), b.begin(), b.end());
  out.insert(out.end(), c.begin(), c.end());
  return out;
}

// Signed permutation of the cells: new cell i is sign[i] * old cell perm[i].
struct CellMap {
  std::vector<int> perm;
  std::vector<int> sign;
};

CellMap orientation_flip_map(const CWSystem& k) {
  const int total = static_cast<int>(k.cell_dims.size());
  CellMap map;
  map.perm.resize(total);
  map.sign.assign(total, 1);
  for (int i = 0; i < total; ++i) map.perm[i] = i;
  if (total == 0) throw ValidationError("CW system has no cells");
  for (int j = 0; j <= k.dimension(); ++j) {
    const std::vector<int> cells = k.cells_of_dim(j);
    if (cells.size() >= 2) {
      std::swap(map.perm[cells[0]], map.perm[cells[1]]);
      return map;
    }
  }
  map.sign[0] = -1;
  return map;
}

// Position of each cell inside its dimension.
std::vector<int> local_index(const CWSystem& k) {
  std::vector<int> out(k.cell_dims.size());
  std::map<int, int> seen;
  for (std::size_t i = 0; i < k.cell_dims.size(); ++i) out[i] = seen[k.cell_dims[i]]++;
  return out;
}

CWSystem apply_cell_map(const CWSystem& k, const CellMap& map) {
  const std::vector<int> local = local_index(k);
  CWSystem out = k;
  for (std::size_t i = 0; i < map.perm.size(); ++i) {
    if (k.cell_dims[map.perm[i]] != k.cell_dims[i]) {
      throw ValidationError("cell map must preserve dimensions");
    }
  }
  for (int j = 0; j < static_cast<int>(k.boundaries.size()); ++j) {
    const std::vector<int> rows = k.cells_of_dim(j + 1);
    const std::vector<int> cols = k.cells_of_dim(j);
    GroupRingMatrix& b = out.boundaries[j];
    for (std::size_t e = 0; e < rows.size(); ++e) {
      for (std::size_t f = 0; f < cols.size(); ++f) {
        const int old_e = map.perm[rows[e]];
        const int old_f = map.perm[cols[f]];
        GroupRingElement entry = k.boundaries[j].at(local[old_e], local[old_f]);
        const int s = map.sign[rows[e]] * map.sign[cols[f]];
        for (auto& term : entry.terms) term.first *= s;
        b.at(static_cast<int>(e), static_cast<int>(f)) = entry;
      }
    }
  }
  return out;
}

// Coordinate change x' = P x induced by a cell map on degree j.
CMatrix cell_map_matrix(const CWSystem& k, const CellMap& map, int j, int n) {
  const std::vector<int> cells = k.cells_of_dim(j);
  const std::vector<int> local = local_index(k);
  const int size = n * static_cast<int>(cells.size());
  CMatrix p = CMatrix::Zero(size, size);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const int old = local[map.perm[cells[i]]];
    p.block(n * static_cast<int>(i), n * old, n, n) =
        static_cast<double>(map.sign[cells[i]]) * CMatrix::Identity(n, n);
  }
  return p;
}

}  // namespace

void GroupPresentation::validate_word(const Word& w) const {
  for (int g : w) {
    if (g == 0 || std::abs(g) > generators) {
      std::ostringstream msg;
      msg << "word uses generator " << g << " but the presentation has " << generators;
      throw ValidationError(msg.str());
    }
  }
}

CMatrix evaluate_word(const Representation& a, const Word& w) {
  CMatrix out = CMatrix::Identity(a.n, a.n);
  for (int g : w) {
    if (g == 0 || std::abs(g) > static_cast<int>(a.images.size())) {
      throw ValidationError("word refers to a generator without an image");
    }
    const CMatrix& image = a.images[std::abs(g) - 1];
    if (g > 0) {
      out = out * image;
    } else {
      out = out * image.partialPivLu().inverse();
    }
  }
  return out;
}

double rep_check(const GroupPresentation& g, const Representation& a) {
  if (a.n < 1) throw ValidationError("representation dimension must be positive");
  if (static_cast<int>(a.images.size()) != g.generators) {
    throw ValidationError("representation needs one image per generator");
  }
  for (const auto& image : a.images) {
    if (image.rows() != a.n || image.cols() != a.n) {
      throw ValidationError("generator image has the wrong shape");
    }
    require_finite(image, "generator image");
    const Eigen::VectorXd s = Eigen::JacobiSVD<CMatrix>(image).singularValues();
    if (s(a.n - 1) <= 1e-12 * s(0)) throw ValidationError("generator image is singular");
  }
  double worst = 0.0;
  for (const auto& w : g.relations) {
    g.validate_word(w);
    worst = std::max(worst, norm(evaluate_word(a, w) - CMatrix::Identity(a.n, a.n)));
  }
  return worst;
}

void require_representation(const GroupPresentation& g, const Representation& a, double tol) {
  const double residual = rep_check(g, a);
  if (residual > tol) {
    std::ostringstream msg;
    msg << "representation violates a relation (residual " << residual << ")";
    throw ValidationError(msg.str());
  }
}

bool GroupRingMatrix::operator==(const GroupRingMatrix& other) const {
  return rows == other.rows && cols == other.cols && entries == other.entries;
}

CMatrix evaluate_boundary(const GroupRingMatrix& b, const Representation& a) {
  if (static_cast<int>(b.entries.size()) != b.rows * b.cols) {
    throw ValidationError("group ring matrix has the wrong number of entries");
  }
  const int n = a.n;
  CMatrix out = CMatrix::Zero(n * b.rows, n * b.cols);
  for (int i = 0; i < b.rows; ++i) {
    for (int j = 0; j < b.cols; ++j) {
      for (const auto& [coef, word] : b.at(i, j).terms) {
        out.block(n * i, n * j, n, n) += static_cast<double>(coef) * evaluate_word(a, word);
      }
    }
  }
  return out;
}

int CWSystem::dimension() const {
  int top = -1;
  for (int d : cell_dims) top = std::max(top, d);
  return top;
}

int CWSystem::count(int j) const {
  return static_cast<int>(std::count(cell_dims.begin(), cell_dims.end(), j));
}

std::vector<int> CWSystem::cells_of_dim(int j) const {
  std::vector<int> out;
  for (std::size_t i = 0; i < cell_dims.size(); ++i) {
    if (cell_dims[i] == j) out.push_back(static_cast<int>(i));
  }
  return out;
}

void CWSystem::validate() const {
  if (cell_dims.empty()) throw ValidationError("CW system has no cells");
  for (int d : cell_dims) {
    if (d < 0) throw ValidationError("negative cell dimension");
  }
  const int top = dimension();
  for (int j = 0; j <= top; ++j) {
    if (count(j) == 0) throw ValidationError("CW system skips a dimension");
  }
  if (static_cast<int>(boundaries.size()) != top) {
    std::ostringstream msg;
    msg << "CW system of dimension " << top << " needs " << top << " boundary matrices, got "
        << boundaries.size();
    throw ValidationError(msg.str());
  }
  for (int j = 0; j < top; ++j) {
    const GroupRingMatrix& b = boundaries[j];
    if (b.rows != count(j + 1) || b.cols != count(j) ||
        static_cast<int>(b.entries.size()) != b.rows * b.cols) {
      std::ostringstream msg;
      msg << "boundary " << j << " must be " << count(j + 1) << "x" << count(j);
      throw ValidationError(msg.str());
    }
    for (const auto& entry : b.entries) {
      for (const auto& term : entry.terms) presentation.validate_word(term.second);
    }
  }
  for (const auto& w : presentation.relations) presentation.validate_word(w);
}

bool CWSystem::operator==(const CWSystem& other) const {
  return cell_dims == other.cell_dims && boundaries == other.boundaries &&
         presentation.generators == other.presentation.generators &&
         presentation.relations == other.presentation.relations;
}

GradedComplex twisted_complex(const CWSystem& k, const Representation& a, double flat_tol) {
  k.validate();
  require_representation(k.presentation, a);
  const int top = k.dimension();
  std::vector<int> dims;
  for (int j = 0; j <= top; ++j) dims.push_back(a.n * k.count(j));
  std::vector<CMatrix> boundaries;
  for (const auto& b : k.boundaries) boundaries.push_back(evaluate_boundary(b, a));
  GradedComplex c(dims, boundaries);
  const double residual = check_complex(c);
  if (residual > flat_tol) {
    std::ostringstream msg;
    msg << "evaluated boundaries do not compose to zero (residual " << residual
        << "); the boundary data is not flat for this representation";
    throw ValidationError(msg.str());
  }
  return c;
}

DetElement ft_torsion(const CWSystem& k, const Representation& a, bool flip,
                      const PhiOptions& options) {
  const GradedComplex c = twisted_complex(k, a, options.complex_tol);
  auto h = std::make_shared<const CohomologyData>(
      cohomology(c, options.rank_tol, options.rank_scale));
  const DetElement standard(1.0, Frame::standard(c));
  if (!flip) return phi(c, standard, h, options);

  const CellMap map = orientation_flip_map(k);
  const GradedComplex flipped = twisted_complex(apply_cell_map(k, map), a, options.complex_tol);
  // The cohomology frame of K carried over to the flipped coordinates.
  auto moved = std::make_shared<CohomologyData>(*h);
  for (int j = 0; j <= k.dimension(); ++j) {
    const CMatrix p = cell_map_matrix(k, map, j, a.n);
    moved->representatives[j] = p * h->representatives[j];
    moved->coboundaries[j] = p * h->coboundaries[j];
  }
  const DetElement value = phi(flipped, DetElement(1.0, Frame::standard(flipped)), moved, options);
  return DetElement(value.value(), Frame::of(h));
}

CWSystem shift_lifts(const CWSystem& k, const std::vector<Word>& shifts) {
  k.validate();
  if (shifts.empty()) return k;
  if (shifts.size() != k.cell_dims.size()) {
    throw ValidationError("shift_lifts needs one word per cell");
  }
  for (const auto& w : shifts) k.presentation.validate_word(w);
  CWSystem out = k;
  for (int j = 0; j < static_cast<int>(k.boundaries.size()); ++j) {
    const std::vector<int> rows = k.cells_of_dim(j + 1);
    const std::vector<int> cols = k.cells_of_dim(j);
    for (std::size_t e = 0; e < rows.size(); ++e) {
      for (std::size_t f = 0; f < cols.size(); ++f) {
        GroupRingElement& entry = out.boundaries[j].at(static_cast<int>(e), static_cast<int>(f));
        for (auto& term : entry.terms) {
          term.second = concat(shifts[rows[e]], term.second, inverse(shifts[cols[f]]));
        }
      }
    }
  }
  return out;
}

int euler_shift_exponent(int cell_dim) { return cell_dim % 2 == 0 ? -1 : 1; }

Complex euler_shift_factor(const CWSystem& k, const Representation& a,
                           const std::vector<Word>& shifts) {
  Complex out(1.0);
  for (std::size_t e = 0; e < shifts.size(); ++e) {
    const Complex d = det_rep_word(a, shifts[e]);
    out = euler_shift_exponent(k.cell_dims.at(e)) > 0 ? out * d : out / d;
  }
  return out;
}

CWSystem flip_orientation(const CWSystem& k) {
  k.validate();
  return apply_cell_map(k, orientation_flip_map(k));
}

Complex det_rep_word(const Representation& a, const Word& w) {
  return det(evaluate_word(a, w));
}

Representation random_representation(std::mt19937_64& rng, const GroupPresentation& g, int n,
                                      bool nontrivial) {
  // Order constraint per generator from relations of the form g^p.
  std::vector<int> order(g.generators, 0);
  for (const auto& w : g.relations) {
    g.validate_word(w);
    if (w.empty()) continue;
    const bool power = std::all_of(w.begin(), w.end(), [&](int x) { return x == w[0]; });
    if (power) {
      order[std::abs(w[0]) - 1] = static_cast<int>(w.size());
      continue;
    }
    // Commutator-like: every generator appears with exponent sum zero.
    std::map<int, int> sums;
    for (int x : w) sums[std::abs(x)] += x > 0 ? 1 : -1;
    const bool balanced =
        std::all_of(sums.begin(), sums.end(), [](const auto& kv) { return kv.second == 0; });
    if (!balanced) {
      throw ValidationError("random_representation supports power and commutator relations only");
    }
  }
  const CMatrix s = random_invertible(rng, n);
  const CMatrix s_inv = s.inverse();
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Representation a{n, {}};
  for (int gen = 0; gen < g.generators; ++gen) {
    CVector diag(n);
    for (int i = 0; i < n; ++i) {
      if (order[gen] > 0) {
        const int p = order[gen];
        std::uniform_int_distribution<int> k_dist(nontrivial && p > 1 ? 1 : 0, p - 1);
        diag(i) = std::polar(1.0, 2.0 * kPi * k_dist(rng) / p);
      } else {
        Complex z;
        do {
          z = std::polar(0.5 + 1.5 * unit(rng), 2.0 * kPi * unit(rng));
        } while (nontrivial && std::abs(z - 1.0) < 0.2);
        diag(i) = z;
      }
    }
    a.images.push_back(s * diag.asDiagonal() * s_inv);
  }
  return a;
}

}  // namespace torsion
