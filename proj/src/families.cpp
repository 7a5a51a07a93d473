#include "torsion/families.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "torsion/error.hpp"

namespace torsion {

namespace {

Complex ipow(Complex z, int p) {
  Complex out(1.0);
  for (int k = 0; k < p; ++k) out *= z;
  return out;
}

struct FrozenFrame {
  std::vector<int> betti;
  std::vector<CMatrix> reps;        // F_j
  std::vector<CMatrix> complements;  // Q_j
};

FrozenFrame freeze(const GradedComplex& c, const PhiOptions& options) {
  const CohomologyData h = cohomology(c, options.rank_tol, options.rank_scale);
  const double scale = options.rank_scale > 0.0 ? options.rank_scale : boundary_scale(c);
  FrozenFrame out{h.betti, h.representatives, {}};
  for (int j = 0; j <= c.length(); ++j) {
    if (j < c.length()) {
      out.complements.push_back(rank_nullspace(c.boundaries()[j], options.rank_tol, scale).coimage);
    } else {
      out.complements.push_back(CMatrix(c.dim(j), 0));
    }
  }
  return out;
}

std::shared_ptr<const CohomologyData> transport(const FrozenFrame& frame, const GradedComplex& c,
                                                const PhiOptions& options) {
  auto h = std::make_shared<CohomologyData>();
  h->betti = frame.betti;
  const double scale = options.rank_scale > 0.0 ? options.rank_scale : boundary_scale(c);
  for (int j = 0; j <= c.length(); ++j) {
    CMatrix reps = frame.reps[j];
    if (j < c.length() && reps.cols() > 0 && frame.complements[j].cols() > 0) {
      const CMatrix& d = c.boundaries()[j];
      const CMatrix y = solve_least_squares(d * frame.complements[j], -(d * reps));
      reps += frame.complements[j] * y;
      if (norm(d * reps) > 1e-8 * (norm(d) * norm(reps) + 1.0)) {
        throw NumericalError("cocycle frame cannot be transported to this grid point");
      }
    }
    h->representatives.push_back(reps);
    h->coboundaries.push_back(
        j > 0 ? rank_nullspace(c.boundaries()[j - 1], options.rank_tol, scale).image
              : CMatrix(c.dim(j), 0));
  }
  return h;
}

int index_of(const GridSpec& g, int row, int col) { return row * g.cols + col; }

}  // namespace

Complex Polynomial::operator()(Complex z) const {
  Complex out(0.0);
  for (const auto& [c, p, q] : terms) out += c * ipow(z, p) * ipow(std::conj(z), q);
  return out;
}

CMatrix PolynomialMatrix::operator()(Complex z) const {
  if (static_cast<int>(entries.size()) != rows * cols) {
    throw ValidationError("polynomial matrix has the wrong number of entries");
  }
  CMatrix out(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) out(i, j) = entries[i * cols + j](z);
  }
  return out;
}

bool PolynomialMatrix::operator==(const PolynomialMatrix& other) const {
  return rows == other.rows && cols == other.cols && entries == other.entries;
}

void GridSpec::validate() const {
  if (!(h > 0.0) || !std::isfinite(h)) throw ValidationError("grid spacing must be positive");
  if (rows < 3 || cols < 3) throw ValidationError("grid needs at least 3x3 points for the stencil");
}

Complex GridSpec::point(int row, int col) const {
  return center + Complex((col - 0.5 * (cols - 1)) * h, (row - 0.5 * (rows - 1)) * h);
}

std::vector<Complex> GridSpec::points() const {
  std::vector<Complex> out;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) out.push_back(point(r, c));
  }
  return out;
}

GridSpec GridSpec::halved() const { return {center, 0.5 * h, rows, cols}; }

GradedComplex AnalyticFamily::at(Complex z) const {
  if (mode == Mode::explicit_matrices) {
    std::vector<CMatrix> evaluated;
    for (const auto& b : boundaries) evaluated.push_back(b(z));
    GradedComplex c(dims, evaluated);
    require_complex(c);
    return c;
  }
  Representation a{n, {}};
  for (const auto& image : images) a.images.push_back(image(z));
  return twisted_complex(cw, a);
}

FamilyValues torsion_family(const AnalyticFamily& f, const GridSpec& grid,
                            const PhiOptions& options) {
  grid.validate();
  FamilyValues out;
  std::map<std::vector<int>, std::pair<int, FrozenFrame>> strata;
  for (Complex z : grid.points()) {
    const GradedComplex c = f.at(z);
    const ComplexShape shape = complex_shape(c, options.rank_tol, options.rank_scale);
    auto it = strata.find(shape.betti);
    if (it == strata.end()) {
      const int id = static_cast<int>(strata.size());
      it = strata.emplace(shape.betti, std::make_pair(id, freeze(c, options))).first;
    }
    const auto h = transport(it->second.second, c, options);
    const DetElement value = phi(c, DetElement(1.0, Frame::standard(c)), h, options);
    out.samples.push_back({z, value.value(), shape.betti, it->second.first});
  }
  out.strata = static_cast<int>(strata.size());
  out.stratum_crossing = out.strata > 1;
  return out;
}

std::vector<double> cr_residuals(const std::vector<Complex>& values, const GridSpec& grid) {
  grid.validate();
  if (static_cast<int>(values.size()) != grid.rows * grid.cols) {
    throw ValidationError("sample count does not match the grid");
  }
  const Complex i(0.0, 1.0);
  std::vector<double> out;
  for (int r = 1; r + 1 < grid.rows; ++r) {
    for (int c = 1; c + 1 < grid.cols; ++c) {
      const Complex east = values[index_of(grid, r, c + 1)];
      const Complex west = values[index_of(grid, r, c - 1)];
      const Complex north = values[index_of(grid, r + 1, c)];
      const Complex south = values[index_of(grid, r - 1, c)];
      out.push_back(std::abs((east - west + i * north - i * south) / (4.0 * grid.h)));
    }
  }
  return out;
}

HolomorphyReport cr_residual(const std::vector<Complex>& values_h,
                             const std::vector<Complex>& values_half, const GridSpec& grid) {
  HolomorphyReport report;
  report.residuals = cr_residuals(values_h, grid);
  const std::vector<double> half = cr_residuals(values_half, grid.halved());
  for (int r = 1; r + 1 < grid.rows; ++r) {
    for (int c = 1; c + 1 < grid.cols; ++c) report.points.push_back(grid.point(r, c));
  }
  double scale = 0.0;
  for (Complex v : values_h) scale = std::max(scale, std::abs(v));
  for (double x : report.residuals) report.max_residual = std::max(report.max_residual, x);
  for (double x : half) report.max_residual_half = std::max(report.max_residual_half, x);
  // Differences of O(1) values at roundoff, divided by 4h.
  const double floor = 1e-12 * (scale + 1.0) / grid.h;
  if (report.max_residual <= floor && report.max_residual_half <= 2.0 * floor) {
    report.roundoff_floor = true;
  } else {
    report.exponent = std::log2(report.max_residual /
                                std::max(report.max_residual_half, std::numeric_limits<double>::min()));
  }
  return report;
}

HolomorphyReport cr_residual(const AnalyticFamily& f, const PhiOptions& options) {
  const FamilyValues coarse = torsion_family(f, f.grid, options);
  const FamilyValues fine = torsion_family(f, f.grid.halved(), options);
  if (coarse.stratum_crossing || fine.stratum_crossing) {
    throw ValidationError("family crosses a stratum (betti numbers jump on the grid)");
  }
  std::vector<Complex> a, b;
  for (const auto& s : coarse.samples) a.push_back(s.value);
  for (const auto& s : fine.samples) b.push_back(s.value);
  return cr_residual(a, b, f.grid);
}

PhaseVerdict phase_constancy(const std::vector<Complex>& f, const std::vector<Complex>& g,
                             double tol, const std::vector<Complex>& weight,
                             const std::optional<GridSpec>& grid) {
  const std::size_t n = f.size();
  if (g.size() != n || (!weight.empty() && weight.size() != n)) {
    throw ValidationError("phase_constancy needs samples of equal length");
  }
  if (!(tol > 0.0)) throw ValidationError("phase_constancy tolerance must be positive");
  if (grid && static_cast<std::size_t>(grid->rows * grid->cols) != n) {
    throw ValidationError("sample count does not match the grid");
  }
  PhaseVerdict verdict;
  std::vector<double> delta(n);
  double max_modulus = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Complex gw = weight.empty() ? g[i] : g[i] * weight[i];
    if (f[i] == Complex(0.0) || gw == Complex(0.0)) {
      throw ValidationError("phase_constancy needs nonvanishing samples");
    }
    max_modulus = std::max({max_modulus, std::abs(f[i]), std::abs(gw)});
    verdict.max_modulus_defect =
        std::max(verdict.max_modulus_defect, std::abs(std::abs(f[i]) - std::abs(gw)));
    double d = std::arg(f[i]) - std::arg(g[i]);
    if (!weight.empty()) d -= std::arg(weight[i]);
    delta[i] = std::remainder(d, 2.0 * kPi);
  }
  if (verdict.max_modulus_defect > tol * max_modulus) {
    std::ostringstream msg;
    msg << "moduli of the two families differ by " << verdict.max_modulus_defect
        << " (tolerance " << tol * max_modulus << ")";
    throw ValidationError(msg.str());
  }

  // Connected components (union-find over grid or path neighbours).
  std::vector<int> parent(n);
  for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<int>(i);
  const auto find = [&](int i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  const auto join = [&](int a, int b) { parent[find(a)] = find(b); };
  if (grid) {
    for (int r = 0; r < grid->rows; ++r) {
      for (int c = 0; c < grid->cols; ++c) {
        if (c + 1 < grid->cols) join(index_of(*grid, r, c), index_of(*grid, r, c + 1));
        if (r + 1 < grid->rows) join(index_of(*grid, r, c), index_of(*grid, r + 1, c));
      }
    }
  } else {
    for (std::size_t i = 1; i < n; ++i) join(static_cast<int>(i - 1), static_cast<int>(i));
  }
  std::map<int, int> ids;
  verdict.component.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int root = find(static_cast<int>(i));
    auto it = ids.emplace(root, static_cast<int>(ids.size())).first;
    verdict.component[i] = it->second;
  }
  std::vector<double> sin_sum(ids.size(), 0.0), cos_sum(ids.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    sin_sum[verdict.component[i]] += std::sin(delta[i]);
    cos_sum[verdict.component[i]] += std::cos(delta[i]);
  }
  for (std::size_t k = 0; k < ids.size(); ++k) {
    verdict.phases.push_back(std::atan2(sin_sum[k], cos_sum[k]));
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double dev = std::abs(std::remainder(delta[i] - verdict.phases[verdict.component[i]],
                                               2.0 * kPi));
    verdict.max_variation = std::max(verdict.max_variation, dev);
  }
  verdict.constant = verdict.max_variation < tol;
  return verdict;
}

double chain_map_residual(const GradedComplex& w, const GradedComplex& c,
                          const std::vector<CMatrix>& j) {
  const int d = w.length();
  if (c.length() != d) throw ValidationError("chain map needs complexes of equal length");
  if (static_cast<int>(j.size()) != d + 1) throw ValidationError("chain map needs one block per degree");
  for (int k = 0; k <= d; ++k) {
    if (j[k].rows() != c.dim(k) || j[k].cols() != w.dim(k)) {
      throw ValidationError("chain map block has the wrong shape");
    }
    require_finite(j[k], "chain map");
  }
  double worst = 0.0;
  for (int k = 0; k < d; ++k) {
    const CMatrix defect = c.boundaries()[k] * j[k] - j[k + 1] * w.boundaries()[k];
    const double scale = norm(c.boundaries()[k]) * norm(j[k]) +
                         norm(j[k + 1]) * norm(w.boundaries()[k]) + 1.0;
    worst = std::max(worst, norm(defect) / scale);
  }
  return worst;
}

ConeComplex cone(const GradedComplex& w, const GradedComplex& c, const std::vector<CMatrix>& j,
                 const ConeOptions& options) {
  require_complex(w, options.tol);
  require_complex(c, options.tol);
  const double residual = chain_map_residual(w, c, j);
  if (residual > options.tol) {
    std::ostringstream msg;
    msg << "J is not a chain map (residual " << residual << ")";
    throw ValidationError(msg.str());
  }
  const int d = w.length();
  std::vector<int> dims(d + 2);
  for (int k = 0; k <= d + 1; ++k) dims[k] = w.dim(k) + c.dim(k - 1);
  std::vector<CMatrix> boundaries;
  const double sign = options.verbatim ? 1.0 : -1.0;
  for (int k = 0; k <= d; ++k) {
    // W^k + C^{k-1} -> W^{k+1} + C^k
    CMatrix block = CMatrix::Zero(dims[k + 1], dims[k]);
    const int wk = w.dim(k);
    const int wk1 = w.dim(k + 1);
    if (k < d) block.topLeftCorner(wk1, wk) = w.boundaries()[k];
    block.block(wk1, 0, c.dim(k), wk) = j[k];
    if (k >= 1) block.block(wk1, wk, c.dim(k), c.dim(k - 1)) = sign * c.boundaries()[k - 1];
    boundaries.push_back(block);
  }
  GradedComplex assembled(dims, boundaries);
  const double square = check_complex(assembled);
  if (square > options.tol) {
    std::ostringstream msg;
    msg << "cone differential does not square to zero (residual " << square << ")";
    if (options.verbatim) {
      msg << "; the block [[d, 0], [J, d]] needs a sign on the target block when J is a chain "
             "map, try the default signed cone";
    }
    throw ValidationError(msg.str());
  }
  return {w, c, j, std::move(assembled)};
}

std::vector<Complex> cohomology_map_dets(const GradedComplex& w, const GradedComplex& c,
                                         const std::vector<CMatrix>& j,
                                         const PhiOptions& options) {
  const double residual = chain_map_residual(w, c, j);
  if (residual > options.complex_tol) throw ValidationError("J is not a chain map");
  const CohomologyData hw = cohomology(w, options.rank_tol);
  const CohomologyData hc = cohomology(c, options.rank_tol);
  if (hw.betti != hc.betti) throw ValidationError("J cannot be a quasi-isomorphism: betti differ");
  std::vector<Complex> out;
  for (int k = 0; k <= w.length(); ++k) {
    const int b = hw.betti[k];
    if (b == 0) {
      out.push_back(1.0);
      continue;
    }
    CMatrix system(c.dim(k), b + hc.coboundaries[k].cols());
    system << hc.representatives[k], hc.coboundaries[k];
    const CMatrix image = j[k] * hw.representatives[k];
    const CMatrix coeffs = solve_least_squares(system, image);
    if (norm(system * coeffs - image) > 1e-8 * (norm(image) + 1.0)) {
      throw NumericalError("J does not map cocycles to cocycles");
    }
    const CMatrix t = coeffs.topRows(b);
    const Eigen::VectorXd s = Eigen::JacobiSVD<CMatrix>(t).singularValues();
    if (s(b - 1) < 1e-10 * std::max(s(0), 1.0)) {
      throw ValidationError("J is not a quasi-isomorphism");
    }
    out.push_back(det(t));
  }
  return out;
}

double cone_modulus_prediction(const GradedComplex& w, const GradedComplex& c,
                               const std::vector<CMatrix>& j, const PhiOptions& options) {
  const std::vector<Complex> dets = cohomology_map_dets(w, c, j, options);
  const auto modulus = [&](const GradedComplex& x) {
    auto h = std::make_shared<const CohomologyData>(cohomology(x, options.rank_tol));
    return std::abs(phi(x, DetElement(1.0, Frame::standard(x)), h, options).value());
  };
  double out = modulus(w) / modulus(c);
  for (std::size_t k = 0; k < dets.size(); ++k) {
    out = (k % 2 == 0) ? out * std::abs(dets[k]) : out / std::abs(dets[k]);
  }
  return out;
}

}  // namespace torsion
