#include "torsion/random_models.hpp"

#include <algorithm>

#include "torsion/error.hpp"

namespace torsion {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t instance_seed(std::uint64_t root, std::uint64_t i) {
  std::uint64_t state = root ^ (i * 0xd1342543de82ef95ULL);
  splitmix64(state);
  return splitmix64(state);
}

CMatrix random_matrix(std::mt19937_64& rng, Index rows, Index cols) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  CMatrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = Complex(gauss(rng), gauss(rng));
  }
  return m;
}

CMatrix random_invertible(std::mt19937_64& rng, Index n) {
  // Identity plus a small perturbation keeps the condition number near 1-10.
  for (int attempt = 0; attempt < 100; ++attempt) {
    const CMatrix m = CMatrix::Identity(n, n) + random_matrix(rng, n, n) * (0.4 / std::sqrt(n + 1.0));
    if (n == 0) return m;
    const Eigen::VectorXd s = Eigen::JacobiSVD<CMatrix>(m).singularValues();
    if (s(n - 1) > 0.1 * s(0)) {
      std::uniform_real_distribution<double> angle(-kPi, kPi);
      std::uniform_real_distribution<double> scale(0.5, 2.0);
      return m * std::polar(scale(rng), angle(rng));
    }
  }
  throw NumericalError("could not draw a well-conditioned random matrix");
}

GradedComplex random_complex(std::mt19937_64& rng, const std::vector<int>& dims,
                             const std::vector<int>& ranks) {
  const int d = static_cast<int>(dims.size()) - 1;
  if (static_cast<int>(ranks.size()) != d) throw ValidationError("one rank per boundary needed");
  for (int j = 0; j <= d; ++j) {
    const int in = j < d ? ranks[j] : 0;
    const int out = j > 0 ? ranks[j - 1] : 0;
    if (in + out > dims[j] || in < 0 || out < 0) throw ValidationError("ranks do not fit the dims");
  }
  std::vector<CMatrix> change(d + 1);
  for (int j = 0; j <= d; ++j) change[j] = random_invertible(rng, dims[j]);
  std::vector<CMatrix> boundaries;
  for (int j = 0; j < d; ++j) {
    // The last ranks[j] coordinates of degree j map onto the first ones of j+1.
    CMatrix normal = CMatrix::Zero(dims[j + 1], dims[j]);
    for (int k = 0; k < ranks[j]; ++k) normal(k, dims[j] - ranks[j] + k) = 1.0;
    boundaries.push_back(change[j + 1] * normal * change[j].inverse());
  }
  return GradedComplex(dims, boundaries);
}

GradedComplex random_symmetric_complex(std::mt19937_64& rng, int d, int max_dim, bool acyclic) {
  const int r = (d + 1) / 2;
  std::uniform_int_distribution<int> dim_dist(1, max_dim);
  std::vector<int> dims(d + 1);
  std::vector<int> ranks(d, 0);
  if (acyclic) {
    // Acyclic with m_j = m_{d-j}: pick ranks, then dims are forced.
    // m_j = r_{j-1} + r_j, symmetric dims need r_{j-1} + r_j = r_{d-j-1} + r_{d-j}.
    for (int attempt = 0; attempt < 1000; ++attempt) {
      std::uniform_int_distribution<int> rank_dist(0, max_dim);
      for (int j = 0; j < r; ++j) ranks[j] = rank_dist(rng);
      // Symmetry of dims forces r_{d-1-j} = r_j.
      for (int j = 0; j < r; ++j) ranks[d - 1 - j] = ranks[j];
      bool ok = true;
      for (int j = 0; j <= d; ++j) {
        dims[j] = (j > 0 ? ranks[j - 1] : 0) + (j < d ? ranks[j] : 0);
        if (dims[j] < 1 || dims[j] > max_dim) ok = false;
      }
      if (ok) return random_complex(rng, dims, ranks);
    }
    throw ValidationError("no acyclic symmetric complex fits the requested dims");
  }
  for (int j = 0; j < r; ++j) {
    dims[j] = dim_dist(rng);
    dims[d - j] = dims[j];
  }
  for (int j = 0; j < d; ++j) {
    const int used = j > 0 ? ranks[j - 1] : 0;
    const int room = std::min(dims[j] - used, dims[j + 1]);
    std::uniform_int_distribution<int> rank_dist(0, std::max(room, 0));
    ranks[j] = rank_dist(rng);
  }
  return random_complex(rng, dims, ranks);
}

Chirality random_chirality(std::mt19937_64& rng, const GradedComplex& c) {
  const int r = (c.length() + 1) / 2;
  std::vector<CMatrix> lower;
  for (int j = 0; j < r; ++j) lower.push_back(random_invertible(rng, c.dim(j)));
  return Chirality::from_lower(c, lower);
}

RandomModel random_model(std::uint64_t seed, int max_dim) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> coin(0, 1);
  const int d = coin(rng) ? 3 : 1;
  const bool acyclic = coin(rng) == 1;
  GradedComplex c = random_symmetric_complex(rng, d, max_dim, acyclic);
  Chirality g = random_chirality(rng, c);
  return {std::move(c), std::move(g)};
}

}  // namespace torsion
