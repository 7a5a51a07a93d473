#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "torsion/refined.hpp"

namespace torsion {

/// SplitMix64 step; used to derive independent per-instance seeds.
std::uint64_t splitmix64(std::uint64_t& state);

/// Seed of instance i under a root seed.
std::uint64_t instance_seed(std::uint64_t root, std::uint64_t i);

/// Entries i.i.d. standard complex Gaussian.
CMatrix random_matrix(std::mt19937_64& rng, Index rows, Index cols);

/// Random invertible matrix with condition number kept moderate.
CMatrix random_invertible(std::mt19937_64& rng, Index n);

/// Complex with the given dims and boundary ranks (rank of d_j is ranks[j]),
/// conjugated by random changes of basis in every degree.
GradedComplex random_complex(std::mt19937_64& rng, const std::vector<int>& dims,
                             const std::vector<int>& ranks);

/// Random dims and ranks for a complex of length d with m_j = m_{d-j},
/// 1 <= m_j <= max_dim. If acyclic, ranks are chosen so all betti vanish
/// (dims are adjusted to make that possible).
GradedComplex random_symmetric_complex(std::mt19937_64& rng, int d, int max_dim, bool acyclic);

/// Random chirality (random invertible lower blocks, completed by inversion).
Chirality random_chirality(std::mt19937_64& rng, const GradedComplex& c);

struct RandomModel {
  GradedComplex complex;
  Chirality chirality;
};

/// Model for the spectral suites: d drawn from {1, 3}, dims <= max_dim,
/// acyclic or not at random.
RandomModel random_model(std::uint64_t seed, int max_dim = 4);

}  // namespace torsion
