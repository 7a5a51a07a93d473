#include <doctest.h>

#include <filesystem>
#include <random>

#include "helpers.hpp"
#include "torsion/error.hpp"
#include "torsion/io.hpp"
#include "torsion/random_models.hpp"

using namespace torsion;
using testing_support::mat;
using testing_support::rel;

namespace {

std::string corpus(const std::string& name) {
  return std::string(TORSION_DATA_DIR) + "/corpus/" + name + ".json";
}

CWSystem load_cw(const std::string& name) { return cw_from_json(read_json_file(corpus(name))); }

Representation scalar(std::vector<Complex> values) {
  Representation a{1, {}};
  for (Complex v : values) a.images.push_back(CMatrix::Constant(1, 1, v));
  return a;
}

// Scalar evaluation of a group-ring matrix straight from the file's JSON.
oracle::Mat evaluate_scalar(const Json& boundary, const std::vector<Complex>& gens) {
  const int rows = boundary["shape"][0];
  const int cols = boundary["shape"][1];
  oracle::Mat out = oracle::zeros(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      for (const auto& term : boundary["entries"][i][j]) {
        oracle::Cx g = 1;
        for (int x : term[1]) {
          const Complex v = gens[std::abs(x) - 1];
          const oracle::Cx w(v.real(), v.imag());
          g = x > 0 ? g * w : g / w;
        }
        out[i][j] += static_cast<long double>(term[0].get<long>()) * g;
      }
      // entries vanishing in exact arithmetic (norm elements at roots of unity)
      if (std::abs(out[i][j]) < 1e-12L) out[i][j] = 0;
    }
  }
  return out;
}

oracle::Complex_ scalar_complex(const Json& cw, const std::vector<Complex>& gens) {
  oracle::Complex_ c;
  std::vector<int> counts;
  for (const auto& cell : cw["cells"]) {
    const int d = cell["dim"];
    if (static_cast<int>(counts.size()) <= d) counts.resize(d + 1, 0);
    ++counts[d];
  }
  c.dims = counts;
  for (const auto& b : cw["boundaries"]) c.boundaries.push_back(evaluate_scalar(b, gens));
  return c;
}

}  // namespace

TEST_CASE("rep_check examples") {
  GroupPresentation z{1, {}};
  CHECK(rep_check(z, scalar({3.0})) == 0.0);
  GroupPresentation z5{1, {{1, 1, 1, 1, 1}}};
  CHECK(rep_check(z5, scalar({std::polar(1.0, 2.0 * kPi / 5.0)})) < 1e-14);
  CHECK(rep_check(z5, scalar({2.0})) == doctest::Approx(31.0));
  CHECK_THROWS_AS(require_representation(z5, scalar({2.0})), ValidationError);
  CHECK_THROWS_AS(rep_check(z, scalar({0.0})), ValidationError);
}

TEST_CASE("words are validated") {
  GroupPresentation g{2, {}};
  CHECK_NOTHROW(g.validate_word({1, -2}));
  CHECK_THROWS_AS(g.validate_word({0}), ValidationError);
  CHECK_THROWS_AS(g.validate_word({3}), ValidationError);
}

TEST_CASE("evaluate_boundary examples") {
  GroupRingMatrix t_minus_1{1, 1, {GroupRingElement{{{1, {1}}, {-1, {}}}}}};
  CHECK(std::abs(evaluate_boundary(t_minus_1, scalar({3.0}))(0, 0) - 2.0) < 1e-15);
  GroupRingMatrix norm5{1, 1, {GroupRingElement{{{1, {}}, {1, {1}}, {1, {1, 1}}, {1, {1, 1, 1}}, {1, {1, 1, 1, 1}}}}}};
  CHECK(std::abs(evaluate_boundary(norm5, scalar({std::polar(1.0, 2.0 * kPi / 5.0)}))(0, 0)) < 1e-15);
  GroupRingMatrix zero{1, 1, {GroupRingElement{}}};
  Representation two{2, {CMatrix::Identity(2, 2) * 4.0}};
  CHECK(norm(evaluate_boundary(zero, two)) == 0.0);
  CHECK(evaluate_boundary(zero, two).rows() == 2);
}

TEST_CASE("evaluation is multiplicative along words") {
  std::mt19937_64 rng(1);
  Representation a{2, {random_invertible(rng, 2), random_invertible(rng, 2)}};
  const CMatrix lhs = evaluate_word(a, {1, -2, 2, 1});
  const CMatrix rhs = a.images[0] * a.images[0];
  CHECK(norm(lhs - rhs) < 1e-12 * norm(rhs));
  CHECK(norm(evaluate_word(a, {}) - CMatrix::Identity(2, 2)) == 0.0);
}

TEST_CASE("det_rep_word examples") {
  const Complex l(1.5, -0.5);
  CHECK(rel(det_rep_word(scalar({l}), {1}), l) < 1e-15);
  CHECK(rel(det_rep_word(scalar({l}), {1, -1}), 1.0) < 1e-15);
  Representation d{2, {mat({{2.0, 0.0}, {0.0, 3.0}})}};
  CHECK(rel(det_rep_word(d, {1, 1}), 36.0) < 1e-15);
}

TEST_CASE("det_rep_word is a homomorphism") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    Representation a{3, {random_invertible(rng, 3), random_invertible(rng, 3)}};
    Word w1, w2;
    for (int k = 0; k < 3; ++k) w1.push_back((trial + k) % 2 == 0 ? 1 : -2);
    for (int k = 0; k < 2; ++k) w2.push_back((trial * k) % 3 == 0 ? 2 : -1);
    Word joined = w1;
    joined.insert(joined.end(), w2.begin(), w2.end());
    CHECK(rel(det_rep_word(a, joined), det_rep_word(a, w1) * det_rep_word(a, w2)) < 1e-12);
  }
}

TEST_CASE("circle torsion") {
  const CWSystem circle = load_cw("circle");
  CHECK(rel(ft_torsion(circle, scalar({3.0})).value(), 2.0) < 1e-15);
  const DetElement trivial = ft_torsion(circle, scalar({1.0}));
  REQUIRE(trivial.frame().cohomology);
  CHECK(trivial.frame().cohomology->betti == std::vector<int>{1, 1});
  CHECK(std::abs(std::abs(trivial.value()) - 1.0) < 1e-14);
}

TEST_CASE("circle closed form over a grid") {
  const CWSystem circle = load_cw("circle");
  const Json raw = read_json_file(corpus("circle"));
  for (int i = 0; i < 50; ++i) {
    const Complex lambda = 1.0 + std::polar(0.05 + 0.2 * (i % 10), 0.7 + 1.3 * (i / 10));
    const Complex brute = testing_support::narrow(oracle::phi_acyclic(scalar_complex(raw, {lambda})));
    CHECK(rel(brute, lambda - 1.0) < 1e-15);
    CHECK(rel(ft_torsion(circle, scalar({lambda})).value(), brute) < 1e-10);
  }
}

TEST_CASE("lens space torsion matches the brute-force oracle") {
  for (const auto& path : std::filesystem::directory_iterator(std::string(TORSION_DATA_DIR) + "/corpus")) {
    const std::string name = path.path().stem().string();
    if (name.rfind("lens_", 0) != 0) continue;
    const Json raw = read_json_file(path.path().string());
    const CWSystem k = cw_from_json(raw);
    const int p = static_cast<int>(raw["presentation"]["relations"][0].size());
    for (int m = 1; m < p; ++m) {
      const Complex zeta = std::polar(1.0, 2.0 * kPi * m / p);
      const Complex brute = testing_support::narrow(oracle::phi_acyclic(scalar_complex(raw, {zeta})));
      CHECK(rel(ft_torsion(k, scalar({zeta})).value(), brute) < 1e-10);
    }
  }
}

TEST_CASE("L(5,1) modulus") {
  const Complex zeta = std::polar(1.0, 2.0 * kPi / 5.0);
  const double expected = std::pow(2.0 * std::sin(kPi / 5.0), 2.0);
  CHECK(std::abs(std::abs(ft_torsion(load_cw("lens_5_1"), scalar({zeta})).value()) - expected) < 1e-12);
}

TEST_CASE("shift_lifts examples") {
  const CWSystem circle = load_cw("circle");
  const Complex lambda(2.0, 1.0);
  const Representation a = scalar({lambda});
  const Complex base = ft_torsion(circle, a).value();
  CHECK(shift_lifts(circle, {}) == circle);
  CHECK(shift_lifts(circle, {{}, {}}) == circle);
  const Complex one_cell = ft_torsion(shift_lifts(circle, {{}, {1}}), a).value();
  CHECK(rel(one_cell / base, lambda) < 1e-14);
  CHECK(euler_shift_exponent(1) == 1);
  const Complex both = ft_torsion(shift_lifts(circle, {{1}, {1}}), a).value();
  CHECK(rel(both / base, 1.0) < 1e-14);
  const Complex zero_cell = ft_torsion(shift_lifts(circle, {{1}, {}}), a).value();
  CHECK(rel(zero_cell / base, 1.0 / lambda) < 1e-14);
  CHECK(euler_shift_exponent(0) == -1);
  CHECK_THROWS_AS(shift_lifts(circle, {{1}}), ValidationError);
  CHECK_THROWS_AS(shift_lifts(circle, {{}, {2}}), ValidationError);
}

TEST_CASE("Euler shift law on the corpus") {
  std::mt19937_64 rng(7);
  for (const char* name : {"circle", "torus", "lens_5_1", "lens_7_3", "lens_4_3"}) {
    const CWSystem k = load_cw(name);
    for (int trial = 0; trial < 20; ++trial) {
      const int n = 1 + trial % 3;
      const Representation a = random_representation(rng, k.presentation, n);
      CHECK(rep_check(k.presentation, a) < 1e-10);
      std::vector<Word> shifts(k.cell_dims.size());
      for (std::size_t e = 0; e < shifts.size(); ++e) {
        const int len = static_cast<int>((trial + e) % 3);
        for (int t = 0; t < len; ++t) {
          const int g = 1 + static_cast<int>((e + t) % k.presentation.generators);
          shifts[e].push_back((trial + t) % 2 == 0 ? g : -g);
        }
      }
      const Complex before = ft_torsion(k, a).value();
      const Complex after = ft_torsion(shift_lifts(k, shifts), a).value();
      CHECK(rel(after / before, euler_shift_factor(k, a, shifts)) < 1e-9);
    }
  }
}

TEST_CASE("orientation flip multiplies by (-1)^n") {
  std::mt19937_64 rng(9);
  for (const char* name : {"circle", "torus", "lens_3_1", "lens_6_5"}) {
    const CWSystem k = load_cw(name);
    const CWSystem flipped = flip_orientation(k);
    CHECK_FALSE(flipped == k);
    for (int n = 1; n <= 3; ++n) {
      for (int trial = 0; trial < 5; ++trial) {
        const Representation a = random_representation(rng, k.presentation, n, trial % 2 == 0);
        const Complex plain = ft_torsion(k, a).value();
        const Complex flip = ft_torsion(k, a, true).value();
        CHECK(rel(flip, (n % 2 == 0 ? 1.0 : -1.0) * plain) < 1e-12);
      }
    }
  }
}

TEST_CASE("twisted complexes are flat") {
  std::mt19937_64 rng(10);
  for (const char* name : {"torus", "lens_7_2", "lens_5_3"}) {
    const CWSystem k = load_cw(name);
    for (int n = 1; n <= 3; ++n) {
      const Representation a = random_representation(rng, k.presentation, n, false);
      const GradedComplex c = twisted_complex(k, a);
      CHECK(check_complex(c) < 1e-10);
      CHECK(c.dim(0) == n * k.count(0));
    }
  }
}

TEST_CASE("a representation off the relations is not flat") {
  const CWSystem lens = load_cw("lens_5_1");
  CHECK_THROWS_AS(twisted_complex(lens, scalar({2.0})), ValidationError);
}

TEST_CASE("torus with the trivial representation has cohomology") {
  const DetElement t = ft_torsion(load_cw("torus"), scalar({1.0, 1.0}));
  CHECK(t.frame().cohomology->betti == std::vector<int>{1, 2, 1});
}

TEST_CASE("random representations respect commutators") {
  std::mt19937_64 rng(11);
  const CWSystem torus = load_cw("torus");
  for (int n = 1; n <= 3; ++n) {
    const Representation a = random_representation(rng, torus.presentation, n);
    CHECK(rep_check(torus.presentation, a) < 1e-10);
  }
  GroupPresentation free_rel{2, {{1, 2, 2}}};
  CHECK_THROWS_AS(random_representation(rng, free_rel, 1), ValidationError);
}
