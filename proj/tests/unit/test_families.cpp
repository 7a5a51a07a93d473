#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "torsion/error.hpp"
#include "torsion/families.hpp"
#include "torsion/io.hpp"
#include "torsion/random_models.hpp"

using namespace torsion;
using testing_support::mat;
using testing_support::rel;

namespace {

PolynomialMatrix scalar_poly(std::vector<std::tuple<Complex, int, int>> terms) {
  return PolynomialMatrix{1, 1, {Polynomial{std::move(terms)}}};
}

AnalyticFamily scalar_family(std::vector<std::tuple<Complex, int, int>> terms, Complex center,
                             double h = 0.05) {
  AnalyticFamily f;
  f.grid = GridSpec{center, h, 5, 5};
  f.dims = {1, 1};
  f.boundaries = {scalar_poly(std::move(terms))};
  return f;
}

std::vector<Complex> sample(const GridSpec& g, Complex (*fn)(Complex)) {
  std::vector<Complex> out;
  for (Complex z : g.points()) out.push_back(fn(z));
  return out;
}

AnalyticFamily load_family(const std::string& name) {
  return family_from_json(read_json_file(std::string(TORSION_DATA_DIR) + "/families/" + name + ".json"));
}

}  // namespace

TEST_CASE("polynomials evaluate in z and conj z") {
  const Polynomial p{{{2.0, 2, 0}, {Complex(0.0, 1.0), 0, 1}, {-1.0, 0, 0}}};
  const Complex z(1.0, 2.0);
  CHECK(std::abs(p(z) - (2.0 * z * z + Complex(0.0, 1.0) * std::conj(z) - 1.0)) < 1e-14);
  CHECK(Polynomial{}(z) == Complex(0.0));
}

TEST_CASE("grid validation") {
  CHECK_THROWS_AS((GridSpec{0.0, 0.0, 5, 5}.validate()), ValidationError);
  CHECK_THROWS_AS((GridSpec{0.0, 0.1, 2, 5}.validate()), ValidationError);
  const GridSpec g{Complex(1.0, -1.0), 0.1, 3, 5};
  CHECK(g.points().size() == 15);
  CHECK(std::abs(g.point(1, 2) - Complex(1.0, -1.0)) < 1e-15);
  CHECK(std::abs(g.point(2, 2) - Complex(1.0, -0.9)) < 1e-15);
  CHECK(g.halved().h == doctest::Approx(0.05));
}

TEST_CASE("torsion_family examples") {
  const FamilyValues linear = torsion_family(scalar_family({{1.0, 1, 0}}, 2.0));
  for (const auto& s : linear.samples) CHECK(rel(s.value, s.z) < 1e-15);
  const FamilyValues anti = torsion_family(scalar_family({{1.0, 0, 1}, {2.0, 0, 0}}, 1.0));
  for (const auto& s : anti.samples) CHECK(rel(s.value, std::conj(s.z) + 2.0) < 1e-15);
  const FamilyValues constant = torsion_family(scalar_family({{5.0, 0, 0}}, 0.0));
  for (const auto& s : constant.samples) CHECK(s.value == Complex(5.0));
  CHECK_FALSE(constant.stratum_crossing);
}

TEST_CASE("cr_residuals examples") {
  const GridSpec g{Complex(0.5, 0.5), 0.1, 5, 5};
  const auto square = cr_residuals(sample(g, [](Complex z) { return z * z; }), g);
  CHECK(square.size() == 9);
  for (double r : square) CHECK(r < 1e-13);
  for (double r : cr_residuals(sample(g, [](Complex z) { return std::conj(z); }), g)) {
    CHECK(r == doctest::Approx(1.0));
  }
  CHECK_THROWS_AS(cr_residuals({1.0, 2.0}, g), ValidationError);
}

TEST_CASE("cr residual of a quartic scales like h^2") {
  const GridSpec g{Complex(0.7, 0.2), 0.05, 5, 5};
  auto quartic = [](Complex z) { return z * z * z * z; };
  const HolomorphyReport r = cr_residual(sample(g, quartic), sample(g.halved(), quartic), g);
  REQUIRE(r.exponent);
  CHECK(*r.exponent == doctest::Approx(2.0).epsilon(0.05));
  CHECK_FALSE(r.roundoff_floor);
}

TEST_CASE("quadratic samples sit at the roundoff floor") {
  const GridSpec g{Complex(0.7, 0.2), 0.05, 5, 5};
  auto square = [](Complex z) { return z * z; };
  const HolomorphyReport r = cr_residual(sample(g, square), sample(g.halved(), square), g);
  CHECK(r.roundoff_floor);
  CHECK_FALSE(r.exponent);
}

TEST_CASE("corpus families") {
  for (const char* name : {"cubic", "length3_polynomial", "rank1_nonacyclic", "circle_n2"}) {
    const HolomorphyReport r = cr_residual(load_family(name));
    REQUIRE(r.exponent);
    CHECK(*r.exponent >= 1.7);
  }
  const HolomorphyReport circle = cr_residual(load_family("circle"));
  CHECK(circle.max_residual < 1e-10);
  const HolomorphyReport anti = cr_residual(load_family("antiholomorphic"));
  CHECK(anti.max_residual == doctest::Approx(1.0));
  CHECK(*anti.exponent < 0.5);
}

TEST_CASE("stratum crossing is detected") {
  const AnalyticFamily f = load_family("stratum_crossing");
  const FamilyValues v = torsion_family(f);
  CHECK(v.stratum_crossing);
  CHECK(v.strata == 2);
  CHECK_THROWS_AS(cr_residual(f), ValidationError);
}

TEST_CASE("non-acyclic family stays in one stratum") {
  const AnalyticFamily f = load_family("rank1_nonacyclic");
  const FamilyValues v = torsion_family(f);
  CHECK_FALSE(v.stratum_crossing);
  for (const auto& s : v.samples) {
    CHECK(s.betti == std::vector<int>{1, 1});
    CHECK(s.stratum == 0);
    CHECK(std::abs(s.value) > 0.0);
  }
}

TEST_CASE("phase_constancy examples") {
  std::mt19937_64 rng(3);
  std::vector<Complex> g, f;
  const Complex u = std::polar(1.0, kPi / 3.0);
  for (int i = 0; i < 12; ++i) {
    g.push_back(random_matrix(rng, 1, 1)(0, 0));
    f.push_back(u * g.back());
  }
  const PhaseVerdict ok = phase_constancy(f, g, 1e-10);
  CHECK(ok.constant);
  REQUIRE(ok.phases.size() == 1);
  CHECK(ok.phases[0] == doctest::Approx(kPi / 3.0));
  const PhaseVerdict zero = phase_constancy(g, g, 1e-10);
  CHECK(zero.constant);
  CHECK(zero.phases[0] == 0.0);
  std::vector<Complex> varying;
  for (int i = 0; i < 12; ++i) varying.push_back(std::polar(1.0, 0.3 * i) * g[i]);
  CHECK_FALSE(phase_constancy(varying, g, 1e-10).constant);
}

TEST_CASE("phase_constancy errors") {
  CHECK_THROWS_AS(phase_constancy({2.0}, {1.0}, 1e-10), ValidationError);
  CHECK_THROWS_AS(phase_constancy({0.0}, {0.0}, 1e-10), ValidationError);
  CHECK_THROWS_AS(phase_constancy({1.0, 1.0}, {1.0}, 1e-10), ValidationError);
  CHECK_THROWS_AS(phase_constancy({1.0}, {1.0}, 0.0), ValidationError);
}

TEST_CASE("phase_constancy with a weight") {
  const std::vector<Complex> f = {Complex(0.0, 2.0), Complex(0.0, -3.0)};
  const std::vector<Complex> g = {1.0, -1.0};
  const std::vector<Complex> w = {2.0, 3.0};
  const PhaseVerdict v = phase_constancy(f, g, 1e-12, w);
  CHECK(v.constant);
  CHECK(v.phases[0] == doctest::Approx(kPi / 2.0));
}

TEST_CASE("cone of the identity has unimodular torsion") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const GradedComplex w = random_symmetric_complex(rng, 1 + 2 * (trial % 2), 3, trial % 3 == 0);
    std::vector<CMatrix> id;
    for (int k = 0; k <= w.length(); ++k) id.push_back(CMatrix::Identity(w.dim(k), w.dim(k)));
    const ConeComplex c = cone(w, w, id);
    CHECK(check_complex(c.assembled) < 1e-12);
    CHECK(cohomology(c.assembled).betti == std::vector<int>(w.length() + 2, 0));
    CHECK(std::abs(std::abs(torsion_acyclic(c.assembled)) - 1.0) < 1e-10);
  }
}

TEST_CASE("cone of a scalar multiple") {
  const GradedComplex w({1, 1}, {mat({{Complex(2.0, 1.0)}})});
  const ConeComplex c = cone(w, w, {mat({{2.0}}), mat({{2.0}})});
  const Complex brute = testing_support::narrow(oracle::phi_acyclic(testing_support::to_oracle(c.assembled)));
  CHECK(std::abs(brute) == doctest::Approx(1.0));
  CHECK(rel(torsion_acyclic(c.assembled), brute) < 1e-14);
}

TEST_CASE("cone of the zero complex") {
  std::mt19937_64 rng(6);
  const GradedComplex c = random_symmetric_complex(rng, 3, 3, true);
  const GradedComplex zero = GradedComplex::zero(std::vector<int>(4, 0));
  std::vector<CMatrix> j;
  for (int k = 0; k <= 3; ++k) j.push_back(CMatrix::Zero(c.dim(k), 0));
  const ConeComplex cc = cone(zero, c, j);
  CHECK(std::abs(std::abs(torsion_acyclic(cc.assembled)) - 1.0 / std::abs(torsion_acyclic(c))) < 1e-9);
}

TEST_CASE("verbatim cone only squares to zero when J d vanishes") {
  const GradedComplex w({1, 1}, {mat({{3.0}})});
  ConeOptions verbatim;
  verbatim.verbatim = true;
  try {
    cone(w, w, {mat({{1.0}}), mat({{1.0}})}, verbatim);
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("signed cone") != std::string::npos);
  }
  const GradedComplex z = GradedComplex::zero({1, 1});
  CHECK_NOTHROW(cone(z, z, {mat({{1.0}}), mat({{1.0}})}, verbatim));
}

TEST_CASE("cone rejects maps that are not chain maps") {
  const GradedComplex w({1, 1}, {mat({{3.0}})});
  CHECK_THROWS_AS(cone(w, w, {mat({{1.0}}), mat({{2.0}})}), ValidationError);
  CHECK_THROWS_AS(cone(w, w, {mat({{1.0}})}), ValidationError);
  const GradedComplex z = GradedComplex::zero({1, 1});
  CHECK_THROWS_AS(cohomology_map_dets(z, z, {mat({{0.0}}), mat({{1.0}})}), ValidationError);
}

TEST_CASE("cone modulus law against the oracle for acyclic complexes") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const GradedComplex w = random_symmetric_complex(rng, 3, 3, true);
    std::vector<CMatrix> m, b, j;
    for (int k = 0; k <= 3; ++k) m.push_back(random_invertible(rng, w.dim(k)));
    for (int k = 0; k < 3; ++k) b.push_back(m[k + 1].inverse() * w.boundaries()[k] * m[k]);
    for (int k = 0; k <= 3; ++k) j.push_back(m[k].inverse());
    const GradedComplex c(w.dims(), b);
    const ConeComplex cc = cone(w, c, j);
    const long double tw = std::abs(oracle::phi_acyclic(testing_support::to_oracle(w)));
    const long double tc = std::abs(oracle::phi_acyclic(testing_support::to_oracle(c)));
    const double expected = static_cast<double>(tw / tc);
    CHECK(std::abs(std::abs(torsion_acyclic(cc.assembled)) - expected) < 1e-8 * expected);
    CHECK(std::abs(cone_modulus_prediction(w, c, j) - expected) < 1e-8 * expected);
  }
}

TEST_CASE("cone modulus law with cohomology") {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    const GradedComplex w = random_complex(rng, {2, 3, 2}, {1, 1});
    std::vector<CMatrix> m, b, j;
    for (int k = 0; k <= 2; ++k) m.push_back(random_invertible(rng, w.dim(k)));
    for (int k = 0; k < 2; ++k) b.push_back(m[k + 1].inverse() * w.boundaries()[k] * m[k]);
    for (int k = 0; k <= 2; ++k) j.push_back(m[k].inverse());
    const GradedComplex c(w.dims(), b);
    const ConeComplex cc = cone(w, c, j);
    const double predicted = cone_modulus_prediction(w, c, j);
    CHECK(std::abs(std::abs(torsion_acyclic(cc.assembled)) - predicted) < 1e-8 * predicted);
  }
}
