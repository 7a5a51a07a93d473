// One line per acceptance criterion; exit status 1 if any fails.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <string>

#include "helpers.hpp"
#include "torsion/families.hpp"
#include "torsion/io.hpp"
#include "torsion/random_models.hpp"
#include "torsion/spectral.hpp"
#include "torsion/verify.hpp"

using namespace torsion;
using testing_support::narrow;
using testing_support::rel;
using testing_support::to_oracle;

namespace {

constexpr std::uint64_t kRoot = 20261016;

struct Outcome {
  bool passed = true;
  std::string detail;
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

std::string data(const std::string& rel) { return std::string(TORSION_DATA_DIR) + "/" + rel; }

std::vector<oracle::Mat> reps_of(const CohomologyData& h) {
  std::vector<oracle::Mat> out;
  for (const auto& r : h.representatives) out.push_back(to_oracle(r));
  return out;
}

AgmonAngle angle_above(const OddSignatureModel& m, double lambda) {
  return default_agmon_angle(graded_spectrum(m, SpectralCut::exterior(lambda)));
}

Complex scalar_c_gamma_oracle(const GradedComplex& c, const Chirality& g) {
  const int r = (c.length() + 1) / 2;
  oracle::Cx value = (r_sign(c) % 2 == 0) ? 1.0L : -1.0L;
  for (int j = 0; j < r; ++j) {
    const oracle::Cx dj = oracle::det(to_oracle(g.block(j)));
    value = (j % 2 == 0) ? value / dj : value * dj;
  }
  return narrow(value);
}

// Restriction of a (square) map to span(basis), basis of full column rank.
CMatrix restrict_to(const CMatrix& map, const CMatrix& basis) {
  if (basis.cols() == 0) return CMatrix(0, 0);
  return basis.colPivHouseholderQr().solve(map * basis);
}

// Embeds per-degree bases of the even degrees into the full space.
CMatrix even_embedding(const GradedComplex& c, const std::vector<CMatrix>& bases) {
  Index total = 0, cols = 0;
  for (int j = 0; j <= c.length(); ++j) total += c.dim(j);
  for (int j = 0; j <= c.length(); j += 2) cols += bases[j].cols();
  CMatrix e = CMatrix::Zero(total, cols);
  Index row = 0, col = 0;
  for (int j = 0; j <= c.length(); ++j) {
    if (j % 2 == 0) {
      e.block(row, col, c.dim(j), bases[j].cols()) = bases[j];
      col += bases[j].cols();
    }
    row += c.dim(j);
  }
  return e;
}

std::vector<std::string> corpus_cw(const std::string& prefix) {
  std::vector<std::string> out;
  for (const auto& p : corpus_files(TORSION_DATA_DIR, "corpus", prefix)) {
    if (read_json_file(p).contains("cells")) out.push_back(p);
  }
  return out;
}

// ---------------------------------------------------------------------------

Outcome lambda_independence() {
  double worst = 0.0;
  int cuts = 0;
  for (int i = 0; i < 200; ++i) {
    const RandomModel model = random_model(instance_seed(kRoot, i));
    const OddSignatureModel m = odd_signature(model.complex, model.chirality);
    const std::vector<double> lambdas = admissible_lambdas(m);
    std::vector<Complex> values;
    for (double l : lambdas) values.push_back(rho_lambda(m, l, angle_above(m, l)).value());
    for (const Complex v : values) worst = std::max(worst, rel(v, values.front()));
    cuts += static_cast<int>(lambdas.size());
  }
  return {worst <= 1e-8, fmt("200 models, %.0f cuts, max rel dev %.2e", cuts, worst)};
}

Outcome theta_independence() {
  const std::vector<double> grid = {-0.1, -kPi / 4.0, -kPi / 2.0, -3.0 * kPi / 4.0, -3.0};
  double worst = 0.0, worst_det = 0.0;
  int compared = 0;
  for (int i = 0; i < 200; ++i) {
    const RandomModel model = random_model(instance_seed(kRoot, i));
    const OddSignatureModel m = odd_signature(model.complex, model.chirality);
    std::vector<double> lambdas = admissible_lambdas(m);
    lambdas.pop_back();
    for (double l : lambdas) {
      const SpectralCut cut = SpectralCut::exterior(l);
      const std::vector<Complex> spectrum = graded_spectrum(m, cut);
      std::vector<Complex> values;
      for (double t : grid) {
        if (AgmonAngle(t).admissible_for(spectrum)) values.push_back(graded_det(m, cut, AgmonAngle(t)).value);
      }
      for (const Complex v : values) worst = std::max(worst, rel(v, values.front()));
      compared += static_cast<int>(values.size());
      // plain determinants of the restricted operators
      const SpectralSubspace sub = spectral_subspace(m, cut);
      const PlusMinus pm = split_pm(m, cut, sub);
      const CMatrix plus = restrict_to(m.b, even_embedding(m.complex, pm.plus));
      const CMatrix minus = restrict_to(-m.b, even_embedding(m.complex, pm.minus));
      const Complex direct = narrow(oracle::det(to_oracle(plus)) / oracle::det(to_oracle(minus)));
      if (!values.empty()) worst_det = std::max(worst_det, rel(values.front(), direct));
    }
  }
  const bool ok = compared > 0 && worst <= 1e-10 && worst_det <= 1e-8;
  return {ok, fmt("%.0f angle evaluations, max rel dev %.2e, vs restricted det %.2e", compared, worst,
                  worst_det)};
}

Outcome whole_spectrum() {
  double worst = 0.0, worst_oracle = 0.0;
  for (int i = 0; i < 200; ++i) {
    const RandomModel model = random_model(instance_seed(kRoot, i));
    const OddSignatureModel m = odd_signature(model.complex, model.chirality);
    const double top = admissible_lambdas(m).back();
    const Complex a = rho_lambda(m, top, AgmonAngle(-kPi / 2.0)).value();
    const Complex b = refined_torsion(model.complex, model.chirality).value();
    worst = std::max(worst, rel(a, b));
    const CohomologyData h = cohomology(model.complex);
    const Complex brute = scalar_c_gamma_oracle(model.complex, model.chirality) *
                          narrow(oracle::phi(to_oracle(model.complex), reps_of(h)));
    worst_oracle = std::max(worst_oracle, rel(b, brute));
  }
  return {worst <= 1e-12 && worst_oracle <= 1e-9,
          fmt("200 models, max rel dev %.2e, vs brute force %.2e", worst, worst_oracle)};
}

Outcome c_gamma_independence() {
  double worst = 0.0, worst_oracle = 0.0;
  for (int i = 0; i < 200; ++i) {
    const RandomModel model = random_model(instance_seed(kRoot + 1, i));
    std::mt19937_64 rng(instance_seed(kRoot + 2, i));
    const int r = (model.complex.length() + 1) / 2;
    std::vector<CMatrix> a, b;
    for (int j = 0; j < r; ++j) {
      a.push_back(random_invertible(rng, model.complex.dim(j)));
      b.push_back(random_invertible(rng, model.complex.dim(j)));
    }
    const Complex ca = c_gamma(model.complex, model.chirality, a).value();
    const Complex cb = c_gamma(model.complex, model.chirality, b).value();
    worst = std::max(worst, rel(ca, cb));
    worst_oracle = std::max(worst_oracle, rel(ca, scalar_c_gamma_oracle(model.complex, model.chirality)));
  }
  return {worst <= 1e-12 && worst_oracle <= 1e-12,
          fmt("200 models, max rel dev %.2e, vs determinant formula %.2e", worst, worst_oracle)};
}

Outcome phi_choices() {
  double worst_choice = 0.0, worst_cov = 0.0, worst_oracle = 0.0;
  for (int i = 0; i < 200; ++i) {
    std::mt19937_64 rng(instance_seed(kRoot + 3, i));
    const int d = 1 + i % 4;
    std::vector<int> dims(d + 1), ranks(d);
    std::uniform_int_distribution<int> dim(1, 4);
    for (auto& x : dims) x = dim(rng);
    int previous = 0;
    for (int j = 0; j < d; ++j) {
      ranks[j] = std::uniform_int_distribution<int>(0, std::min(dims[j] - previous, dims[j + 1]))(rng);
      previous = ranks[j];
    }
    const GradedComplex c = random_complex(rng, dims, ranks);
    auto h = std::make_shared<const CohomologyData>(cohomology(c));
    const DetElement unit(1.0, Frame::standard(c));
    PhiOptions oblique;
    oblique.complement_seed = instance_seed(kRoot + 4, i);
    const Complex a = phi(c, unit, h).value();
    worst_choice = std::max(worst_choice, rel(a, phi(c, unit, h, oblique).value()));
    worst_oracle = std::max(worst_oracle, rel(a, narrow(oracle::phi(to_oracle(c), reps_of(*h)))));

    const GradedComplex acyclic = random_symmetric_complex(rng, 1 + 2 * (i % 2), 4, true);
    std::vector<CMatrix> m, moved;
    Complex predicted = torsion_acyclic(acyclic);
    for (int j = 0; j <= acyclic.length(); ++j) {
      m.push_back(random_invertible(rng, acyclic.dim(j)));
      predicted = (j % 2 == 0) ? predicted * det(m.back()) : predicted / det(m.back());
    }
    for (int j = 0; j < acyclic.length(); ++j) {
      moved.push_back(m[j + 1].partialPivLu().solve(acyclic.boundaries()[j] * m[j]));
    }
    worst_cov = std::max(worst_cov, rel(torsion_acyclic(GradedComplex(acyclic.dims(), moved)), predicted));
  }
  const bool ok = worst_choice <= 1e-9 && worst_cov <= 1e-9 && worst_oracle <= 1e-9;
  return {ok, fmt("200 instances, complement %.2e, base change %.2e, vs brute force %.2e", worst_choice,
                  worst_cov, worst_oracle)};
}

Outcome euler_shift() {
  double worst = 0.0;
  int count = 0;
  std::vector<std::string> files = corpus_cw("lens_");
  files.push_back(data("corpus/circle.json"));
  for (const auto& path : files) {
    const CWSystem k = cw_from_json(read_json_file(path));
    for (int t = 0; t < 50; ++t) {
      std::mt19937_64 rng(instance_seed(kRoot + 5, count++));
      const int n = std::uniform_int_distribution<int>(1, 3)(rng);
      const Representation a = random_representation(rng, k.presentation, n);
      std::vector<Word> shifts(k.cell_dims.size());
      std::uniform_int_distribution<int> len(0, 3);
      std::bernoulli_distribution inv(0.5);
      for (auto& w : shifts) {
        const int l = len(rng);
        for (int s = 0; s < l; ++s) w.push_back(inv(rng) ? -1 : 1);
      }
      // independent prediction: det alpha(t)^(sum of signed exponents weighted by cell parity)
      long exponent = 0;
      for (std::size_t e = 0; e < shifts.size(); ++e) {
        long net = 0;
        for (int x : shifts[e]) net += x > 0 ? 1 : -1;
        exponent += (k.cell_dims[e] % 2 == 0 ? -1 : 1) * net;
      }
      const Complex predicted = std::pow(det(a.images[0]), static_cast<double>(exponent));
      const Complex before = ft_torsion(k, a).value();
      const Complex after = ft_torsion(shift_lifts(k, shifts), a).value();
      worst = std::max(worst, rel(after / before, predicted));
    }
  }
  return {worst <= 1e-9, fmt("%.0f files x 50 representations, max rel dev %.2e", files.size(), worst)};
}

Outcome orientation_flip() {
  double worst = 0.0;
  int count = 0;
  for (const auto& path : corpus_cw("")) {
    const Json raw = read_json_file(path);
    const CWSystem k = cw_from_json(raw);
    for (int n = 1; n <= 3; ++n) {
      std::vector<Representation> reps;
      std::mt19937_64 rng(instance_seed(kRoot + 6, count));
      for (int t = 0; t < 10; ++t) reps.push_back(random_representation(rng, k.presentation, n, t % 2 == 0));
      reps.push_back({n, std::vector<CMatrix>(k.presentation.generators, CMatrix::Identity(n, n))});
      if (raw.contains("representation")) {
        const Representation file = representation_from_json(raw["representation"]);
        if (file.n == 1) {
          Representation lifted{n, {}};
          for (const auto& g : file.images) lifted.images.push_back(CMatrix::Identity(n, n) * g(0, 0));
          reps.push_back(lifted);
        }
      }
      const double sign = n % 2 == 0 ? 1.0 : -1.0;
      for (const auto& a : reps) {
        worst = std::max(worst, rel(ft_torsion(k, a, true).value(), sign * ft_torsion(k, a).value()));
        ++count;
      }
    }
  }
  return {worst <= 1e-12, fmt("%.0f representations, max rel dev from (-1)^n %.2e", count, worst)};
}

Outcome circle_closed_form() {
  const Json raw = read_json_file(data("corpus/circle.json"));
  const CWSystem circle = cw_from_json(raw);
  double worst = 0.0, worst_closed = 0.0;
  for (int i = 0; i < 50; ++i) {
    const Complex lambda = 1.0 + std::polar(0.1 + 0.25 * (i % 10), 0.2 + 1.25 * (i / 10));
    const Representation a{1, {CMatrix::Constant(1, 1, lambda)}};
    oracle::Complex_ brute_complex;
    brute_complex.dims = {1, 1};
    // boundary t - 1 evaluated by hand
    brute_complex.boundaries = {oracle::Mat{{oracle::Cx(lambda.real() - 1.0, lambda.imag())}}};
    const Complex brute = narrow(oracle::phi_acyclic(brute_complex));
    worst = std::max(worst, rel(ft_torsion(circle, a).value(), brute));
    worst_closed = std::max(worst_closed, rel(brute, lambda - 1.0));
  }
  return {worst <= 1e-10 && worst_closed <= 1e-15,
          fmt("50 values, exponent s = +1, max rel dev vs brute force %.2e", worst)};
}

// Eigenvalues drawn from the four classes; the expected 2*eta is counted from
// the diagonal before conjugation.
CMatrix eta_operator(std::mt19937_64& rng, long& twice_eta) {
  const int n = std::uniform_int_distribution<int>(1, 6)(rng);
  std::uniform_int_distribution<int> kind(0, 3);
  std::uniform_real_distribution<double> mag(0.5, 3.0);
  std::bernoulli_distribution coin(0.5);
  CMatrix t = CMatrix::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    const double s = coin(rng) ? 1.0 : -1.0;
    switch (kind(rng)) {
      case 0: break;
      case 1: t(k, k) = Complex(0.0, s * mag(rng)); break;
      case 2: t(k, k) = s * mag(rng); break;
      default: t(k, k) = Complex(s * mag(rng), (coin(rng) ? 1.0 : -1.0) * mag(rng)); break;
    }
  }
  for (int k = 0; k + 1 < n; k += 2) {
    if (coin(rng)) {
      t(k + 1, k + 1) = t(k, k);
      t(k, k + 1) = 1.0;
    }
  }
  twice_eta = 0;
  for (int k = 0; k < n; ++k) {
    const Complex v = t(k, k);
    if (v == Complex(0.0)) twice_eta += 1;
    else if (v.real() == 0.0) twice_eta += v.imag() > 0 ? 1 : -1;
    else twice_eta += v.real() > 0 ? 1 : -1;
  }
  const CMatrix p = random_invertible(rng, n);
  return p * t * p.partialPivLu().inverse();
}

Outcome eta_formula() {
  auto diag = [](std::vector<Complex> v) {
    CMatrix d = CMatrix::Zero(v.size(), v.size());
    for (std::size_t k = 0; k < v.size(); ++k) d(k, k) = v[k];
    return d;
  };
  const std::string e0 = eta_invariant(diag({1.0, -1.0})).rational();
  const std::string e1 = eta_invariant(diag({2.0, Complex(0.0, 3.0), -5.0})).rational();
  const std::string e2 =
      eta_invariant(diag({0.0, 0.0, Complex(0.0, 1.0), Complex(0.0, -1.0), 7.0})).rational();
  const bool forced = e0 == "0" && e1 == "1/2" && e2 == "3/2";
  int mismatches = 0;
  for (int i = 0; i < 100; ++i) {
    std::mt19937_64 rng(instance_seed(kRoot + 7, i));
    long ea = 0, eb = 0;
    const CMatrix a = eta_operator(rng, ea);
    const CMatrix b = eta_operator(rng, eb);
    CMatrix sum = CMatrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
    sum.topLeftCorner(a.rows(), a.cols()) = a;
    sum.bottomRightCorner(b.rows(), b.cols()) = b;
    const long lhs = eta_invariant(sum).twice_eta;
    if (lhs != eta_invariant(a).twice_eta + eta_invariant(b).twice_eta || lhs != ea + eb) ++mismatches;
  }
  return {forced && mismatches == 0,
          "examples " + e0 + ", " + e1 + ", " + e2 + "; " + std::to_string(mismatches) +
              " of 100 direct sums mismatched"};
}

Outcome holomorphy() {
  double min_exponent = INFINITY, floor_residual = 0.0, anti_residual = INFINITY;
  int holo = 0, floors = 0, anti = 0;
  bool ok = true;
  for (const auto& path : corpus_files(TORSION_DATA_DIR, "families")) {
    const Json raw = read_json_file(path);
    const std::string expect = raw.value("expect", "holomorphic");
    if (expect == "stratum_crossing") {
      ok = ok && torsion_family(family_from_json(raw)).stratum_crossing;
      continue;
    }
    const HolomorphyReport r = cr_residual(family_from_json(raw));
    if (expect == "antiholomorphic") {
      ++anti;
      anti_residual = std::min({anti_residual, r.max_residual, r.max_residual_half});
    } else if (r.roundoff_floor) {
      ++floors;
      floor_residual = std::max(floor_residual, r.max_residual);
    } else {
      ++holo;
      min_exponent = std::min(min_exponent, *r.exponent);
    }
  }
  ok = ok && holo > 0 && anti > 0 && min_exponent >= 1.7 && anti_residual >= 0.5 && floor_residual <= 1e-10;
  return {ok, fmt("min exponent %.3f over %.0f families", min_exponent, holo) +
                  fmt(", %.0f at roundoff floor (residual %.1e)", floors, floor_residual) +
                  fmt(", anti-holomorphic residual %.3f", anti_residual)};
}

Outcome cone_law() {
  double worst_identity = 0.0, worst_law = 0.0;
  for (int i = 0; i < 100; ++i) {
    std::mt19937_64 rng(instance_seed(kRoot + 8, i));
    const GradedComplex w = random_symmetric_complex(rng, 1 + 2 * (i % 2), 3, i % 3 != 0);
    std::vector<CMatrix> id;
    for (int k = 0; k <= w.length(); ++k) id.push_back(CMatrix::Identity(w.dim(k), w.dim(k)));
    worst_identity = std::max(worst_identity, std::abs(std::abs(torsion_acyclic(cone(w, w, id).assembled)) - 1.0));

    // acyclic W, C = W in other coordinates, J the change of coordinates
    const GradedComplex a = random_symmetric_complex(rng, 3, 3, true);
    std::vector<CMatrix> m, b, j;
    for (int k = 0; k <= 3; ++k) m.push_back(random_invertible(rng, a.dim(k)));
    for (int k = 0; k < 3; ++k) b.push_back(m[k + 1].partialPivLu().solve(a.boundaries()[k] * m[k]));
    for (int k = 0; k <= 3; ++k) j.push_back(m[k].partialPivLu().inverse());
    const GradedComplex c(a.dims(), b);
    const long double expected = std::abs(oracle::phi_acyclic(to_oracle(a))) /
                                 std::abs(oracle::phi_acyclic(to_oracle(c)));
    const double actual = std::abs(torsion_acyclic(cone(a, c, j).assembled));
    worst_law = std::max(worst_law, std::abs(actual - static_cast<double>(expected)) / static_cast<double>(expected));

    // with cohomology: against the library prediction
    const GradedComplex nc = random_complex(rng, {2, 3, 2}, {1, 1});
    std::vector<CMatrix> nm, nb, nj;
    for (int k = 0; k <= 2; ++k) nm.push_back(random_invertible(rng, nc.dim(k)));
    for (int k = 0; k < 2; ++k) nb.push_back(nm[k + 1].partialPivLu().solve(nc.boundaries()[k] * nm[k]));
    for (int k = 0; k <= 2; ++k) nj.push_back(nm[k].partialPivLu().inverse());
    const GradedComplex ncc(nc.dims(), nb);
    const double predicted = cone_modulus_prediction(nc, ncc, nj);
    const double got = std::abs(torsion_acyclic(cone(nc, ncc, nj).assembled));
    worst_law = std::max(worst_law, std::abs(got - predicted) / predicted);
  }
  return {worst_identity <= 1e-10 && worst_law <= 1e-8,
          fmt("identity |tau| - 1 max %.2e, modulus law max rel dev %.2e", worst_identity, worst_law)};
}

Outcome phase_detector() {
  const AnalyticFamily fam = family_from_json(read_json_file(data("families/cubic.json")));
  std::vector<Complex> g, f, varying;
  for (const auto& s : torsion_family(fam).samples) {
    g.push_back(s.value);
    f.push_back(std::polar(1.0, kPi / 3.0) * s.value);
    varying.push_back(std::polar(1.0, 4.0 * s.z.imag()) * s.value);
  }
  const PhaseVerdict v = phase_constancy(f, g, 1e-9, {}, fam.grid);
  const double error = v.phases.size() == 1 ? std::abs(v.phases[0] - kPi / 3.0) : INFINITY;
  const PhaseVerdict control = phase_constancy(varying, g, 1e-9, {}, fam.grid);
  return {v.constant && error < 1e-9 && !control.constant,
          fmt("|phase - pi/3| = %.2e, varying control variation %.2e", error, control.max_variation)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
    double time_limit;
  };
  const std::vector<Criterion> criteria = {
      {"lambda independence", lambda_independence, 60.0},
      {"theta independence", theta_independence, 0.0},
      {"whole-spectrum consistency", whole_spectrum, 0.0},
      {"c_Gamma choice independence", c_gamma_independence, 0.0},
      {"phi choice independence and base change", phi_choices, 0.0},
      {"Euler shift law", euler_shift, 0.0},
      {"orientation flip", orientation_flip, 0.0},
      {"circle closed form", circle_closed_form, 0.0},
      {"eta formula", eta_formula, 0.0},
      {"holomorphy", holomorphy, 30.0},
      {"cone acyclicity and modulus law", cone_law, 0.0},
      {"phase-constancy detector", phase_detector, 0.0},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (criteria[i].time_limit > 0.0 && seconds >= criteria[i].time_limit) {
      o.passed = false;
      o.detail += fmt("; over the %.0f s limit", criteria[i].time_limit);
    }
    if (!o.passed) ++failures;
    std::printf("%s %2zu %s: %s (%.2f s)\n", o.passed ? "PASS" : "FAIL", i + 1, criteria[i].name,
                o.detail.c_str(), seconds);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
