#include "torsion/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "torsion/error.hpp"

namespace torsion {

namespace {

void expect(bool ok, const std::string& what) {
  if (!ok) throw ValidationError(what);
}

template <class F>
auto guarded(const char* what, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("malformed ") + what + ": " + e.what());
  }
}

void escape(std::string& out, const std::string& s) {
  out += '"';
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  out += '"';
}

void emit(std::string& out, const Json& j, bool pretty, int depth) {
  const auto newline = [&](int level) {
    if (!pretty) return;
    out += '\n';
    out.append(2 * level, ' ');
  };
  switch (j.type()) {
    case Json::value_t::null: out += "null"; break;
    case Json::value_t::boolean: out += j.get<bool>() ? "true" : "false"; break;
    case Json::value_t::number_integer: out += std::to_string(j.get<long long>()); break;
    case Json::value_t::number_unsigned: out += std::to_string(j.get<unsigned long long>()); break;
    case Json::value_t::number_float: {
      const double x = j.get<double>();
      if (!std::isfinite(x)) {
        out += "null";
      } else {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", x == 0.0 ? 0.0 : x);
        out += buf;
        if (std::strpbrk(buf, ".e") == nullptr) out += ".0";
      }
      break;
    }
    case Json::value_t::string: escape(out, j.get<std::string>()); break;
    case Json::value_t::array: {
      // Arrays of scalars stay on one line.
      const bool flat = std::all_of(j.begin(), j.end(), [](const Json& x) { return x.is_primitive(); });
      out += '[';
      bool first = true;
      for (const auto& x : j) {
        if (!first) out += flat || !pretty ? (pretty ? ", " : ",") : ",";
        if (!flat) newline(depth + 1);
        emit(out, x, pretty, depth + 1);
        first = false;
      }
      if (!flat && !j.empty()) newline(depth);
      out += ']';
      break;
    }
    case Json::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        newline(depth + 1);
        escape(out, it.key());
        out += pretty ? ": " : ":";
        emit(out, it.value(), pretty, depth + 1);
        first = false;
      }
      if (!j.empty()) newline(depth);
      out += '}';
      break;
    }
    default: out += "null";
  }
}

Json dims_json(const std::vector<int>& dims) {
  Json out = Json::array();
  for (int m : dims) out.push_back(m);
  return out;
}

}  // namespace

std::string dump_json(const Json& j, bool pretty) {
  std::string out;
  emit(out, j, pretty, 0);
  return out;
}

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("invalid JSON: ") + e.what());
  }
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open input file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_json(buffer.str());
}

Json to_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Complex complex_from_json(const Json& j) {
  return guarded("complex number", [&] {
    if (j.is_number()) return Complex(j.get<double>(), 0.0);
    expect(j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number(),
           "complex number must be [re, im]");
    return Complex(j[0].get<double>(), j[1].get<double>());
  });
}

Json to_json(const CMatrix& m) {
  Json out = Json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Index k = 0; k < m.cols(); ++k) row.push_back(to_json(m(i, k)));
    out.push_back(row);
  }
  return out;
}

CMatrix matrix_from_json(const Json& j) {
  return guarded("matrix", [&] {
    expect(j.is_array(), "matrix must be an array of rows");
    const Index rows = static_cast<Index>(j.size());
    const Index cols = rows > 0 ? static_cast<Index>(j[0].size()) : 0;
    CMatrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
      expect(j[i].is_array() && static_cast<Index>(j[i].size()) == cols,
             "matrix rows must have equal length");
      for (Index k = 0; k < cols; ++k) m(i, k) = complex_from_json(j[i][k]);
    }
    require_finite(m, "matrix");
    return m;
  });
}

Json to_json(const GradedComplex& c) {
  Json out;
  out["dims"] = dims_json(c.dims());
  Json bs = Json::array();
  for (const auto& b : c.boundaries()) bs.push_back(to_json(b));
  out["boundaries"] = bs;
  return out;
}

GradedComplex graded_complex_from_json(const Json& j) {
  return guarded("complex", [&] {
    expect(j.is_object() && j.contains("dims") && j.contains("boundaries"),
           "complex needs \"dims\" and \"boundaries\"");
    const std::vector<int> dims = j.at("dims").get<std::vector<int>>();
    std::vector<CMatrix> boundaries;
    for (const auto& b : j.at("boundaries")) boundaries.push_back(matrix_from_json(b));
    // Empty rows lose the column count; restore shapes from dims.
    for (std::size_t k = 0; k < boundaries.size() && k + 1 < dims.size(); ++k) {
      if (boundaries[k].size() == 0) boundaries[k] = CMatrix::Zero(dims[k + 1], dims[k]);
    }
    return GradedComplex(dims, boundaries);
  });
}

Json to_json(const Chirality& g) {
  Json blocks = Json::array();
  for (const auto& b : g.lower()) blocks.push_back(to_json(b));
  Json out;
  out["gamma"] = blocks;
  return out;
}

Chirality chirality_from_json(const Json& j, const GradedComplex& c) {
  return guarded("chirality", [&] {
    expect(j.contains("gamma") && j.at("gamma").is_array(), "chirality needs \"gamma\"");
    std::vector<CMatrix> lower;
    int k = 0;
    for (const auto& b : j.at("gamma")) {
      CMatrix m = matrix_from_json(b);
      if (m.size() == 0) m = CMatrix::Zero(c.dim(c.length() - k), c.dim(k));
      lower.push_back(m);
      ++k;
    }
    return Chirality::from_lower(c, lower);
  });
}

Json to_json(const ModelInput& m) {
  Json out = to_json(m.complex);
  out["gamma"] = to_json(m.chirality)["gamma"];
  return out;
}

ModelInput model_from_json(const Json& j) {
  GradedComplex c = graded_complex_from_json(j);
  Chirality g = chirality_from_json(j, c);
  return {std::move(c), std::move(g)};
}

Json word_to_json(const Word& w) {
  Json out = Json::array();
  for (int g : w) out.push_back(g);
  return out;
}

Word word_from_json(const Json& j) {
  return guarded("word", [&] {
    expect(j.is_array(), "word must be an array of signed generator indices");
    Word w;
    for (const auto& x : j) {
      expect(x.is_number_integer(), "word entries must be integers");
      w.push_back(x.get<int>());
    }
    return w;
  });
}

Json to_json(const Representation& a) {
  Json out;
  out["n"] = a.n;
  Json images = Json::array();
  for (const auto& m : a.images) images.push_back(to_json(m));
  out["images"] = images;
  return out;
}

Representation representation_from_json(const Json& j) {
  return guarded("representation", [&] {
    Representation a;
    a.n = j.at("n").get<int>();
    expect(a.n >= 1, "representation dimension must be positive");
    for (const auto& m : j.at("images")) a.images.push_back(matrix_from_json(m));
    return a;
  });
}

Json to_json(const CWSystem& k) {
  Json cells = Json::array();
  for (int d : k.cell_dims) {
    Json cell;
    cell["dim"] = d;
    cells.push_back(cell);
  }
  Json boundaries = Json::array();
  for (const auto& b : k.boundaries) {
    Json entries = Json::array();
    for (int i = 0; i < b.rows; ++i) {
      Json row = Json::array();
      for (int c = 0; c < b.cols; ++c) {
        Json terms = Json::array();
        for (const auto& [coef, word] : b.at(i, c).terms) {
          terms.push_back(Json::array({coef, word_to_json(word)}));
        }
        row.push_back(terms);
      }
      entries.push_back(row);
    }
    Json matrix;
    matrix["shape"] = Json::array({b.rows, b.cols});
    matrix["entries"] = entries;
    boundaries.push_back(matrix);
  }
  Json relations = Json::array();
  for (const auto& w : k.presentation.relations) relations.push_back(word_to_json(w));
  Json out;
  out["cells"] = cells;
  out["boundaries"] = boundaries;
  out["presentation"]["generators"] = k.presentation.generators;
  out["presentation"]["relations"] = relations;
  return out;
}

CWSystem cw_from_json(const Json& j) {
  return guarded("CW system", [&] {
    CWSystem k;
    for (const auto& cell : j.at("cells")) k.cell_dims.push_back(cell.at("dim").get<int>());
    for (const auto& b : j.at("boundaries")) {
      GroupRingMatrix m;
      const auto shape = b.at("shape");
      expect(shape.is_array() && shape.size() == 2, "boundary shape must be [rows, cols]");
      m.rows = shape[0].get<int>();
      m.cols = shape[1].get<int>();
      const auto& entries = b.at("entries");
      expect(entries.is_array() && static_cast<int>(entries.size()) == m.rows,
             "boundary entries must have one row per higher cell");
      for (const auto& row : entries) {
        expect(row.is_array() && static_cast<int>(row.size()) == m.cols,
               "boundary entry rows must have one entry per lower cell");
        for (const auto& entry : row) {
          GroupRingElement e;
          for (const auto& term : entry) {
            expect(term.is_array() && term.size() == 2 && term[0].is_number_integer(),
                   "group ring term must be [coef, word]");
            e.terms.emplace_back(term[0].get<long>(), word_from_json(term[1]));
          }
          m.entries.push_back(e);
        }
      }
      k.boundaries.push_back(m);
    }
    const auto& p = j.at("presentation");
    k.presentation.generators = p.at("generators").get<int>();
    if (p.contains("relations")) {
      for (const auto& w : p.at("relations")) k.presentation.relations.push_back(word_from_json(w));
    }
    k.validate();
    return k;
  });
}

Json to_json(const Polynomial& p) {
  Json out = Json::array();
  for (const auto& [c, pz, pzbar] : p.terms) out.push_back(Json::array({to_json(c), pz, pzbar}));
  return out;
}

Polynomial polynomial_from_json(const Json& j) {
  return guarded("polynomial", [&] {
    Polynomial p;
    if (j.is_number()) {
      p.terms.emplace_back(Complex(j.get<double>(), 0.0), 0, 0);
      return p;
    }
    expect(j.is_array(), "polynomial must be a list of [coef, pz, pzbar]");
    for (const auto& term : j) {
      expect(term.is_array() && term.size() == 3, "polynomial term must be [coef, pz, pzbar]");
      const int pz = term[1].get<int>();
      const int pzbar = term[2].get<int>();
      expect(pz >= 0 && pzbar >= 0, "polynomial exponents must be non-negative");
      p.terms.emplace_back(complex_from_json(term[0]), pz, pzbar);
    }
    return p;
  });
}

Json to_json(const PolynomialMatrix& m) {
  Json out = Json::array();
  for (int i = 0; i < m.rows; ++i) {
    Json row = Json::array();
    for (int k = 0; k < m.cols; ++k) row.push_back(to_json(m.entries[i * m.cols + k]));
    out.push_back(row);
  }
  return out;
}

PolynomialMatrix polynomial_matrix_from_json(const Json& j) {
  return guarded("polynomial matrix", [&] {
    expect(j.is_array(), "polynomial matrix must be an array of rows");
    PolynomialMatrix m;
    m.rows = static_cast<int>(j.size());
    m.cols = m.rows > 0 ? static_cast<int>(j[0].size()) : 0;
    for (const auto& row : j) {
      expect(row.is_array() && static_cast<int>(row.size()) == m.cols,
             "polynomial matrix rows must have equal length");
      for (const auto& e : row) m.entries.push_back(polynomial_from_json(e));
    }
    return m;
  });
}

Json to_json(const AnalyticFamily& f) {
  Json out;
  out["grid"]["center"] = to_json(f.grid.center);
  out["grid"]["h"] = f.grid.h;
  out["grid"]["shape"] = Json::array({f.grid.rows, f.grid.cols});
  if (f.mode == AnalyticFamily::Mode::explicit_matrices) {
    out["mode"] = "explicit";
    out["payload"]["dims"] = dims_json(f.dims);
    Json bs = Json::array();
    for (const auto& b : f.boundaries) bs.push_back(to_json(b));
    out["payload"]["boundaries"] = bs;
  } else {
    out["mode"] = "cw";
    out["payload"]["cw"] = to_json(f.cw);
    out["payload"]["n"] = f.n;
    Json images = Json::array();
    for (const auto& m : f.images) images.push_back(to_json(m));
    out["payload"]["images"] = images;
  }
  return out;
}

AnalyticFamily family_from_json(const Json& j) {
  return guarded("family", [&] {
    AnalyticFamily f;
    const auto& grid = j.at("grid");
    f.grid.center = complex_from_json(grid.at("center"));
    f.grid.h = grid.at("h").get<double>();
    const auto& shape = grid.at("shape");
    expect(shape.is_array() && shape.size() == 2, "grid shape must be [rows, cols]");
    f.grid.rows = shape[0].get<int>();
    f.grid.cols = shape[1].get<int>();
    f.grid.validate();
    const std::string mode = j.at("mode").get<std::string>();
    const auto& payload = j.at("payload");
    if (mode == "explicit") {
      f.mode = AnalyticFamily::Mode::explicit_matrices;
      f.dims = payload.at("dims").get<std::vector<int>>();
      for (const auto& b : payload.at("boundaries")) {
        f.boundaries.push_back(polynomial_matrix_from_json(b));
      }
      expect(f.boundaries.size() + 1 == f.dims.size(), "family needs one boundary per degree step");
      for (std::size_t k = 0; k < f.boundaries.size(); ++k) {
        expect(f.boundaries[k].rows == f.dims[k + 1] && f.boundaries[k].cols == f.dims[k],
               "family boundary has the wrong shape");
      }
    } else if (mode == "cw") {
      f.mode = AnalyticFamily::Mode::cw;
      f.cw = cw_from_json(payload.at("cw"));
      f.n = payload.at("n").get<int>();
      for (const auto& m : payload.at("images")) f.images.push_back(polynomial_matrix_from_json(m));
      expect(static_cast<int>(f.images.size()) == f.cw.presentation.generators,
             "family needs one image per generator");
      for (const auto& m : f.images) {
        expect(m.rows == f.n && m.cols == f.n, "generator image has the wrong shape");
      }
    } else {
      throw ValidationError("family mode must be \"explicit\" or \"cw\"");
    }
    return f;
  });
}

Json to_json(const CohomologyData& h) {
  Json out;
  out["betti"] = dims_json(h.betti);
  Json reps = Json::array();
  for (const auto& r : h.representatives) reps.push_back(to_json(r));
  out["representatives"] = reps;
  return out;
}

Json to_json(const EtaData& e) {
  Json out;
  out["eta_zero"] = e.eta_zero;
  out["m_plus"] = e.m_plus;
  out["m_minus"] = e.m_minus;
  out["m_zero"] = e.m_zero;
  out["eta"] = e.rational();
  return out;
}

Json to_json(const HolomorphyReport& r) {
  Json out;
  out["max_residual"] = r.max_residual;
  out["max_residual_half"] = r.max_residual_half;
  out["exponent"] = r.exponent ? Json(*r.exponent) : Json(nullptr);
  out["roundoff_floor"] = r.roundoff_floor;
  Json points = Json::array();
  for (std::size_t i = 0; i < r.points.size(); ++i) {
    Json p;
    p["z"] = to_json(r.points[i]);
    p["cr_abs"] = r.residuals[i];
    points.push_back(p);
  }
  out["points"] = points;
  return out;
}

Json to_json(const PhaseVerdict& v) {
  Json out;
  out["locally_constant"] = v.constant;
  out["phases"] = v.phases;
  out["max_variation"] = v.max_variation;
  out["max_modulus_defect"] = v.max_modulus_defect;
  return out;
}

InputKind classify_input(const Json& j) {
  expect(j.is_object(), "input must be a JSON object");
  if (j.contains("grid")) return InputKind::family;
  if (j.contains("cells")) return InputKind::cw;
  if (j.contains("gamma")) return InputKind::model;
  if (j.contains("dims")) return InputKind::complex;
  throw ValidationError("input is neither a complex, a model, a CW system nor a family");
}

}  // namespace torsion
