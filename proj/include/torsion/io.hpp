#pragma once

#include <string>

#include <json.hpp>

#include "torsion/families.hpp"
#include "torsion/spectral.hpp"

namespace torsion {

using Json = nlohmann::ordered_json;

/// Deterministic text: fixed key order (insertion order), doubles with 17
/// significant digits, two-space indentation.
std::string dump_json(const Json& j, bool pretty = true);

/// Parses text; syntax errors become ValidationError.
Json parse_json(const std::string& text);
Json read_json_file(const std::string& path);

Json to_json(Complex z);
Complex complex_from_json(const Json& j);  // [re, im] or a plain number

Json to_json(const CMatrix& m);
CMatrix matrix_from_json(const Json& j);  // array of rows of [re, im]

Json to_json(const GradedComplex& c);
GradedComplex graded_complex_from_json(const Json& j);

/// {"gamma": [blocks for degrees 0..r-1]}
Json to_json(const Chirality& g);
Chirality chirality_from_json(const Json& j, const GradedComplex& c);

/// Complex and chirality in one object.
struct ModelInput {
  GradedComplex complex;
  Chirality chirality;
};
Json to_json(const ModelInput& m);
ModelInput model_from_json(const Json& j);

Json word_to_json(const Word& w);
Word word_from_json(const Json& j);

Json to_json(const Representation& a);
Representation representation_from_json(const Json& j);

Json to_json(const CWSystem& k);
CWSystem cw_from_json(const Json& j);

Json to_json(const Polynomial& p);
Polynomial polynomial_from_json(const Json& j);
Json to_json(const PolynomialMatrix& m);
PolynomialMatrix polynomial_matrix_from_json(const Json& j);

Json to_json(const AnalyticFamily& f);
AnalyticFamily family_from_json(const Json& j);

Json to_json(const CohomologyData& h);
Json to_json(const EtaData& e);
Json to_json(const HolomorphyReport& r);
Json to_json(const PhaseVerdict& v);

/// What an input file holds, decided by its keys.
enum class InputKind { complex, model, cw, family };
InputKind classify_input(const Json& j);

}  // namespace torsion
