#pragma once

// JSON conversions shared by the C interface and the bundled examples.

#include <string>
#include <vector>

#include <json.hpp>

#include "majlab/bhdiag.hpp"
#include "majlab/ii1sim.hpp"
#include "majlab/matrixlab.hpp"

namespace majlab::io {

using Json = nlohmann::json;

Json parse_text(const std::string& text, const std::string& what);

// Numbers and strings; decimals stay exact unless `as_float`.
Scalar scalar_from(const Json& j, bool as_float);
Point point_from(const Json& j, bool as_float);
std::vector<Point> points_from(const Json& j, bool as_float, const char* key);
Measure measure_from(const Json& j, bool as_float, double tol);
Matrix real_matrix_from(const Json& j, bool as_float);

// Exact values as "p/q" strings, floats as numbers.
Json to_json(const Scalar& s);
Json to_json(const Point& p);
Json to_json(const std::vector<Point>& ps);  // also Matrix
Json to_json(const Measure& m);
Json to_json(const TransportMatrix& t);
Json to_json(const CMatrix& m);
Json to_json(const BlockUnitary& u);
// Reports count from 1.
Json one_based(const std::vector<std::size_t>& idx);

// Canonical one-line rendering; keys are sorted.
std::string dump(const Json& j);

}  // namespace majlab::io
