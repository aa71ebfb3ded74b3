#include "io.hpp"

#include "majlab/error.hpp"

namespace majlab::io {

Json parse_text(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    fail(ErrorCode::InvalidInput, what + ": " + e.what());
  }
}

Scalar scalar_from(const Json& j, bool as_float) {
  Scalar s;
  if (j.is_string()) {
    s = Scalar::parse(j.get<std::string>());
  } else if (j.is_number_integer()) {
    s = Scalar(j.get<long long>());
  } else if (j.is_number()) {
    // the literal as written, not its binary approximation
    s = Scalar::parse(j.dump());
  } else {
    fail(ErrorCode::InvalidInput, "expected a number, got " + j.dump());
  }
  return as_float ? s.to_float() : s;
}

Point point_from(const Json& j, bool as_float) {
  if (j.is_number() || j.is_string()) return {scalar_from(j, as_float)};
  if (!j.is_array()) fail(ErrorCode::InvalidInput, "expected a point, got " + j.dump());
  Point p;
  for (const auto& v : j) p.push_back(scalar_from(v, as_float));
  return p;
}

std::vector<Point> points_from(const Json& j, bool as_float, const char* key) {
  const Json& arr = j.is_object() && key && j.contains(key) ? j.at(key) : j;
  if (!arr.is_array()) fail(ErrorCode::InvalidInput, std::string("expected a list of points") + (key ? " or {\"" + std::string(key) + "\": [...]}" : ""));
  std::vector<Point> out;
  for (const auto& p : arr) out.push_back(point_from(p, as_float));
  for (const auto& p : out)
    if (p.size() != out.front().size()) fail(ErrorCode::DimensionMismatch, "points of different dimension");
  return out;
}

Measure measure_from(const Json& j, bool as_float, double tol) {
  if (!j.is_object() || !j.contains("atoms") || !j.contains("weights"))
    fail(ErrorCode::InvalidInput, "measure needs \"atoms\" and \"weights\"");
  auto atoms = points_from(j.at("atoms"), as_float, nullptr);
  std::vector<Scalar> w;
  for (const auto& v : j.at("weights")) w.push_back(scalar_from(v, as_float));
  if (j.contains("n") && !atoms.empty() && j.at("n").get<std::size_t>() != atoms.front().size())
    fail(ErrorCode::DimensionMismatch, "\"n\" does not match the atom dimension");
  return make_measure(std::move(atoms), std::move(w), tol);
}

Matrix real_matrix_from(const Json& j, bool as_float) {
  const Json& re = j.is_object() ? j.at("re") : j;
  if (j.is_object() && j.contains("im"))
    for (const auto& row : j.at("im"))
      for (const auto& v : row)
        if (!(scalar_from(v, false) == Scalar(0))) fail(ErrorCode::InvalidInput, "matrix must be real");
  Matrix m;
  for (const auto& row : re) {
    std::vector<Scalar> r;
    for (const auto& v : row) r.push_back(scalar_from(v, as_float));
    m.push_back(std::move(r));
  }
  if (j.is_object() && j.contains("rows") && j.at("rows").get<std::size_t>() != m.size())
    fail(ErrorCode::DimensionMismatch, "\"rows\" does not match the data");
  for (const auto& r : m)
    if (r.size() != m.front().size()) fail(ErrorCode::DimensionMismatch, "ragged matrix");
  return m;
}

Json to_json(const Scalar& s) {
  if (s.is_exact()) return s.str();
  return s.to_double();
}

Json to_json(const Point& p) {
  Json a = Json::array();
  for (const auto& v : p) a.push_back(to_json(v));
  return a;
}

Json to_json(const std::vector<Point>& ps) {
  Json a = Json::array();
  for (const auto& p : ps) a.push_back(to_json(p));
  return a;
}

Json to_json(const Measure& m) {
  return Json{{"n", m.n}, {"atoms", to_json(m.atoms)}, {"weights", to_json(m.weights)}};
}

Json to_json(const TransportMatrix& t) {
  return Json{{"entries", to_json(t.entries)}, {"p", to_json(t.p)}, {"q", to_json(t.q)}};
}

Json to_json(const CMatrix& m) {
  Json re = Json::array(), im = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json r = Json::array(), c = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      r.push_back(m(i, k).real());
      c.push_back(m(i, k).imag());
    }
    re.push_back(std::move(r));
    im.push_back(std::move(c));
  }
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"re", re}, {"im", im}};
}

Json one_based(const std::vector<std::size_t>& idx) {
  Json a = Json::array();
  for (auto i : idx) a.push_back(i + 1);
  return a;
}

Json to_json(const BlockUnitary& u) {
  Json blocks = Json::array();
  for (const auto& b : u.blocks) {
    Json blk = to_json(b.u);
    blk["row_cells"] = one_based(b.rows);
    blk["col_cells"] = one_based(b.cols);
    blocks.push_back(std::move(blk));
  }
  return Json{{"n", u.n}, {"blocks", blocks}};
}

std::string dump(const Json& j) { return j.dump(); }

}  // namespace majlab::io
