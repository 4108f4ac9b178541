#pragma once

// Matrix input (dense CSV or JSON) and JSON serialisation of results.

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "pqnorm/common.hpp"
#include "pqnorm/inversion.hpp"
#include "pqnorm/norms.hpp"
#include "pqnorm/oracle.hpp"
#include "pqnorm/relaxation.hpp"
#include "pqnorm/rounding.hpp"

namespace pqnorm {

using json = nlohmann::json;

inline constexpr const char* kSchema = "pqnorm/1";

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One row per line, comma and/or whitespace separated. Blank lines and lines
/// starting with '#' are ignored.
inline Matrix parse_csv_matrix(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    for (char& ch : line)
      if (ch == ',' || ch == ';' || ch == '\r') ch = ' ';
    std::istringstream ls(line);
    std::vector<double> row;
    std::string tok;
    while (ls >> tok) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(tok, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != tok.size()) throw ParseError("line " + std::to_string(lineno) + ": bad number '" + tok + "'");
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError("line " + std::to_string(lineno) + ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty() || rows.front().empty()) throw ParseError("empty matrix");
  Matrix A(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j) A(i, j) = rows[i][j];
  check_matrix(A);
  return A;
}

/// {"m": .., "n": .., "entries": [...]} with entries flat row-major or nested rows.
inline Matrix parse_json_matrix(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("entries")) throw ParseError("matrix JSON needs an 'entries' array");
  const json& e = doc["entries"];
  if (!e.is_array() || e.empty()) throw ParseError("'entries' must be a non-empty array");
  std::vector<double> flat;
  Eigen::Index m = 0;
  Eigen::Index n = 0;
  if (e.front().is_array()) {
    m = static_cast<Eigen::Index>(e.size());
    n = static_cast<Eigen::Index>(e.front().size());
    for (const auto& row : e) {
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) throw ParseError("ragged 'entries'");
      for (const auto& v : row) flat.push_back(v.get<double>());
    }
  } else {
    if (!doc.contains("m") || !doc.contains("n")) throw ParseError("flat 'entries' needs 'm' and 'n'");
    m = doc["m"].get<Eigen::Index>();
    n = doc["n"].get<Eigen::Index>();
    for (const auto& v : e) flat.push_back(v.get<double>());
  }
  if (doc.contains("m") && doc["m"].get<Eigen::Index>() != m) throw ParseError("'m' disagrees with 'entries'");
  if (doc.contains("n") && doc["n"].get<Eigen::Index>() != n) throw ParseError("'n' disagrees with 'entries'");
  if (m < 1 || n < 1 || static_cast<Eigen::Index>(flat.size()) != m * n)
    throw ParseError("'entries' size does not match m x n");
  Matrix A(m, n);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) A(i, j) = flat[static_cast<std::size_t>(i * n + j)];
  check_matrix(A);
  return A;
}

/// Dispatches on content: a leading '{' means JSON, anything else CSV.
inline Matrix parse_matrix(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return parse_json_matrix(text);
  return parse_csv_matrix(text);
}

inline Matrix load_matrix(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_matrix(ss.str());
}

/// inf is not representable in JSON; it is written as the string "inf".
inline json exponent_json(double r) { return std::isinf(r) ? json("inf") : json(r); }

inline json to_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline json to_json(const Matrix& X) {
  json a = json::array();
  for (Eigen::Index i = 0; i < X.rows(); ++i) a.push_back(to_json(Vector(X.row(i).transpose())));
  return a;
}

inline json to_json(const InverseReport& r) {
  json j;
  j["p"] = exponent_json(r.p);
  j["q"] = r.q;
  j["a"] = r.a;
  j["b"] = r.b;
  j["c_ab"] = r.c_ab;
  j["hinv_lb"] = r.hinv_lower_bound ? json(*r.hinv_lower_bound) : json(nullptr);
  j["ratio"] = r.ratio;
  j["certified"] = r.certified;
  j["k_checked"] = r.k_checked;
  j["c1c2_ok"] = r.c1_c2_ok;
  j["tail_bound"] = r.tail_bound_used;
  j["delta"] = r.delta;
  j["headline_lb"] = r.headline_lower_bound;
  if (!r.failure.empty()) j["certificate_failure"] = r.failure;
  return j;
}

inline json to_json(const SignPatternReport& r) {
  json j;
  j["k_max"] = r.k_max;
  j["grid_step"] = r.grid_step;
  j["margin"] = r.margin;
  j["points_checked"] = r.points_checked;
  j["method"] = r.method;
  j["pass"] = r.pass;
  json per = json::array();
  for (const auto& e : r.entries) {
    per.push_back({{"k", e.k},
                   {"condition", e.condition},
                   {"worst_slack", e.worst_slack},
                   {"worst_a", e.worst_a},
                   {"worst_b", e.worst_b},
                   {"pass", e.pass}});
  }
  j["entries"] = per;
  return j;
}

inline json to_json(const GramSolution& s) {
  return {{"value", s.value},
          {"converged", s.converged},
          {"iterations", s.iterations},
          {"warm_start_value", s.warm_start_value},
          {"U", to_json(s.U)},
          {"V", to_json(s.V)}};
}

inline json to_json(const DualCertificate& d) {
  return {{"value", d.value}, {"min_eig", d.min_eig}, {"valid", d.valid}, {"s", to_json(d.s)}, {"t", to_json(d.t)}};
}

inline json to_json(const RoundedPair& r) {
  return {{"value", r.value}, {"trial", r.trial}, {"seed", r.seed}, {"y", to_json(r.y)}, {"x", to_json(r.x)}};
}

inline json to_json(const CorrelationSample& s) {
  return {{"a", s.a},         {"b", s.b},
          {"rho", s.rho},     {"samples", s.samples},
          {"mean", s.mean},   {"std_error", s.std_error},
          {"expected", s.expected}, {"z_score", s.z_score()}};
}

inline json to_json(const DualityReport& r) {
  return {{"p", exponent_json(r.p)},     {"q", exponent_json(r.q)},  {"forward", r.forward},
          {"transpose", r.transpose},    {"difference", r.difference}, {"tolerance", r.tolerance},
          {"pass", r.pass}};
}

inline json to_json(const KronReport& r) {
  return {{"p", exponent_json(r.p)}, {"q", exponent_json(r.q)}, {"norm_a", r.norm_a},
          {"norm_b", r.norm_b},      {"norm_kron", r.norm_kron}, {"product", r.product},
          {"relative_gap", r.relative_gap}, {"upper_ok", r.upper_ok}, {"lower_ok", r.lower_ok},
          {"pass", r.pass}};
}

inline json to_json(const EmbeddingReport& r) {
  return {{"n", r.n},
          {"m", r.m},
          {"q", r.q},
          {"trials", r.trials},
          {"min_ratio", r.min_ratio},
          {"max_ratio", r.max_ratio},
          {"adversarial_max_ratio", r.adversarial_max_ratio},
          {"max_deviation", r.max_deviation},
          {"rms_deviation", r.rms_deviation}};
}

}  // namespace pqnorm
