#include "sosexit/problem_io.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "sosexit/common.hpp"

namespace sosexit {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

MultiIndex parse_exponent_key(const std::string& key, int dimension) {
  MultiIndex alpha;
  std::string digits;
  for (char c : key) {
    if (c == '(' || c == ' ') continue;
    if (c == ',' || c == ')') {
      if (digits.empty()) throw Error("bad exponent tuple: " + key);
      alpha.push_back(std::stoi(digits));
      digits.clear();
    } else {
      digits += c;
    }
  }
  if (!digits.empty()) throw Error("bad exponent tuple: " + key);
  if (static_cast<int>(alpha.size()) != dimension) {
    throw Error("exponent tuple " + key + " has wrong dimension");
  }
  return alpha;
}

std::string exponent_key(const MultiIndex& alpha) {
  std::ostringstream out;
  out << "(";
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    if (i) out << ",";
    out << alpha[i];
  }
  out << ")";
  return out.str();
}

// A polynomial is a grammar string or {"terms": {"(a1,...,an)": coeff}}.
Polynomial parse_poly_value(const json& value, int dimension, const std::string& where) {
  try {
    if (value.is_string()) {
      return parse_polynomial(value.get<std::string>(), dimension);
    }
    if (value.is_number()) {
      return Polynomial::constant(dimension, value.get<double>());
    }
    if (value.is_object() && value.contains("terms")) {
      Polynomial p(dimension);
      for (const auto& [key, coeff] : value.at("terms").items()) {
        p.add_term(parse_exponent_key(key, dimension), coeff.get<double>());
      }
      return p;
    }
  } catch (const Error& e) {
    throw Error(where + ": " + e.what());
  }
  throw Error(where + ": expected a polynomial string or a terms object");
}

// Constraint strings: "p >= 0", "p = 0" / "p == 0", or a bare polynomial.
Polynomial parse_constraint(const std::string& text, int dimension, bool equality,
                            const std::string& where) {
  std::string lhs = text;
  const auto split = [&](const std::string& op) -> bool {
    const auto pos = text.find(op);
    if (pos == std::string::npos) return false;
    lhs = text.substr(0, pos);
    const std::string rhs = text.substr(pos + op.size());
    const Polynomial r = parse_polynomial(rhs, dimension);
    if (!r.is_zero()) {
      throw Error(where + ": right-hand side of \"" + text + "\" must be 0");
    }
    return true;
  };
  try {
    if (!equality && split(">=")) return parse_polynomial(lhs, dimension);
    if (equality && (split("==") || split("="))) return parse_polynomial(lhs, dimension);
    if (text.find(">=") != std::string::npos || text.find('=') != std::string::npos) {
      throw Error(where + ": constraint \"" + text + "\" has the wrong comparison for " +
                  (equality ? "an equality" : "an inequality"));
    }
    return parse_polynomial(text, dimension);
  } catch (const Error& e) {
    throw Error(where + ": " + e.what());
  }
}

}  // namespace

ExitProblem parse_problem(std::istream& in, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(origin + ": invalid JSON: " + e.what());
  }
  auto require = [&](const char* field) -> const json& {
    if (!doc.contains(field)) throw Error(origin + ": missing field \"" + field + "\"");
    return doc.at(field);
  };

  const int n = require("dimension").get<int>();
  if (n < 1) throw Error(origin + ": dimension must be >= 1");

  const json& drift_json = require("drift");
  if (!drift_json.is_array() || static_cast<int>(drift_json.size()) != n) {
    throw Error(origin + ": drift must be an array of " + std::to_string(n) +
                " polynomials");
  }
  std::vector<Polynomial> drift;
  for (int i = 0; i < n; ++i) {
    drift.push_back(parse_poly_value(drift_json[i], n, origin + ": drift[" +
                                     std::to_string(i) + "]"));
  }

  const json& diff_json = require("diffusion");
  if (!diff_json.is_array() || static_cast<int>(diff_json.size()) != n) {
    throw Error(origin + ": diffusion must have one row per state dimension (" +
                std::to_string(n) + ")");
  }
  PolynomialMatrix diffusion(n);
  std::size_t m = 0;
  for (int i = 0; i < n; ++i) {
    const json& row = diff_json[i];
    if (!row.is_array() || row.empty()) {
      throw Error(origin + ": diffusion row " + std::to_string(i) + " must be a non-empty array");
    }
    if (i == 0) {
      m = row.size();
    } else if (row.size() != m) {
      throw Error(origin + ": diffusion rows disagree on the noise dimension");
    }
    for (std::size_t k = 0; k < row.size(); ++k) {
      diffusion[i].push_back(parse_poly_value(
          row[k], n,
          origin + ": diffusion[" + std::to_string(i) + "][" + std::to_string(k) + "]"));
    }
  }

  const json& domain_json = require("domain");
  Domain domain;
  if (!domain_json.contains("interior") || !domain_json.at("interior").is_array()) {
    throw Error(origin + ": domain.interior must be an array of inequality strings");
  }
  for (const auto& entry : domain_json.at("interior")) {
    domain.interior.inequalities.push_back(
        parse_constraint(entry.get<std::string>(), n, false, origin + ": domain.interior"));
  }
  domain.interior.label = "interior";
  if (!domain_json.contains("boundary") || !domain_json.at("boundary").is_array()) {
    throw Error(origin + ": domain.boundary must be an array of pieces");
  }
  for (std::size_t i = 0; i < domain_json.at("boundary").size(); ++i) {
    const json& piece_json = domain_json.at("boundary")[i];
    SemialgebraicPiece piece;
    const std::string where = origin + ": domain.boundary[" + std::to_string(i) + "]";
    if (piece_json.contains("eq")) {
      for (const auto& entry : piece_json.at("eq")) {
        piece.equalities.push_back(parse_constraint(entry.get<std::string>(), n, true, where));
      }
    }
    if (piece_json.contains("ineq")) {
      for (const auto& entry : piece_json.at("ineq")) {
        piece.inequalities.push_back(
            parse_constraint(entry.get<std::string>(), n, false, where));
      }
    }
    piece.label = piece_json.value("label", "");
    domain.boundary.push_back(std::move(piece));
  }

  const Polynomial g = parse_poly_value(require("g"), n, origin + ": g");

  const json& initial_json = require("initial");
  const std::string type = initial_json.value("type", "");
  InitialLaw law = InitialLaw::dirac(std::vector<double>(n, 0.0));
  if (type == "dirac") {
    const json& point_json = initial_json.at("point");
    if (!point_json.is_array() || static_cast<int>(point_json.size()) != n) {
      throw Error(origin + ": initial.point must have " + std::to_string(n) + " entries");
    }
    std::vector<double> point;
    for (const auto& value : point_json) point.push_back(value.get<double>());
    law = InitialLaw::dirac(std::move(point));
  } else if (type == "moments") {
    const int degree = initial_json.at("degree").get<int>();
    Polynomial::TermMap values;
    for (const auto& [key, value] : initial_json.at("values").items()) {
      values[parse_exponent_key(key, n)] = value.get<double>();
    }
    law = InitialLaw::moments(n, degree, std::move(values));
  } else {
    throw Error(origin + ": initial.type must be \"dirac\" or \"moments\"");
  }

  ExitProblem problem;
  problem.sde = make_sde(std::move(drift), std::move(diffusion));
  problem.domain = std::move(domain);
  problem.functional = g;
  problem.initial = std::move(law);
  return problem;
}

ExitProblem parse_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return parse_problem(in, path);
}

void serialize_problem(const ExitProblem& problem, std::ostream& out) {
  ordered_json doc;
  const int n = problem.sde.state_dim;
  doc["dimension"] = n;
  doc["drift"] = ordered_json::array();
  for (const auto& p : problem.sde.drift) doc["drift"].push_back(p.str());
  doc["diffusion"] = ordered_json::array();
  for (const auto& row : problem.sde.diffusion) {
    ordered_json jrow = ordered_json::array();
    for (const auto& p : row) jrow.push_back(p.str());
    doc["diffusion"].push_back(std::move(jrow));
  }
  ordered_json interior = ordered_json::array();
  for (const auto& p : problem.domain.interior.inequalities) {
    interior.push_back(p.str() + " >= 0");
  }
  ordered_json boundary = ordered_json::array();
  for (const auto& piece : problem.domain.boundary) {
    ordered_json jp;
    jp["eq"] = ordered_json::array();
    for (const auto& p : piece.equalities) jp["eq"].push_back(p.str() + " = 0");
    jp["ineq"] = ordered_json::array();
    for (const auto& p : piece.inequalities) jp["ineq"].push_back(p.str() + " >= 0");
    jp["label"] = piece.label;
    boundary.push_back(std::move(jp));
  }
  doc["domain"] = {{"interior", std::move(interior)}, {"boundary", std::move(boundary)}};
  doc["g"] = problem.functional.str();
  ordered_json initial;
  if (problem.initial.is_dirac()) {
    initial["type"] = "dirac";
    initial["point"] = problem.initial.point();
  } else {
    initial["type"] = "moments";
    initial["degree"] = problem.initial.moment_degree();
    ordered_json values = ordered_json::object();
    for (const auto& [alpha, value] : problem.initial.moment_table()) {
      values[exponent_key(alpha)] = value;
    }
    initial["values"] = std::move(values);
  }
  doc["initial"] = std::move(initial);
  out << doc.dump(2) << "\n";
}

std::string problem_to_json(const ExitProblem& problem) {
  std::ostringstream out;
  serialize_problem(problem, out);
  return out.str();
}

void add_ball_constraint(ExitProblem& problem, double radius) {
  if (radius <= 0.0) throw Error("ball radius must be positive");
  const int n = problem.sde.state_dim;
  Polynomial ball = Polynomial::constant(n, radius * radius);
  for (int k = 0; k < n; ++k) {
    MultiIndex alpha(n, 0);
    alpha[k] = 2;
    ball.add_term(alpha, -1.0);
  }
  problem.domain.interior.inequalities.push_back(std::move(ball));
}

}  // namespace sosexit
