#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

#include "mjls/lp.hpp"

namespace mjls::lp {

namespace {

std::string var_name(const Problem& p, std::size_t j) {
  const auto& name = p.variables()[j].name;
  std::string out = name.empty() ? "x" + std::to_string(j) : name;
  // CPLEX LP names may not contain brackets, commas or spaces.
  for (char& c : out) {
    if (c == '[' || c == ']' || c == ',' || c == ' ' || c == '(' || c == ')') c = '_';
  }
  return out + "_" + std::to_string(j);
}

void write_terms(std::ostream& out, const Problem& p, const std::vector<Term>& terms) {
  bool first = true;
  for (const auto& t : terms) {
    if (t.coef == 0.0) continue;
    if (t.coef < 0.0) {
      out << " - " << -t.coef;
    } else {
      out << (first ? " " : " + ") << t.coef;
    }
    out << " " << var_name(p, t.var);
    first = false;
  }
  if (first) out << " 0 " << var_name(p, 0);
}

}  // namespace

void write_cplex_lp(const Problem& problem, std::ostream& out) {
  out << std::setprecision(17);
  out << "\\ generated by mjls\nMinimize\n obj:";
  std::vector<Term> objective;
  for (std::size_t j = 0; j < problem.variable_count(); ++j) {
    if (problem.variables()[j].cost != 0.0) objective.push_back({j, problem.variables()[j].cost});
  }
  if (problem.variable_count() > 0) write_terms(out, problem, objective);
  out << "\nSubject To\n";
  for (std::size_t i = 0; i < problem.row_count(); ++i) {
    const auto& r = problem.rows()[i];
    out << " c" << i << ":";
    write_terms(out, problem, r.terms);
    switch (r.relation) {
      case Relation::Less:
      case Relation::LessEqual: out << " <= "; break;
      case Relation::Equal: out << " = "; break;
      case Relation::Greater:
      case Relation::GreaterEqual: out << " >= "; break;
    }
    out << r.rhs << "\n";
  }
  out << "Bounds\n";
  for (std::size_t j = 0; j < problem.variable_count(); ++j) {
    const auto& v = problem.variables()[j];
    const std::string name = var_name(problem, j);
    if (std::isinf(v.lower) && std::isinf(v.upper)) {
      out << " " << name << " free\n";
    } else {
      out << " ";
      if (std::isinf(v.lower)) out << "-inf"; else out << v.lower;
      out << " <= " << name << " <= ";
      if (std::isinf(v.upper)) out << "+inf"; else out << v.upper;
      out << "\n";
    }
  }
  out << "End\n";
}

}  // namespace mjls::lp
