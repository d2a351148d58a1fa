#include <algorithm>
#include <cmath>
#include <ostream>

#include "ctspav/lp.hpp"

namespace ctspav::lp {

Row make_row(std::vector<Term> terms, Sense sense, double rhs, std::string name) {
  Row r;
  r.terms = std::move(terms);
  r.name = std::move(name);
  switch (sense) {
    case Sense::le: r.hi = rhs; break;
    case Sense::ge: r.lo = rhs; break;
    case Sense::eq: r.lo = r.hi = rhs; break;
  }
  return r;
}

double activity(const Row& row, std::span<const double> x) {
  double s = 0;
  for (const auto& t : row.terms) s += t.coef * x[static_cast<std::size_t>(t.var)];
  return s;
}

double violation(const Row& row, std::span<const double> x) {
  const double a = activity(row, x);
  return std::max({0.0, row.lo - a, a - row.hi});
}

int LinearModel::add_variable(Variable v) {
  if (v.lo > v.hi) throw std::invalid_argument("variable bounds cross");
  if (v.integer && (!std::isfinite(v.lo) || !std::isfinite(v.hi))) {
    throw std::invalid_argument("integer variables need finite bounds");
  }
  vars_.push_back(std::move(v));
  return num_vars() - 1;
}

int LinearModel::add_variable(double lo, double hi, double cost, bool integer, std::string name,
                              int branch_class) {
  return add_variable(Variable{lo, hi, cost, integer, branch_class, std::move(name)});
}

int LinearModel::add_row(Row row) {
  for (const auto& t : row.terms) {
    if (t.var < 0 || t.var >= num_vars()) throw std::invalid_argument("row references unknown variable");
  }
  rows_.push_back(std::move(row));
  return num_rows() - 1;
}

int LinearModel::add_row(std::vector<Term> terms, Sense sense, double rhs, std::string name) {
  return add_row(make_row(std::move(terms), sense, rhs, std::move(name)));
}

double LinearModel::objective(std::span<const double> x) const {
  double z = 0;
  for (std::size_t j = 0; j < vars_.size(); ++j) z += vars_[j].cost * x[j];
  return z;
}

double LinearModel::max_violation(std::span<const double> x, bool check_integrality) const {
  double worst = 0;
  for (std::size_t j = 0; j < vars_.size(); ++j) {
    const auto& v = vars_[j];
    worst = std::max({worst, v.lo - x[j], x[j] - v.hi});
    if (check_integrality && v.integer) worst = std::max(worst, std::abs(x[j] - std::round(x[j])));
  }
  for (const auto& r : rows_) worst = std::max(worst, violation(r, x));
  return worst;
}

namespace {

std::string var_name(const LinearModel& m, int j) {
  const auto& n = m.var(j).name;
  return n.empty() ? "x" + std::to_string(j) : n;
}

void write_terms(std::ostream& os, const LinearModel& m, const std::vector<Term>& terms) {
  bool first = true;
  for (const auto& t : terms) {
    if (t.coef == 0) continue;
    os << (t.coef < 0 ? " - " : (first ? " " : " + ")) << std::abs(t.coef) << ' ' << var_name(m, t.var);
    first = false;
  }
  if (first) os << " 0";
}

}  // namespace

void LinearModel::write_lp(std::ostream& os) const {
  os << "Minimize\n obj:";
  std::vector<Term> obj;
  for (int j = 0; j < num_vars(); ++j) {
    if (vars_[static_cast<std::size_t>(j)].cost != 0) obj.push_back({j, vars_[static_cast<std::size_t>(j)].cost});
  }
  write_terms(os, *this, obj);
  os << "\nSubject To\n";
  for (int i = 0; i < num_rows(); ++i) {
    const auto& r = rows_[static_cast<std::size_t>(i)];
    const std::string name = r.name.empty() ? "r" + std::to_string(i) : r.name;
    if (r.lo == r.hi) {
      os << ' ' << name << ':';
      write_terms(os, *this, r.terms);
      os << " = " << r.lo << '\n';
      continue;
    }
    if (r.lo > -kInf) {
      os << ' ' << name << (r.hi < kInf ? "_lo:" : ":");
      write_terms(os, *this, r.terms);
      os << " >= " << r.lo << '\n';
    }
    if (r.hi < kInf) {
      os << ' ' << name << (r.lo > -kInf ? "_hi:" : ":");
      write_terms(os, *this, r.terms);
      os << " <= " << r.hi << '\n';
    }
  }
  os << "Bounds\n";
  for (int j = 0; j < num_vars(); ++j) {
    const auto& v = vars_[static_cast<std::size_t>(j)];
    os << ' ';
    if (v.lo == -kInf && v.hi == kInf) {
      os << var_name(*this, j) << " free\n";
      continue;
    }
    if (v.lo == -kInf) os << "-inf"; else os << v.lo;
    os << " <= " << var_name(*this, j) << " <= ";
    if (v.hi == kInf) os << "+inf"; else os << v.hi;
    os << '\n';
  }
  os << "General\n";
  for (int j = 0; j < num_vars(); ++j) {
    if (vars_[static_cast<std::size_t>(j)].integer) os << ' ' << var_name(*this, j) << '\n';
  }
  os << "End\n";
}

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::iteration_limit: return "iteration_limit";
  }
  return "?";
}

}  // namespace ctspav::lp
