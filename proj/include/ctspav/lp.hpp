#pragma once

#include <Eigen/Core>
#include <Eigen/LU>

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace ctspav::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Sense { le, ge, eq };

struct Term {
  int var = 0;
  double coef = 0;
};

struct Variable {
  double lo = 0;
  double hi = kInf;
  double cost = 0;
  bool integer = false;
  int branch_class = 0;  // lower classes are branched on first
  std::string name;
};

/// lo <= sum(terms) <= hi
struct Row {
  std::vector<Term> terms;
  double lo = -kInf;
  double hi = kInf;
  std::string name;
};

Row make_row(std::vector<Term> terms, Sense sense, double rhs, std::string name = {});

/// Row activity of `x`.
double activity(const Row& row, std::span<const double> x);
/// Amount by which `x` violates `row` (0 if satisfied).
double violation(const Row& row, std::span<const double> x);

/// Minimization model with bounded variables and ranged rows.
class LinearModel {
 public:
  int add_variable(Variable v);
  int add_variable(double lo, double hi, double cost, bool integer = false, std::string name = {},
                   int branch_class = 0);
  int add_row(Row row);
  int add_row(std::vector<Term> terms, Sense sense, double rhs, std::string name = {});

  [[nodiscard]] int num_vars() const { return static_cast<int>(vars_.size()); }
  [[nodiscard]] int num_rows() const { return static_cast<int>(rows_.size()); }
  [[nodiscard]] const Variable& var(int j) const { return vars_[static_cast<std::size_t>(j)]; }
  [[nodiscard]] Variable& var(int j) { return vars_[static_cast<std::size_t>(j)]; }
  [[nodiscard]] const Row& row(int i) const { return rows_[static_cast<std::size_t>(i)]; }
  [[nodiscard]] const std::vector<Variable>& vars() const { return vars_; }
  [[nodiscard]] const std::vector<Row>& rows() const { return rows_; }

  [[nodiscard]] double objective(std::span<const double> x) const;
  /// Largest bound, row, or integrality violation of `x`.
  [[nodiscard]] double max_violation(std::span<const double> x, bool check_integrality = true) const;

  /// LP-format-like dump for debugging.
  void write_lp(std::ostream& os) const;

 private:
  std::vector<Variable> vars_;
  std::vector<Row> rows_;
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

const char* to_string(LpStatus s);

struct LPSolution {
  LpStatus status = LpStatus::infeasible;
  std::vector<double> x;
  std::vector<double> duals;  // one per row; d(objective)/d(row activity bound)
  std::vector<double> reduced_costs;
  double objective = 0;
  long iterations = 0;
};

struct SimplexOptions {
  double feas_tol = 1e-7;
  double opt_tol = 1e-9;  // relative to the terms of each reduced cost
  double pivot_tol = 1e-9;
  int refactor_every = 100;
  long max_iterations = 2'000'000;
};

/// Raised when the basis cannot be kept numerically sound.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bounded revised simplex on rows a.x - s = 0 with a logical s per row.
/// Keeps its basis between calls so bound changes, new rows and new columns
/// warm start (dual simplex after bound changes or new rows, primal after new
/// columns).
class Simplex {
 public:
  enum class VarStatus : std::uint8_t { basic, at_lower, at_upper, free_zero };

  explicit Simplex(const LinearModel& model, SimplexOptions options = {});

  LpStatus solve();

  void set_bounds(int var, double lo, double hi);
  [[nodiscard]] double lower(int var) const { return lo_[static_cast<std::size_t>(var)]; }
  [[nodiscard]] double upper(int var) const { return hi_[static_cast<std::size_t>(var)]; }
  void add_row(const Row& row);
  int add_column(const Variable& v, std::span<const Term> column);  // Term.var is the row index

  [[nodiscard]] int num_vars() const { return n_; }
  [[nodiscard]] int num_rows() const { return m_; }
  [[nodiscard]] LpStatus status() const { return status_; }
  [[nodiscard]] double objective() const;
  /// Lagrangian bound from the current duals over the variable and row
  /// bounds. Never above the LP optimum, whatever the accuracy of the duals.
  [[nodiscard]] double dual_bound() const;
  [[nodiscard]] std::vector<double> primal() const;
  [[nodiscard]] std::vector<double> duals() const;
  [[nodiscard]] std::vector<double> reduced_costs() const;
  [[nodiscard]] long iterations() const { return iterations_; }
  [[nodiscard]] LPSolution solution() const;

  /// Statuses of structurals then logicals; restores warm starts across tree nodes.
  [[nodiscard]] std::vector<VarStatus> basis() const { return status_of_; }
  void set_basis(const std::vector<VarStatus>& basis);

 private:
  struct Entry {
    int row;
    double val;
  };
  struct Eta {
    int pos;
    Eigen::VectorXd alpha;
  };

  [[nodiscard]] int total() const { return n_ + m_; }
  void column(int j, Eigen::VectorXd& out) const;  // dense A' column
  [[nodiscard]] double dot_column(const Eigen::VectorXd& y, int j) const;

  void refactor();
  void ftran(Eigen::VectorXd& v) const;  // in: dense column over rows; out: over basis positions
  void btran(Eigen::VectorXd& c) const;  // in: over basis positions; out: over rows
  void compute_primal();
  void compute_duals(const Eigen::VectorXd& cb);
  void place_nonbasic(int j);
  [[nodiscard]] double dual_tol(int j) const;
  [[nodiscard]] double dual_slack(int j) const;
  [[nodiscard]] bool primal_feasible() const;
  [[nodiscard]] bool dual_feasible() const;
  [[nodiscard]] bool eligible(int j, double d) const;
  void pivot(int pos, int entering, const Eigen::VectorXd& alpha, VarStatus leaving_status);
  void note_step(double step);
  void rebuild_head();

  LpStatus run_primal();
  LpStatus run_dual();

  SimplexOptions opt_;
  int n_ = 0;
  int m_ = 0;
  std::vector<std::vector<Entry>> cols_;  // structural columns
  std::vector<double> lo_, hi_, cost_;    // size n+m
  std::vector<double> x_;                 // size n+m
  std::vector<VarStatus> status_of_;      // size n+m
  std::vector<int> head_;                 // basis position -> variable
  std::vector<int> pos_of_;               // variable -> basis position or -1
  Eigen::VectorXd y_;                     // row duals
  Eigen::VectorXd d_;                     // reduced costs, size n+m

  // factorization of the basis at the last refactor plus eta file
  std::vector<int> base_head_;
  std::vector<int> kernel_rows_;       // rows whose logical is nonbasic in the base
  std::vector<int> kernel_row_index_;  // row -> index in kernel or -1
  std::vector<int> kernel_cols_;       // basis positions of structural basics
  std::vector<std::pair<int, int>> base_logicals_;  // (position, row) of basic logicals
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  std::vector<Eta> etas_;

  LpStatus status_ = LpStatus::infeasible;
  long iterations_ = 0;
  long solve_start_ = 0;
  long last_progress_it_ = 0;
  double last_progress_z_ = 0;
  bool stalled_ = false;
  bool gave_up_ = false;
  bool factor_valid_ = false;
  bool bland_ = false;
  int degenerate_run_ = 0;
};

/// One-shot convenience wrapper.
LPSolution solve_lp(const LinearModel& model, SimplexOptions options = {});

}  // namespace ctspav::lp
