#include <algorithm>
#include <cmath>
#include <sstream>

#include "ctspav/lp.hpp"

namespace ctspav::lp {

using Eigen::VectorXd;

Simplex::Simplex(const LinearModel& model, SimplexOptions options) : opt_(options) {
  n_ = model.num_vars();
  m_ = model.num_rows();
  cols_.assign(static_cast<std::size_t>(n_), {});
  for (int i = 0; i < m_; ++i) {
    for (const auto& t : model.row(i).terms) {
      if (t.coef == 0) continue;
      auto& col = cols_[static_cast<std::size_t>(t.var)];
      if (!col.empty() && col.back().row == i) {
        col.back().val += t.coef;
      } else {
        col.push_back({i, t.coef});
      }
    }
  }
  const auto N = static_cast<std::size_t>(total());
  lo_.resize(N);
  hi_.resize(N);
  cost_.assign(N, 0.0);
  x_.assign(N, 0.0);
  status_of_.assign(N, VarStatus::at_lower);
  for (int j = 0; j < n_; ++j) {
    const auto& v = model.var(j);
    lo_[static_cast<std::size_t>(j)] = v.lo;
    hi_[static_cast<std::size_t>(j)] = v.hi;
    cost_[static_cast<std::size_t>(j)] = v.cost;
    place_nonbasic(j);
  }
  for (int i = 0; i < m_; ++i) {
    const auto k = static_cast<std::size_t>(n_ + i);
    lo_[k] = model.row(i).lo;
    hi_[k] = model.row(i).hi;
    status_of_[k] = VarStatus::basic;
  }
  rebuild_head();
}

void Simplex::rebuild_head() {
  head_.clear();
  pos_of_.assign(static_cast<std::size_t>(total()), -1);
  for (int j = 0; j < total(); ++j) {
    if (status_of_[static_cast<std::size_t>(j)] == VarStatus::basic) {
      pos_of_[static_cast<std::size_t>(j)] = static_cast<int>(head_.size());
      head_.push_back(j);
    }
  }
  factor_valid_ = false;
}

void Simplex::place_nonbasic(int j) {
  const auto k = static_cast<std::size_t>(j);
  auto& st = status_of_[k];
  const bool lo_ok = std::isfinite(lo_[k]);
  const bool hi_ok = std::isfinite(hi_[k]);
  if (st == VarStatus::at_upper && hi_ok) {
    x_[k] = hi_[k];
  } else if (lo_ok) {
    st = VarStatus::at_lower;
    x_[k] = lo_[k];
  } else if (hi_ok) {
    st = VarStatus::at_upper;
    x_[k] = hi_[k];
  } else {
    st = VarStatus::free_zero;
    x_[k] = 0;
  }
}

void Simplex::column(int j, VectorXd& out) const {
  out.setZero(m_);
  if (j < n_) {
    for (const auto& e : cols_[static_cast<std::size_t>(j)]) out[e.row] = e.val;
  } else {
    out[j - n_] = -1.0;
  }
}

double Simplex::dot_column(const VectorXd& y, int j) const {
  if (j >= n_) return -y[j - n_];
  double s = 0;
  for (const auto& e : cols_[static_cast<std::size_t>(j)]) s += y[e.row] * e.val;
  return s;
}

void Simplex::refactor() {
  for (int attempt = 0;; ++attempt) {
    base_head_ = head_;
    kernel_cols_.clear();
    base_logicals_.clear();
    kernel_row_index_.assign(static_cast<std::size_t>(m_), 0);
    for (int p = 0; p < m_; ++p) {
      const int j = head_[static_cast<std::size_t>(p)];
      if (j < n_) {
        kernel_cols_.push_back(p);
      } else {
        base_logicals_.emplace_back(p, j - n_);
        kernel_row_index_[static_cast<std::size_t>(j - n_)] = -1;
      }
    }
    kernel_rows_.clear();
    for (int i = 0; i < m_; ++i) {
      if (kernel_row_index_[static_cast<std::size_t>(i)] == 0) {
        kernel_row_index_[static_cast<std::size_t>(i)] = static_cast<int>(kernel_rows_.size());
        kernel_rows_.push_back(i);
      }
    }
    const auto k = static_cast<Eigen::Index>(kernel_cols_.size());
    etas_.clear();
    if (k == 0) {
      factor_valid_ = true;
      return;
    }
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index c = 0; c < k; ++c) {
      const int j = head_[static_cast<std::size_t>(kernel_cols_[static_cast<std::size_t>(c)])];
      for (const auto& e : cols_[static_cast<std::size_t>(j)]) {
        const int r = kernel_row_index_[static_cast<std::size_t>(e.row)];
        if (r >= 0) K(r, c) = e.val;
      }
    }
    lu_.compute(K);
    if (lu_.rcond() > 1e-13) {
      factor_valid_ = true;
      return;
    }
    if (attempt > 3) throw NumericalError("basis repair failed; rcond " + std::to_string(lu_.rcond()));
    // swap dependent structural columns for logicals of the uncovered rows
    Eigen::FullPivLU<Eigen::MatrixXd> full(K);
    full.setThreshold(1e-11);
    const auto rank = full.rank();
    std::vector<int> bad_cols, bad_rows;
    for (Eigen::Index t = rank; t < k; ++t) bad_cols.push_back(static_cast<int>(full.permutationQ().indices()(t)));
    for (Eigen::Index i = 0; i < k; ++i) {
      if (full.permutationP().indices()(i) >= rank) bad_rows.push_back(static_cast<int>(i));
    }
    if (bad_cols.empty()) throw NumericalError("ill-conditioned basis without detectable rank loss");
    for (std::size_t t = 0; t < bad_cols.size() && t < bad_rows.size(); ++t) {
      const int p = kernel_cols_[static_cast<std::size_t>(bad_cols[t])];
      const int out = head_[static_cast<std::size_t>(p)];
      const int in = n_ + kernel_rows_[static_cast<std::size_t>(bad_rows[t])];
      status_of_[static_cast<std::size_t>(out)] = VarStatus::at_lower;
      place_nonbasic(out);
      pos_of_[static_cast<std::size_t>(out)] = -1;
      status_of_[static_cast<std::size_t>(in)] = VarStatus::basic;
      pos_of_[static_cast<std::size_t>(in)] = p;
      head_[static_cast<std::size_t>(p)] = in;
    }
  }
}

void Simplex::ftran(VectorXd& v) const {
  const auto k = static_cast<Eigen::Index>(kernel_cols_.size());
  VectorXd w(m_);
  VectorXd acc = VectorXd::Zero(m_);
  if (k > 0) {
    VectorXd rhs(k);
    for (Eigen::Index r = 0; r < k; ++r) rhs[r] = v[kernel_rows_[static_cast<std::size_t>(r)]];
    const VectorXd z = lu_.solve(rhs);
    for (Eigen::Index c = 0; c < k; ++c) {
      const int p = kernel_cols_[static_cast<std::size_t>(c)];
      w[p] = z[c];
      if (z[c] == 0) continue;
      for (const auto& e : cols_[static_cast<std::size_t>(base_head_[static_cast<std::size_t>(p)])]) {
        acc[e.row] += e.val * z[c];
      }
    }
  }
  for (const auto& [p, i] : base_logicals_) w[p] = acc[i] - v[i];
  for (const auto& eta : etas_) {
    const double piv = w[eta.pos] / eta.alpha[eta.pos];
    if (piv != 0) w.noalias() -= piv * eta.alpha;
    w[eta.pos] = piv;
  }
  v = std::move(w);
}

void Simplex::btran(VectorXd& c) const {
  for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
    const double own = c[it->pos];
    const double rest = c.dot(it->alpha) - own * it->alpha[it->pos];
    c[it->pos] = (own - rest) / it->alpha[it->pos];
  }
  VectorXd y = VectorXd::Zero(m_);
  for (const auto& [p, i] : base_logicals_) y[i] = -c[p];
  const auto k = static_cast<Eigen::Index>(kernel_cols_.size());
  if (k > 0) {
    VectorXd rhs(k);
    for (Eigen::Index col = 0; col < k; ++col) {
      const int p = kernel_cols_[static_cast<std::size_t>(col)];
      double s = c[p];
      for (const auto& e : cols_[static_cast<std::size_t>(base_head_[static_cast<std::size_t>(p)])]) {
        if (kernel_row_index_[static_cast<std::size_t>(e.row)] < 0) s -= y[e.row] * e.val;
      }
      rhs[col] = s;
    }
    const VectorXd z = lu_.transpose().solve(rhs);
    for (Eigen::Index r = 0; r < k; ++r) y[kernel_rows_[static_cast<std::size_t>(r)]] = z[r];
  }
  c = std::move(y);
}

void Simplex::compute_primal() {
  VectorXd r = VectorXd::Zero(m_);
  for (int j = 0; j < total(); ++j) {
    const auto k = static_cast<std::size_t>(j);
    if (status_of_[k] == VarStatus::basic || x_[k] == 0) continue;
    if (j < n_) {
      for (const auto& e : cols_[k]) r[e.row] -= e.val * x_[k];
    } else {
      r[j - n_] += x_[k];
    }
  }
  ftran(r);
  for (int p = 0; p < m_; ++p) x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(p)])] = r[p];
}

void Simplex::compute_duals(const VectorXd& cb) {
  VectorXd c = cb;
  btran(c);
  y_ = std::move(c);
  d_.resize(total());
  for (int j = 0; j < total(); ++j) {
    d_[j] = status_of_[static_cast<std::size_t>(j)] == VarStatus::basic ? 0.0 : -dot_column(y_, j);
  }
}

// Distance of d_j from the wrong sign; slightly infeasible values count as zero.
double Simplex::dual_slack(int j) const {
  switch (status_of_[static_cast<std::size_t>(j)]) {
    case VarStatus::at_lower: return std::max(0.0, d_[j]);
    case VarStatus::at_upper: return std::max(0.0, -d_[j]);
    default: return 0.0;
  }
}

// Relative to the size of the terms that make up d_j, so large costs on
// other columns do not blur the reduced costs of small ones.
double Simplex::dual_tol(int j) const {
  if (j >= n_) return opt_.opt_tol * std::max(1.0, std::abs(y_[j - n_]));
  double mag = std::abs(cost_[static_cast<std::size_t>(j)]);
  for (const auto& e : cols_[static_cast<std::size_t>(j)]) mag += std::abs(y_[e.row] * e.val);
  return opt_.opt_tol * std::max(1.0, mag);
}

bool Simplex::primal_feasible() const {
  for (int j : head_) {
    const auto k = static_cast<std::size_t>(j);
    if (x_[k] < lo_[k] - opt_.feas_tol || x_[k] > hi_[k] + opt_.feas_tol) return false;
  }
  return true;
}

bool Simplex::eligible(int j, double d) const {
  const auto k = static_cast<std::size_t>(j);
  if (lo_[k] == hi_[k]) return false;
  switch (status_of_[k]) {
    case VarStatus::at_lower: return d < 0;
    case VarStatus::at_upper: return d > 0;
    case VarStatus::free_zero: return d != 0;
    case VarStatus::basic: return false;
  }
  return false;
}

bool Simplex::dual_feasible() const {
  for (int j = 0; j < total(); ++j) {
    const double d = d_[j];
    if (eligible(j, d) && std::abs(d) > dual_tol(j)) return false;
  }
  return true;
}

void Simplex::pivot(int pos, int entering, const VectorXd& alpha, VarStatus leaving_status) {
  const int leaving = head_[static_cast<std::size_t>(pos)];
  status_of_[static_cast<std::size_t>(leaving)] = leaving_status;
  pos_of_[static_cast<std::size_t>(leaving)] = -1;
  head_[static_cast<std::size_t>(pos)] = entering;
  status_of_[static_cast<std::size_t>(entering)] = VarStatus::basic;
  pos_of_[static_cast<std::size_t>(entering)] = pos;
  etas_.push_back({pos, alpha});
  if (static_cast<int>(etas_.size()) >= opt_.refactor_every) factor_valid_ = false;
}

void Simplex::note_step(double step) {
  if (step > 1e-12) {
    degenerate_run_ = 0;
    bland_ = stalled_;
  } else if (++degenerate_run_ > 10 * std::max(m_, 1)) {
    bland_ = true;
  }
}

LpStatus Simplex::run_primal() {
  VectorXd cb(m_), alpha;
  // entering columns whose ratio test broke down on a fresh factorization
  std::vector<int> rejected;
  // record of the phase measure (infeasibility sum or objective) for stall detection
  double record = kInf;
  bool record_phase1 = true;
  long record_it = iterations_;
  for (;;) {
    if (!factor_valid_) {
      refactor();
      compute_primal();
    }
    if (++iterations_ - solve_start_ > opt_.max_iterations) return LpStatus::iteration_limit;
    bool phase1 = false;
    double infeas = 0;
    for (int p = 0; p < m_; ++p) {
      const auto k = static_cast<std::size_t>(head_[static_cast<std::size_t>(p)]);
      cb[p] = x_[k] < lo_[k] - opt_.feas_tol ? -1.0 : (x_[k] > hi_[k] + opt_.feas_tol ? 1.0 : 0.0);
      if (cb[p] != 0) infeas += std::max(lo_[k] - x_[k], x_[k] - hi_[k]);
      phase1 = phase1 || cb[p] != 0;
    }
    const double measure = phase1 ? infeas : objective();
    if (phase1 != record_phase1 || measure < record - 1e-9 * std::max(1.0, std::abs(record))) {
      record = measure;
      record_phase1 = phase1;
      record_it = iterations_;
    } else if (iterations_ - record_it > 20L * (m_ + n_)) {
      if (phase1) throw NumericalError("primal simplex stalled in phase one");
      // degenerate cycling at a feasible vertex: hand back the basis uncertified
      gave_up_ = true;
      return LpStatus::optimal;
    }
    if (!phase1) {
      for (int p = 0; p < m_; ++p) cb[p] = cost_[static_cast<std::size_t>(head_[static_cast<std::size_t>(p)])];
    }
    compute_duals(cb);
    if (!phase1) {
      for (int j = 0; j < total(); ++j) {
        if (status_of_[static_cast<std::size_t>(j)] != VarStatus::basic) d_[j] += cost_[static_cast<std::size_t>(j)];
      }
    }
    int q = -1;
    double best = 0;
    for (int j = 0; j < total(); ++j) {
      const double d = d_[j];
      if (!eligible(j, d) || std::abs(d) <= (phase1 ? 1e-9 : dual_tol(j))) continue;
      if (std::find(rejected.begin(), rejected.end(), j) != rejected.end()) continue;
      if (bland_) {
        q = j;
        break;
      }
      if (std::abs(d) > best) {
        best = std::abs(d);
        q = j;
      }
    }
    if (q < 0 && !rejected.empty() && phase1) throw NumericalError("no usable entering column in phase one");
    if (q < 0) return phase1 ? LpStatus::infeasible : LpStatus::optimal;

    const auto kq = static_cast<std::size_t>(q);
    const double dir = d_[q] < 0 ? 1.0 : -1.0;
    column(q, alpha);
    ftran(alpha);

    // two-pass ratio test; infeasible basics may move up to their violated bound
    const double ftol = opt_.feas_tol;
    double relaxed_max = kInf, exact_min = kInf;
    auto bound_for = [&](int p, double rate, double& bound, VarStatus& st) {
      const auto k = static_cast<std::size_t>(head_[static_cast<std::size_t>(p)]);
      if (rate < 0) {
        if (x_[k] > hi_[k] + ftol) {
          bound = hi_[k];
          st = VarStatus::at_upper;
        } else if (x_[k] < lo_[k] - ftol || !std::isfinite(lo_[k])) {
          return false;
        } else {
          bound = lo_[k];
          st = VarStatus::at_lower;
        }
      } else {
        if (x_[k] < lo_[k] - ftol) {
          bound = lo_[k];
          st = VarStatus::at_lower;
        } else if (x_[k] > hi_[k] + ftol || !std::isfinite(hi_[k])) {
          return false;
        } else {
          bound = hi_[k];
          st = VarStatus::at_upper;
        }
      }
      return true;
    };
    for (int p = 0; p < m_; ++p) {
      if (std::abs(alpha[p]) <= opt_.pivot_tol) continue;
      const double rate = -dir * alpha[p];
      double bound;
      VarStatus st;
      if (!bound_for(p, rate, bound, st)) continue;
      const double x = x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(p)])];
      const double gap = std::abs(x - bound);
      exact_min = std::min(exact_min, gap / std::abs(rate));
      relaxed_max = std::min(relaxed_max, (gap + ftol) / std::abs(rate));
    }
    const double span = hi_[kq] - lo_[kq];
    if (std::isfinite(span) && span <= exact_min) {
      const double step = dir * span;
      x_[kq] += step;
      for (int p = 0; p < m_; ++p) x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(p)])] -= step * alpha[p];
      status_of_[kq] = status_of_[kq] == VarStatus::at_lower ? VarStatus::at_upper : VarStatus::at_lower;
      note_step(span);
      continue;
    }
    if (!std::isfinite(relaxed_max)) {
      if (!phase1) return LpStatus::unbounded;
      // phase one cannot be unbounded: the column is numerically unreliable
      if (etas_.empty()) rejected.push_back(q);
      factor_valid_ = false;
      continue;
    }
    int leave = -1;
    double leave_bound = 0, theta = 0, best_piv = -1;
    VarStatus leave_status = VarStatus::at_lower;
    for (int p = 0; p < m_; ++p) {
      if (std::abs(alpha[p]) <= opt_.pivot_tol) continue;
      const double rate = -dir * alpha[p];
      double bound;
      VarStatus st;
      if (!bound_for(p, rate, bound, st)) continue;
      const int j = head_[static_cast<std::size_t>(p)];
      const double t = std::abs(x_[static_cast<std::size_t>(j)] - bound) / std::abs(rate);
      bool take;
      if (bland_) {
        take = t < theta - 1e-12 || leave < 0 || (t <= theta + 1e-12 && j < head_[static_cast<std::size_t>(leave)]);
        if (t > exact_min + 1e-12) take = false;
      } else {
        take = t <= relaxed_max && std::abs(alpha[p]) > best_piv;
      }
      if (take) {
        leave = p;
        theta = t;
        leave_bound = bound;
        leave_status = st;
        best_piv = std::abs(alpha[p]);
      }
    }
    if (leave < 0) {
      if (etas_.empty()) rejected.push_back(q);
      factor_valid_ = false;
      continue;
    }
    const double step = dir * theta;
    x_[kq] += step;
    for (int p = 0; p < m_; ++p) x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(p)])] -= step * alpha[p];
    x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(leave)])] = leave_bound;
    pivot(leave, q, alpha, leave_status);
    rejected.clear();
    note_step(theta);
  }
}

LpStatus Simplex::run_dual() {
  VectorXd cb(m_), rho(m_), alpha;
  const double ftol = opt_.feas_tol;
  // entering columns whose pivot vanished on a fresh factorization
  std::vector<int> rejected;
  for (;;) {
    if (!factor_valid_) {
      refactor();
      compute_primal();
    }
    if (++iterations_ - solve_start_ > opt_.max_iterations) return LpStatus::iteration_limit;
    for (int p = 0; p < m_; ++p) cb[p] = cost_[static_cast<std::size_t>(head_[static_cast<std::size_t>(p)])];
    compute_duals(cb);
    for (int j = 0; j < total(); ++j) {
      if (status_of_[static_cast<std::size_t>(j)] != VarStatus::basic) d_[j] += cost_[static_cast<std::size_t>(j)];
    }

    int r = -1;
    double worst = ftol;
    for (int p = 0; p < m_; ++p) {
      const auto k = static_cast<std::size_t>(head_[static_cast<std::size_t>(p)]);
      const double infeas = std::max(lo_[k] - x_[k], x_[k] - hi_[k]);
      if (infeas <= ftol) continue;
      if (bland_) {
        if (r < 0 || head_[static_cast<std::size_t>(p)] < head_[static_cast<std::size_t>(r)]) r = p;
      } else if (infeas > worst) {
        worst = infeas;
        r = p;
      }
    }
    if (r < 0) return LpStatus::optimal;
    // the dual objective should climb; without a new record for a long stretch
    // tolerances have broken dual feasibility, so hand over to the primal method
    const double z = objective();
    if (z > last_progress_z_ + 1e-9 * std::max(1.0, std::abs(z))) {
      last_progress_z_ = z;
      last_progress_it_ = iterations_;
    } else if (iterations_ - last_progress_it_ > 20L * (m_ + n_)) {
      stalled_ = bland_ = true;
      return LpStatus::optimal;
    }
    const int out = head_[static_cast<std::size_t>(r)];
    const auto ko = static_cast<std::size_t>(out);
    const bool raise = x_[ko] < lo_[ko];
    const double target = raise ? lo_[ko] : hi_[ko];

    rho.setZero();
    rho[r] = 1.0;
    btran(rho);

    double relaxed_max = kInf;
    std::vector<std::pair<int, double>> cand;
    for (int j = 0; j < total(); ++j) {
      const auto k = static_cast<std::size_t>(j);
      const auto st = status_of_[k];
      if (st == VarStatus::basic || lo_[k] == hi_[k]) continue;
      const double a = dot_column(rho, j);
      if (std::abs(a) <= opt_.pivot_tol) continue;
      if (std::find(rejected.begin(), rejected.end(), j) != rejected.end()) continue;
      // x_out changes by -a per unit increase of x_j
      const bool ok = st == VarStatus::free_zero ||
                      (raise ? (st == VarStatus::at_lower ? a < 0 : a > 0) : (st == VarStatus::at_lower ? a > 0 : a < 0));
      if (!ok) continue;
      relaxed_max = std::min(relaxed_max, (dual_slack(j) + dual_tol(j)) / std::abs(a));
      cand.emplace_back(j, a);
    }
    if (cand.empty()) {
      if (!rejected.empty()) {
        stalled_ = bland_ = true;
        return LpStatus::optimal;
      }
      return LpStatus::infeasible;
    }
    int q = -1;
    double best_piv = -1, best_ratio = kInf;
    for (const auto& [j, a] : cand) {
      const double ratio = dual_slack(j) / std::abs(a);
      if (bland_) {
        if (ratio < best_ratio - 1e-12 || (ratio <= best_ratio + 1e-12 && (q < 0 || j < q))) {
          best_ratio = ratio;
          q = j;
        }
      } else if (ratio <= relaxed_max && std::abs(a) > best_piv) {
        best_piv = std::abs(a);
        best_ratio = ratio;
        q = j;
      }
    }
    if (q < 0) throw NumericalError("dual ratio test found no pivot");
    column(q, alpha);
    ftran(alpha);
    if (std::abs(alpha[r]) <= opt_.pivot_tol) {
      // row and column disagree: refresh the factorization and retry
      if (etas_.empty()) rejected.push_back(q);
      factor_valid_ = false;
      continue;
    }
    const double delta = (x_[ko] - target) / alpha[r];
    const auto kq = static_cast<std::size_t>(q);
    x_[kq] += delta;
    for (int p = 0; p < m_; ++p) x_[static_cast<std::size_t>(head_[static_cast<std::size_t>(p)])] -= delta * alpha[p];
    x_[ko] = target;
    pivot(r, q, alpha, raise ? VarStatus::at_lower : VarStatus::at_upper);
    rejected.clear();
    note_step(best_ratio);
  }
}

LpStatus Simplex::solve() {
  VectorXd cb(m_);
  bland_ = stalled_ = gave_up_ = false;
  degenerate_run_ = 0;
  solve_start_ = last_progress_it_ = iterations_;
  last_progress_z_ = -kInf;
  for (int attempt = 0; attempt < 6; ++attempt) {
    if (!factor_valid_) refactor();
    compute_primal();
    for (int p = 0; p < m_; ++p) cb[p] = cost_[static_cast<std::size_t>(head_[static_cast<std::size_t>(p)])];
    compute_duals(cb);
    for (int j = 0; j < total(); ++j) {
      if (status_of_[static_cast<std::size_t>(j)] != VarStatus::basic) d_[j] += cost_[static_cast<std::size_t>(j)];
    }
    const bool pf = primal_feasible();
    const bool df = dual_feasible();
    if (pf && (df || gave_up_ || attempt == 5)) {
      // a feasible basis that keeps failing the fresh optimality check is
      // returned as is; dual_bound() still bounds the optimum from below
      status_ = LpStatus::optimal;
      return status_;
    }
    LpStatus st = (!pf && df && !stalled_) ? run_dual() : run_primal();
    if (st != LpStatus::optimal) {
      status_ = st;
      return status_;
    }
    factor_valid_ = false;
  }
  throw NumericalError("simplex failed to certify optimality after repeated refactorization");
}

void Simplex::set_bounds(int var, double lo, double hi) {
  if (lo > hi) throw std::invalid_argument("bounds cross");
  const auto k = static_cast<std::size_t>(var);
  lo_[k] = lo;
  hi_[k] = hi;
  if (status_of_[k] != VarStatus::basic) place_nonbasic(var);
}

void Simplex::add_row(const Row& row) {
  const int i = m_;
  for (const auto& t : row.terms) {
    if (t.coef == 0) continue;
    auto& col = cols_[static_cast<std::size_t>(t.var)];
    if (!col.empty() && col.back().row == i) {
      col.back().val += t.coef;
    } else {
      col.push_back({i, t.coef});
    }
  }
  ++m_;
  lo_.push_back(row.lo);
  hi_.push_back(row.hi);
  cost_.push_back(0);
  x_.push_back(activity(row, std::span<const double>(x_.data(), static_cast<std::size_t>(n_))));
  status_of_.push_back(VarStatus::basic);
  pos_of_.push_back(static_cast<int>(head_.size()));
  head_.push_back(n_ + i);
  factor_valid_ = false;
}

int Simplex::add_column(const Variable& v, std::span<const Term> column) {
  const int j = n_;
  auto shift = [j](int& var) {
    if (var >= j) ++var;
  };
  for (auto& h : head_) shift(h);
  for (auto& h : base_head_) shift(h);
  const auto at = static_cast<std::ptrdiff_t>(j);
  lo_.insert(lo_.begin() + at, v.lo);
  hi_.insert(hi_.begin() + at, v.hi);
  cost_.insert(cost_.begin() + at, v.cost);
  x_.insert(x_.begin() + at, 0.0);
  status_of_.insert(status_of_.begin() + at, VarStatus::at_lower);
  pos_of_.insert(pos_of_.begin() + at, -1);
  std::vector<Entry> col;
  for (const auto& t : column) {
    if (t.coef != 0) col.push_back({t.var, t.coef});
  }
  std::sort(col.begin(), col.end(), [](const Entry& a, const Entry& b) { return a.row < b.row; });
  cols_.push_back(std::move(col));
  ++n_;
  place_nonbasic(j);
  return j;
}

void Simplex::set_basis(const std::vector<VarStatus>& basis) {
  // statuses were saved with possibly fewer rows; new logicals stay basic
  const std::size_t old_total = basis.size();
  const std::size_t old_rows = old_total - static_cast<std::size_t>(n_);
  for (std::size_t k = 0; k < static_cast<std::size_t>(total()); ++k) {
    if (k < static_cast<std::size_t>(n_)) {
      status_of_[k] = basis[k];
    } else if (k - static_cast<std::size_t>(n_) < old_rows) {
      status_of_[k] = basis[k];
    } else {
      status_of_[k] = VarStatus::basic;
    }
  }
  int basics = 0;
  for (auto st : status_of_) basics += st == VarStatus::basic;
  for (int i = 0; i < m_ && basics < m_; ++i) {
    auto& st = status_of_[static_cast<std::size_t>(n_ + i)];
    if (st != VarStatus::basic) {
      st = VarStatus::basic;
      ++basics;
    }
  }
  for (int j = 0; j < n_ && basics > m_; ++j) {
    auto& st = status_of_[static_cast<std::size_t>(j)];
    if (st == VarStatus::basic) {
      st = VarStatus::at_lower;
      --basics;
    }
  }
  for (int j = 0; j < total(); ++j) {
    if (status_of_[static_cast<std::size_t>(j)] != VarStatus::basic) place_nonbasic(j);
  }
  rebuild_head();
}

double Simplex::objective() const {
  double z = 0;
  for (int j = 0; j < n_; ++j) z += cost_[static_cast<std::size_t>(j)] * x_[static_cast<std::size_t>(j)];
  return z;
}

double Simplex::dual_bound() const {
  if (y_.size() != m_) return -kInf;
  // rows with an infinite side only admit duals of one sign
  VectorXd y = y_;
  double z = 0;
  for (int i = 0; i < m_; ++i) {
    const auto k = static_cast<std::size_t>(n_ + i);
    if (y[i] > 0) {
      if (std::isfinite(lo_[k])) z += y[i] * lo_[k]; else y[i] = 0;
    } else if (y[i] < 0) {
      if (std::isfinite(hi_[k])) z += y[i] * hi_[k]; else y[i] = 0;
    }
  }
  for (int j = 0; j < n_; ++j) {
    const auto k = static_cast<std::size_t>(j);
    const double r = cost_[k] - dot_column(y, j);
    if (r > 0) {
      if (!std::isfinite(lo_[k])) return -kInf;
      z += r * lo_[k];
    } else if (r < 0) {
      if (!std::isfinite(hi_[k])) return -kInf;
      z += r * hi_[k];
    }
  }
  return z;
}

std::vector<double> Simplex::primal() const { return {x_.begin(), x_.begin() + n_}; }

std::vector<double> Simplex::duals() const { return {y_.data(), y_.data() + y_.size()}; }

std::vector<double> Simplex::reduced_costs() const {
  std::vector<double> out(static_cast<std::size_t>(n_));
  for (int j = 0; j < n_; ++j) out[static_cast<std::size_t>(j)] = d_.size() > j ? d_[j] : 0.0;
  return out;
}

LPSolution Simplex::solution() const {
  LPSolution s;
  s.status = status_;
  s.iterations = iterations_;
  if (status_ == LpStatus::optimal) {
    s.x = primal();
    s.duals = duals();
    s.reduced_costs = reduced_costs();
    s.objective = objective();
  }
  return s;
}

LPSolution solve_lp(const LinearModel& model, SimplexOptions options) {
  Simplex simplex(model, options);
  simplex.solve();
  return simplex.solution();
}

}  // namespace ctspav::lp
