#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hetsched {

// All contract violations in the library are reported with this type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

template <typename... Args>
std::string concat(Args&&... args) {
  std::ostringstream oss;
  (oss << ... << std::forward<Args>(args));
  return oss.str();
}

inline bool nearly_equal(double a, double b, double rel = 1e-9) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace detail

// Dense row-major k x l grid.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  Grid(std::initializer_list<std::initializer_list<T>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw Error("ragged grid rows");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  static Grid from_rows(const std::vector<std::vector<T>>& rows) {
    Grid g;
    g.rows_ = rows.size();
    g.cols_ = rows.empty() ? 0 : rows.front().size();
    g.data_.reserve(g.rows_ * g.cols_);
    for (const auto& r : rows) {
      if (r.size() != g.cols_) throw Error("ragged grid rows");
      g.data_.insert(g.data_.end(), r.begin(), r.end());
    }
    return g;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const T> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
  std::span<const T> values() const noexcept { return data_; }

  std::vector<std::vector<T>> to_rows() const {
    std::vector<std::vector<T>> out(rows_);
    for (std::size_t i = 0; i < rows_; ++i) out[i].assign(row(i).begin(), row(i).end());
    return out;
  }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

/// Processing rates mu(i, j) of task type i on processor type j, in tasks
/// per second. Every entry is strictly positive and finite.
class AffinityMatrix {
 public:
  AffinityMatrix() = default;

  explicit AffinityMatrix(Grid<double> rates) : rates_(std::move(rates)) { validate(); }
  AffinityMatrix(std::initializer_list<std::initializer_list<double>> rows)
      : rates_(rows) {
    validate();
  }
  static AffinityMatrix from_rows(const std::vector<std::vector<double>>& rows) {
    return AffinityMatrix(Grid<double>::from_rows(rows));
  }

  std::size_t task_types() const noexcept { return rates_.rows(); }
  std::size_t processor_types() const noexcept { return rates_.cols(); }
  double operator()(std::size_t i, std::size_t j) const { return rates_(i, j); }
  const Grid<double>& rates() const noexcept { return rates_; }

  // Two-type affinity system: mu11 > mu12 and mu21 < mu22.
  bool is_two_type_affinity() const {
    return task_types() == 2 && processor_types() == 2 && rates_(0, 0) > rates_(0, 1) &&
           rates_(1, 0) < rates_(1, 1);
  }

  AffinityMatrix scaled(double c) const {
    if (!(c > 0.0)) throw Error("scale factor must be positive");
    Grid<double> g = rates_;
    for (std::size_t i = 0; i < g.rows(); ++i)
      for (std::size_t j = 0; j < g.cols(); ++j) g(i, j) *= c;
    return AffinityMatrix(std::move(g));
  }

  // Row index holding the largest rate in column j (ties: lowest row).
  std::size_t column_argmax(std::size_t j) const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < task_types(); ++i)
      if (rates_(i, j) > rates_(best, j)) best = i;
    return best;
  }

  // Column holding the largest rate in row i (ties: lowest column).
  std::size_t row_argmax(std::size_t i) const {
    std::size_t best = 0;
    for (std::size_t j = 1; j < processor_types(); ++j)
      if (rates_(i, j) > rates_(i, best)) best = j;
    return best;
  }

  friend bool operator==(const AffinityMatrix&, const AffinityMatrix&) = default;

 private:
  void validate() const {
    if (rates_.rows() == 0 || rates_.cols() == 0)
      throw Error("affinity matrix needs at least one task type and one processor type");
    for (double v : rates_.values())
      if (!(v > 0.0) || !std::isfinite(v))
        throw Error(detail::concat("affinity rates must be positive and finite, got ", v));
  }

  Grid<double> rates_;
};

/// System state: N(i, j) tasks of type i queued on processor j. Row totals
/// are fixed at construction and preserved by move_task().
class AssignmentMatrix {
 public:
  using Count = long;

  AssignmentMatrix() = default;

  explicit AssignmentMatrix(Grid<Count> counts) : counts_(std::move(counts)) {
    for (Count c : counts_.values())
      if (c < 0) throw Error("assignment counts must be nonnegative");
    row_totals_.assign(counts_.rows(), 0);
    for (std::size_t i = 0; i < counts_.rows(); ++i)
      for (Count c : counts_.row(i)) row_totals_[i] += c;
  }
  AssignmentMatrix(std::initializer_list<std::initializer_list<Count>> rows)
      : AssignmentMatrix(Grid<Count>(rows)) {}

  static AssignmentMatrix from_rows(const std::vector<std::vector<Count>>& rows) {
    return AssignmentMatrix(Grid<Count>::from_rows(rows));
  }
  static AssignmentMatrix zeros(std::size_t k, std::size_t l) {
    return AssignmentMatrix(Grid<Count>(k, l, 0));
  }

  std::size_t task_types() const noexcept { return counts_.rows(); }
  std::size_t processor_types() const noexcept { return counts_.cols(); }
  Count operator()(std::size_t i, std::size_t j) const { return counts_(i, j); }
  const Grid<Count>& counts() const noexcept { return counts_; }
  const std::vector<Count>& row_totals() const noexcept { return row_totals_; }
  Count row_total(std::size_t i) const { return row_totals_.at(i); }

  Count column_total(std::size_t j) const {
    Count s = 0;
    for (std::size_t i = 0; i < counts_.rows(); ++i) s += counts_(i, j);
    return s;
  }
  Count total() const {
    return std::accumulate(row_totals_.begin(), row_totals_.end(), Count{0});
  }

  // Moves one type-`row` task from processor `from` to processor `to`.
  void move_task(std::size_t row, std::size_t from, std::size_t to) {
    if (counts_(row, from) <= 0)
      throw Error(detail::concat("no type-", row, " task on processor ", from, " to move"));
    --counts_(row, from);
    ++counts_(row, to);
  }

  // Copies with one task inserted or removed; row totals change accordingly.
  AssignmentMatrix with_added(std::size_t i, std::size_t j) const {
    Grid<Count> g = counts_;
    ++g(i, j);
    return AssignmentMatrix(std::move(g));
  }
  AssignmentMatrix with_removed(std::size_t i, std::size_t j) const {
    if (counts_(i, j) <= 0) throw Error("no such task to remove");
    Grid<Count> g = counts_;
    --g(i, j);
    return AssignmentMatrix(std::move(g));
  }

  friend bool operator==(const AssignmentMatrix& a, const AssignmentMatrix& b) {
    return a.counts_ == b.counts_;
  }

 private:
  Grid<Count> counts_;
  std::vector<Count> row_totals_;
};

/// The two free variables (N11, N22) of a 2x2 system state.
struct SystemState2 {
  long n11 = 0;
  long n22 = 0;
  friend bool operator==(const SystemState2&, const SystemState2&) = default;
};

inline void check_state_range(const SystemState2& s, long n1, long n2) {
  if (n1 < 0 || n2 < 0) throw Error("population counts must be nonnegative");
  if (s.n11 < 0 || s.n11 > n1 || s.n22 < 0 || s.n22 > n2)
    throw Error(detail::concat("state (", s.n11, ", ", s.n22, ") outside [0, ", n1, "] x [0, ",
                               n2, "]"));
}

// N = [[n11, N1 - n11], [N2 - n22, n22]].
inline AssignmentMatrix to_assignment(const SystemState2& s, long n1, long n2) {
  check_state_range(s, n1, n2);
  return AssignmentMatrix{{s.n11, n1 - s.n11}, {n2 - s.n22, s.n22}};
}

inline SystemState2 to_state2(const AssignmentMatrix& n) {
  if (n.task_types() != 2 || n.processor_types() != 2) throw Error("not a 2x2 assignment");
  return {n(0, 0), n(1, 1)};
}

/// P(i, j) = coefficient * mu(i, j)^exponent. Exponent 0 is constant power,
/// 1 is power proportional to speed, <= 0 the strong-affinity regime.
struct PowerModel {
  double coefficient = 1.0;
  double exponent = 1.0;

  void validate() const {
    if (!(coefficient > 0.0) || !std::isfinite(coefficient))
      throw Error("power coefficient must be positive");
    if (!(exponent <= 1.0) || !std::isfinite(exponent))
      throw Error("power exponent must be finite and <= 1");
  }
  double power(double rate) const { return coefficient * std::pow(rate, exponent); }
};

struct Metrics {
  double throughput = 0.0;        // tasks / s
  double meanResponseTime = 0.0;  // s
  double meanEnergyPerTask = 0.0; // J
  double edp = 0.0;               // J * s
  long completedTasks = 0;
  double elapsedTime = 0.0;       // s
};

inline void check_shapes(const AffinityMatrix& mu, const AssignmentMatrix& n) {
  if (mu.task_types() != n.task_types() || mu.processor_types() != n.processor_types())
    throw Error(detail::concat("shape mismatch: affinity ", mu.task_types(), "x",
                               mu.processor_types(), " vs assignment ", n.task_types(), "x",
                               n.processor_types()));
}

// Per-task rate mu(i, j) / (tasks on j) when processor j is time-shared.
inline double time_shared_rate(const AffinityMatrix& mu, const AssignmentMatrix& n,
                               std::size_t i, std::size_t j) {
  check_shapes(mu, n);
  if (i >= mu.task_types() || j >= mu.processor_types()) throw Error("index out of range");
  const auto occupancy = n.column_total(j);
  if (occupancy == 0) throw Error(detail::concat("no tasks on processor ", j));
  return mu(i, j) / static_cast<double>(occupancy);
}

// X_j: completion rate of processor j; an empty processor contributes 0.
inline double column_throughput(const AffinityMatrix& mu, const AssignmentMatrix& n,
                                std::size_t j) {
  double weighted = 0.0;
  AssignmentMatrix::Count occupancy = 0;
  for (std::size_t i = 0; i < mu.task_types(); ++i) {
    weighted += mu(i, j) * static_cast<double>(n(i, j));
    occupancy += n(i, j);
  }
  return occupancy == 0 ? 0.0 : weighted / static_cast<double>(occupancy);
}

inline double throughput_state(const AffinityMatrix& mu, const AssignmentMatrix& n) {
  check_shapes(mu, n);
  double x = 0.0;
  for (std::size_t j = 0; j < mu.processor_types(); ++j) x += column_throughput(mu, n, j);
  return x;
}

inline double throughput_state2(const AffinityMatrix& mu, const SystemState2& s, long n1,
                                long n2) {
  if (mu.task_types() != 2 || mu.processor_types() != 2) throw Error("expected a 2x2 affinity");
  return throughput_state(mu, to_assignment(s, n1, n2));
}

inline Grid<double> power_matrix(const AffinityMatrix& mu, const PowerModel& pm) {
  pm.validate();
  Grid<double> p(mu.task_types(), mu.processor_types());
  for (std::size_t i = 0; i < mu.task_types(); ++i)
    for (std::size_t j = 0; j < mu.processor_types(); ++j) p(i, j) = pm.power(mu(i, j));
  return p;
}

/// Expected energy per completed task in state `n`: the completion-weighted
/// sum of P(i,j) / mu(i,j). Idle processors are excluded from the sum.
inline double expected_energy(const AffinityMatrix& mu, const AssignmentMatrix& n,
                              const PowerModel& pm) {
  const double x = throughput_state(mu, n);
  if (!(x > 0.0)) throw Error("zero throughput: energy per task undefined");
  const auto p = power_matrix(mu, pm);
  double column_power = 0.0;
  for (std::size_t j = 0; j < mu.processor_types(); ++j) {
    const auto occupancy = n.column_total(j);
    if (occupancy == 0) continue;
    for (std::size_t i = 0; i < mu.task_types(); ++i)
      column_power += static_cast<double>(n(i, j)) / static_cast<double>(occupancy) * p(i, j);
  }
  return column_power / x;
}

// Energy-delay product with delay N / X taken from Little's Law.
inline double edp(const AffinityMatrix& mu, const AssignmentMatrix& n, const PowerModel& pm,
                  long population) {
  const double x = throughput_state(mu, n);
  if (!(x > 0.0)) throw Error("zero throughput: EDP undefined");
  return expected_energy(mu, n, pm) * static_cast<double>(population) / x;
}

}  // namespace hetsched
