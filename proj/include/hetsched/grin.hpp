#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <vector>

#include "hetsched/model.hpp"

// Greedy-increase (GrIn) solver for the k x l integer assignment problem
//
//   maximize   sum_j sum_i mu(i,j) N(i,j) / sum_i N(i,j)
//   subject to sum_j N(i,j) = N_i,  N(i,j) >= 0 integer
//
// plus an exhaustive oracle for small instances.

namespace hetsched::grin {

enum class MoveDirection { Add, Remove };

struct MoveDelta {
  std::size_t taskType = 0;
  std::size_t column = 0;
  MoveDirection direction = MoveDirection::Add;
  double delta = 0.0;
};

/// Change in X_j from inserting one type-p task on processor j:
/// (mu(p,j) - X_j) / (n_j + 1). An empty column gains mu(p,j).
inline double x_df_plus(const AffinityMatrix& mu, const AssignmentMatrix& n, std::size_t p,
                        std::size_t j) {
  check_shapes(mu, n);
  const double xj = column_throughput(mu, n, j);
  const auto occupancy = n.column_total(j);
  return (mu(p, j) - xj) / static_cast<double>(occupancy + 1);
}

/// Change in X_j from removing one type-p task from processor j:
/// (X_j - mu(p,j)) / (n_j - 1), or -X_j when the column empties.
inline double x_df_minus(const AffinityMatrix& mu, const AssignmentMatrix& n, std::size_t p,
                         std::size_t j) {
  check_shapes(mu, n);
  if (n(p, j) < 1) throw Error("no such task to remove");
  const double xj = column_throughput(mu, n, j);
  const auto occupancy = n.column_total(j);
  if (occupancy == 1) return -xj;
  return (xj - mu(p, j)) / static_cast<double>(occupancy - 1);
}

struct AppliedMove {
  std::size_t taskType = 0;
  std::size_t from = 0;
  std::size_t to = 0;
  double predictedDelta = 0.0;
  const AssignmentMatrix* after = nullptr;  // valid only during the callback
};

using MoveObserver = std::function<void(const AppliedMove&)>;

struct GrinResult {
  AssignmentMatrix assignment;
  double throughput = 0.0;
  long movesApplied = 0;
  AssignmentMatrix initAssignment;
};

namespace detail {

inline void check_row_totals(const AffinityMatrix& mu, std::span<const long> row_totals) {
  if (row_totals.size() != mu.task_types())
    throw Error(hetsched::detail::concat("expected ", mu.task_types(), " row totals, got ",
                                         row_totals.size()));
  for (long t : row_totals)
    if (t < 0) throw Error("row totals must be nonnegative");
}

// Smallest improvement accepted as a strict increase. Guards against
// floating-point noise producing zero-gain cycles.
inline double min_gain(double x) { return 1e-12 * std::max(1.0, std::abs(x)); }

// Column numerators sum_i mu(i,j) N(i,j) and occupancies, so each move
// delta costs O(1). Only the two columns touched by a move are refreshed,
// and they are recomputed from scratch to keep results identical to
// column_throughput().
class ColumnCache {
 public:
  ColumnCache(const AffinityMatrix& mu, const AssignmentMatrix& n)
      : mu_(mu), n_(n), x_(mu.processor_types()), occ_(mu.processor_types()) {
    for (std::size_t j = 0; j < x_.size(); ++j) refresh(j);
  }

  void refresh(std::size_t j) {
    x_[j] = column_throughput(mu_, n_, j);
    occ_[j] = n_.column_total(j);
  }
  double plus(std::size_t p, std::size_t j) const {
    return (mu_(p, j) - x_[j]) / static_cast<double>(occ_[j] + 1);
  }
  double minus(std::size_t p, std::size_t j) const {
    if (occ_[j] == 1) return -x_[j];
    return (x_[j] - mu_(p, j)) / static_cast<double>(occ_[j] - 1);
  }
  double total() const {
    double x = 0.0;
    for (double v : x_) x += v;
    return x;
  }

 private:
  const AffinityMatrix& mu_;
  const AssignmentMatrix& n_;
  std::vector<double> x_;
  std::vector<long> occ_;
};

// Best single-task move for row p: leave the column whose removal costs the
// least, enter the best other column. Returns nullopt when nothing improves.
inline std::optional<AppliedMove> best_row_move(const AssignmentMatrix& n, const ColumnCache& c,
                                                std::size_t p, double current_x) {
  const std::size_t l = n.processor_types();
  if (l < 2 || n.row_total(p) == 0) return std::nullopt;

  std::optional<std::size_t> from;
  double best_minus = 0.0;
  for (std::size_t a = 0; a < l; ++a) {
    if (n(p, a) < 1) continue;
    const double d = c.minus(p, a);
    if (!from || d > best_minus) {
      from = a;
      best_minus = d;
    }
  }
  std::optional<std::size_t> to;
  double best_plus = 0.0;
  for (std::size_t b = 0; b < l; ++b) {
    if (b == *from) continue;
    const double d = c.plus(p, b);
    if (!to || d > best_plus) {
      to = b;
      best_plus = d;
    }
  }
  const double gain = best_minus + best_plus;
  if (!(gain > min_gain(current_x))) return std::nullopt;
  return AppliedMove{p, *from, *to, gain, nullptr};
}

// Applies improving moves to the given rows, one per row per pass, until a
// full pass changes nothing.
inline long improve_rows(const AffinityMatrix& mu, AssignmentMatrix& n,
                         std::span<const std::size_t> rows, const MoveObserver& observer) {
  long moves = 0;
  ColumnCache cache(mu, n);
  double x = cache.total();
  for (bool moved = true; moved;) {
    moved = false;
    for (std::size_t p : rows) {
      auto mv = best_row_move(n, cache, p, x);
      if (!mv) continue;
      n.move_task(p, mv->from, mv->to);
      cache.refresh(mv->from);
      cache.refresh(mv->to);
      x = cache.total();
      ++moves;
      moved = true;
      if (observer) {
        mv->after = &n;
        observer(*mv);
      }
    }
  }
  return moves;
}

}  // namespace detail

/// Initial assignment built from the column maxima of mu. A row owning one
/// column maximum puts all its tasks there; a row owning several puts one
/// task on each but the slowest of them and the rest on the slowest; a row
/// owning none starts on its own fastest column and is then improved by
/// single-task moves (after all other rows are placed).
inline AssignmentMatrix init_matrix(const AffinityMatrix& mu, std::span<const long> row_totals) {
  detail::check_row_totals(mu, row_totals);
  const std::size_t k = mu.task_types(), l = mu.processor_types();

  std::vector<std::vector<std::size_t>> owned(k);
  for (std::size_t j = 0; j < l; ++j) owned[mu.column_argmax(j)].push_back(j);

  Grid<long> g(k, l, 0);
  std::vector<std::size_t> unowned_rows;
  for (std::size_t i = 0; i < k; ++i) {
    auto& cols = owned[i];
    const long tasks = row_totals[i];
    if (cols.empty()) {
      unowned_rows.push_back(i);
      g(i, mu.row_argmax(i)) = tasks;
    } else if (cols.size() == 1) {
      g(i, cols.front()) = tasks;
    } else {
      std::stable_sort(cols.begin(), cols.end(),
                       [&](std::size_t a, std::size_t b) { return mu(i, a) > mu(i, b); });
      long left = tasks;
      for (std::size_t m = 0; m + 1 < cols.size() && left > 0; ++m) {
        g(i, cols[m]) = 1;
        --left;
      }
      g(i, cols.back()) += left;
    }
  }

  AssignmentMatrix n(std::move(g));
  detail::improve_rows(mu, n, unowned_rows, {});
  return n;
}

/// GrIn: start from init_matrix() and apply strictly improving single-task
/// moves row by row until a local maximum is reached.
inline GrinResult grin_solve(const AffinityMatrix& mu, std::span<const long> row_totals,
                             const MoveObserver& observer = {}) {
  detail::check_row_totals(mu, row_totals);
  if (std::accumulate(row_totals.begin(), row_totals.end(), 0L) < 1)
    throw Error("GrIn needs at least one task");

  GrinResult result;
  result.initAssignment = init_matrix(mu, row_totals);
  result.assignment = result.initAssignment;

  std::vector<std::size_t> rows(mu.task_types());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  result.movesApplied = detail::improve_rows(mu, result.assignment, rows, observer);
  result.throughput = throughput_state(mu, result.assignment);
  return result;
}

inline GrinResult grin_solve(const AffinityMatrix& mu, std::initializer_list<long> row_totals,
                             const MoveObserver& observer = {}) {
  return grin_solve(mu, std::span<const long>(row_totals.begin(), row_totals.size()), observer);
}

inline AssignmentMatrix init_matrix(const AffinityMatrix& mu,
                                    std::initializer_list<long> row_totals) {
  return init_matrix(mu, std::span<const long>(row_totals.begin(), row_totals.size()));
}

// ---------------------------------------------------------------------------
// Exhaustive oracle

inline constexpr double kDefaultStateCap = 1e7;

// prod_i C(N_i + l - 1, l - 1), as a double so huge instances do not overflow.
inline double state_count(std::span<const long> row_totals, std::size_t l) {
  double total = 1.0;
  for (long n : row_totals) {
    double c = 1.0;
    for (std::size_t r = 1; r + 1 <= l; ++r)
      c = c * static_cast<double>(n + static_cast<long>(r)) / static_cast<double>(r);
    total *= std::round(c);
  }
  return total;
}

namespace detail {

// Lexicographically ascending list of compositions of n into l parts.
inline std::vector<std::vector<long>> compositions(long n, std::size_t l) {
  std::vector<std::vector<long>> out;
  std::vector<long> cur(l, 0);
  std::function<void(std::size_t, long)> rec = [&](std::size_t pos, long left) {
    if (pos + 1 == l) {
      cur[pos] = left;
      out.push_back(cur);
      return;
    }
    for (long v = 0; v <= left; ++v) {
      cur[pos] = v;
      rec(pos + 1, left - v);
    }
  };
  rec(0, n);
  return out;
}

}  // namespace detail

struct OptResult {
  AssignmentMatrix assignment;
  double throughput = 0.0;
  double statesVisited = 0.0;
};

/// Brute-force optimum over every feasible assignment. Ties go to the
/// lexicographically smallest matrix (row-major).
inline OptResult exhaustive_opt(const AffinityMatrix& mu, std::span<const long> row_totals,
                                double cap = kDefaultStateCap) {
  detail::check_row_totals(mu, row_totals);
  const std::size_t k = mu.task_types(), l = mu.processor_types();
  const double states = state_count(row_totals, l);
  if (states > cap)
    throw Error(hetsched::detail::concat("exhaustive search over ", states,
                                         " states exceeds the cap of ", cap));

  std::vector<std::vector<std::vector<long>>> choices(k);
  for (std::size_t i = 0; i < k; ++i) choices[i] = detail::compositions(row_totals[i], l);

  // Odometer over rows, row 0 most significant. Column numerators and
  // occupancies are kept per prefix so each step costs O(l).
  std::vector<std::size_t> idx(k, 0);
  std::vector<std::vector<double>> num(k + 1, std::vector<double>(l, 0.0));
  std::vector<std::vector<long>> occ(k + 1, std::vector<long>(l, 0));
  auto refresh_from = [&](std::size_t row) {
    for (std::size_t i = row; i < k; ++i) {
      const auto& c = choices[i][idx[i]];
      for (std::size_t j = 0; j < l; ++j) {
        num[i + 1][j] = num[i][j] + mu(i, j) * static_cast<double>(c[j]);
        occ[i + 1][j] = occ[i][j] + c[j];
      }
    }
  };
  refresh_from(0);

  double best_x = -1.0;
  std::vector<std::size_t> best_idx = idx;
  for (;;) {
    double x = 0.0;
    for (std::size_t j = 0; j < l; ++j)
      if (occ[k][j] > 0) x += num[k][j] / static_cast<double>(occ[k][j]);
    if (x > best_x + 1e-12 * std::abs(best_x)) {
      best_x = x;
      best_idx = idx;
    }
    std::size_t r = k;
    while (r > 0) {
      --r;
      if (++idx[r] < choices[r].size()) break;
      idx[r] = 0;
      if (r == 0) {
        r = k;  // wrapped past the most significant row
        break;
      }
    }
    if (r == k) break;
    refresh_from(r);
  }

  Grid<long> g(k, l, 0);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < l; ++j) g(i, j) = choices[i][best_idx[i]][j];
  OptResult out{AssignmentMatrix(std::move(g)), 0.0, states};
  out.throughput = throughput_state(mu, out.assignment);
  return out;
}

inline OptResult exhaustive_opt(const AffinityMatrix& mu, std::initializer_list<long> row_totals,
                                double cap = kDefaultStateCap) {
  return exhaustive_opt(mu, std::span<const long>(row_totals.begin(), row_totals.size()), cap);
}

}  // namespace hetsched::grin
