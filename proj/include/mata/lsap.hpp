#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace mata {

inline constexpr double kForbidden = std::numeric_limits<double>::infinity();

/// Dense square cost matrix, row-major. Forbidden cells hold +inf.
class CostMatrix {
 public:
  CostMatrix() = default;
  explicit CostMatrix(int n, double fill = 0.0)
      : n_(n), cells_(static_cast<std::size_t>(n) * n, fill) {}
  CostMatrix(int n, std::vector<double> cells) : n_(n), cells_(std::move(cells)) {
    if (cells_.size() != static_cast<std::size_t>(n) * n)
      throw std::invalid_argument("cost matrix is not square");
  }

  int size() const { return n_; }
  double& operator()(int r, int c) { return cells_[static_cast<std::size_t>(r) * n_ + c]; }
  double operator()(int r, int c) const { return cells_[static_cast<std::size_t>(r) * n_ + c]; }

 private:
  int n_ = 0;
  std::vector<double> cells_;
};

struct Assignment {
  std::vector<int> row_to_col;
  double cost = 0.0;
};

namespace detail {

// Replaces forbidden cells by a finite cost larger than any feasible
// assignment, so the solvers can run on plain arithmetic.
inline std::vector<double> finite_costs(const CostMatrix& c) {
  const int n = c.size();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int r = 0; r < n; ++r) {
    bool any = false;
    for (int j = 0; j < n; ++j) {
      const double x = c(r, j);
      if (std::isnan(x)) throw std::invalid_argument("cost matrix contains NaN");
      if (std::isinf(x)) {
        if (x < 0) throw std::invalid_argument("cost matrix contains -inf");
        continue;
      }
      any = true;
      lo = std::min(lo, x);
      hi = std::max(hi, x);
    }
    if (!any) throw std::invalid_argument("infeasible cost matrix: row " + std::to_string(r) +
                                          " has no permitted cell");
  }
  const double big = hi + n * (hi - lo) + 1.0;
  std::vector<double> out(static_cast<std::size_t>(n) * n);
  for (int r = 0; r < n; ++r)
    for (int j = 0; j < n; ++j) out[static_cast<std::size_t>(r) * n + j] = std::isinf(c(r, j)) ? big : c(r, j);
  return out;
}

inline Assignment finish_assignment(const CostMatrix& c, std::vector<int> row_to_col) {
  Assignment a{std::move(row_to_col), 0.0};
  for (int r = 0; r < c.size(); ++r) {
    const double x = c(r, a.row_to_col[r]);
    if (std::isinf(x)) throw std::invalid_argument("infeasible cost matrix: no finite perfect assignment");
    a.cost += x;
  }
  return a;
}

}  // namespace detail

/// Kuhn-Munkres with row/column potentials, O(n^3).
inline Assignment hungarian(const CostMatrix& c) {
  const int n = c.size();
  if (n == 0) return {};
  const auto cost = detail::finite_costs(c);
  auto at = [&](int r, int j) { return cost[static_cast<std::size_t>(r) * n + j]; };
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based with column 0 as the virtual source
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int r = 1; r <= n; ++r) {
    p[0] = r;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> done(n + 1, 0);
    do {
      done[j0] = 1;
      const int r0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (done[j]) continue;
        const double cur = at(r0 - 1, j - 1) - u[r0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (done[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
  return detail::finish_assignment(c, std::move(row_to_col));
}

/// Jonker-Volgenant: column reduction, reduction transfer, two rounds of
/// augmenting row reduction, then shortest augmenting paths.
inline Assignment jonker_volgenant(const CostMatrix& c) {
  const int n = c.size();
  if (n == 0) return {};
  if (n == 1) return detail::finish_assignment(c, {0});
  const auto cost = detail::finite_costs(c);
  auto at = [&](int r, int j) { return cost[static_cast<std::size_t>(r) * n + j]; };
  const double inf = std::numeric_limits<double>::infinity();

  std::vector<int> x(n, -1), y(n, -1), free_rows(n), matches(n, 0);
  std::vector<double> v(n);

  for (int j = n - 1; j >= 0; --j) {
    double lo = at(0, j);
    int imin = 0;
    for (int r = 1; r < n; ++r) {
      if (at(r, j) < lo) {
        lo = at(r, j);
        imin = r;
      }
    }
    v[j] = lo;
    if (++matches[imin] == 1) {
      x[imin] = j;
      y[j] = imin;
    } else {
      y[j] = -1;
    }
  }

  int num_free = 0;
  for (int r = 0; r < n; ++r) {
    if (matches[r] == 0) {
      free_rows[num_free++] = r;
    } else if (matches[r] == 1) {
      const int j1 = x[r];
      double lo = inf;
      for (int j = 0; j < n; ++j)
        if (j != j1) lo = std::min(lo, at(r, j) - v[j]);
      v[j1] -= lo;
    }
  }

  for (int loop = 0; loop < 2 && num_free > 0; ++loop) {
    int k = 0;
    const int prev_free = num_free;
    num_free = 0;
    int guard = 0;
    while (k < prev_free) {
      const int r = free_rows[k++];
      double umin = at(r, 0) - v[0];
      int j1 = 0;
      int j2 = 0;
      double usubmin = inf;
      for (int j = 1; j < n; ++j) {
        const double h = at(r, j) - v[j];
        if (h < usubmin) {
          if (h >= umin) {
            usubmin = h;
            j2 = j;
          } else {
            usubmin = umin;
            umin = h;
            j2 = j1;
            j1 = j;
          }
        }
      }
      int r0 = y[j1];
      const bool strict = umin < usubmin;
      if (strict) {
        v[j1] -= usubmin - umin;
      } else if (r0 >= 0) {
        j1 = j2;
        r0 = y[j2];
      }
      if (x[r] >= 0 && y[x[r]] == r) y[x[r]] = -1;
      x[r] = j1;
      y[j1] = r;
      if (r0 >= 0) {
        x[r0] = -1;
        if (strict && ++guard < 4 * n * n)
          free_rows[--k] = r0;
        else
          free_rows[num_free++] = r0;
      }
    }
  }

  std::vector<double> d(n);
  std::vector<int> pred(n), collist(n);
  for (int f = 0; f < num_free; ++f) {
    const int free_row = free_rows[f];
    for (int j = 0; j < n; ++j) {
      d[j] = at(free_row, j) - v[j];
      pred[j] = free_row;
      collist[j] = j;
    }
    int low = 0;
    int up = 0;
    int last = 0;
    int end_of_path = -1;
    double lo = 0.0;
    bool found = false;
    do {
      if (up == low) {
        last = low - 1;
        lo = d[collist[up++]];
        for (int k = up; k < n; ++k) {
          const int j = collist[k];
          const double h = d[j];
          if (h <= lo) {
            if (h < lo) {
              up = low;
              lo = h;
            }
            collist[k] = collist[up];
            collist[up++] = j;
          }
        }
        for (int k = low; k < up; ++k) {
          if (y[collist[k]] < 0) {
            end_of_path = collist[k];
            found = true;
            break;
          }
        }
      }
      if (!found) {
        const int j1 = collist[low++];
        const int r = y[j1];
        const double u1 = at(r, j1) - v[j1] - lo;
        for (int k = up; k < n; ++k) {
          const int j = collist[k];
          const double v2 = at(r, j) - v[j] - u1;
          if (v2 < d[j]) {
            pred[j] = r;
            if (v2 == lo) {
              if (y[j] < 0) {
                end_of_path = j;
                found = true;
                break;
              }
              collist[k] = collist[up];
              collist[up++] = j;
            }
            d[j] = v2;
          }
        }
      }
    } while (!found);

    for (int k = 0; k <= last; ++k) {
      const int j1 = collist[k];
      v[j1] += d[j1] - lo;
    }
    int r;
    do {
      r = pred[end_of_path];
      y[end_of_path] = r;
      const int j1 = end_of_path;
      end_of_path = x[r];
      x[r] = j1;
    } while (r != free_row);
  }
  return detail::finish_assignment(c, std::move(x));
}

enum class LsapMethod { kHungarian, kJonkerVolgenant };

inline Assignment solve_assignment(const CostMatrix& c, LsapMethod method) {
  return method == LsapMethod::kHungarian ? hungarian(c) : jonker_volgenant(c);
}

}  // namespace mata
