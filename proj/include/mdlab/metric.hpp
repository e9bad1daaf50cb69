#ifndef MDLAB_METRIC_HPP
#define MDLAB_METRIC_HPP

#include <cmath>
#include <cstdio>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace mdlab {

inline constexpr double kDistTol = 1e-9;  // tolerance for distance/time comparisons

/// Finite metric space: either an explicit distance matrix, or the implicit
/// line of n evenly spaced points 1/n, ..., 1 (stored as just n, so large
/// line instances cost no quadratic memory).
class FiniteMetric {
 public:
  FiniteMetric() : n_(0) {}

  explicit FiniteMetric(const std::vector<std::vector<double>>& rows) {
    n_ = static_cast<int>(rows.size());
    d_.resize(static_cast<std::size_t>(n_) * n_);
    for (int i = 0; i < n_; ++i) {
      if (static_cast<int>(rows[i].size()) != n_)
        throw std::invalid_argument("distance matrix is not square");
      for (int j = 0; j < n_; ++j) d_[idx(i, j)] = rows[i][j];
    }
  }

  static FiniteMetric from_flat(int n, std::vector<double> flat) {
    if (static_cast<std::size_t>(n) * n != flat.size())
      throw std::invalid_argument("flat distance array has wrong size");
    FiniteMetric m;
    m.n_ = n;
    m.d_ = std::move(flat);
    return m;
  }

  static FiniteMetric line(int n) {
    if (n < 2 || n % 2 != 0)
      throw std::invalid_argument("line metric requires even n >= 2");
    FiniteMetric m;
    m.n_ = n;
    m.line_ = true;
    return m;
  }

  int size() const { return n_; }
  bool is_line() const { return line_; }

  double operator()(int i, int j) const {
    if (line_) return std::abs(i - j) / static_cast<double>(n_);
    return d_[idx(i, j)];
  }

  double& at(int i, int j) {
    if (line_) throw std::logic_error("line metric entries are implicit");
    return d_[idx(i, j)];
  }

  bool operator==(const FiniteMetric& o) const {
    return n_ == o.n_ && line_ == o.line_ && d_ == o.d_;
  }

 private:
  std::size_t idx(int i, int j) const {
    return static_cast<std::size_t>(i) * n_ + j;
  }
  int n_;
  bool line_ = false;
  std::vector<double> d_;
};

enum class MetricViolationKind { Asymmetry, NegativeEntry, TriangleViolation, DuplicatePoints };

struct MetricViolation {
  MetricViolationKind kind;
  int i = -1, j = -1, k = -1;

  std::string message() const {
    char buf[128];
    switch (kind) {
      case MetricViolationKind::Asymmetry:
        std::snprintf(buf, sizeof buf, "asymmetry at (%d,%d)", i, j);
        break;
      case MetricViolationKind::NegativeEntry:
        std::snprintf(buf, sizeof buf, "negative entry at (%d,%d)", i, j);
        break;
      case MetricViolationKind::TriangleViolation:
        std::snprintf(buf, sizeof buf, "triangle violation at (%d,%d,%d)", i, j, k);
        break;
      case MetricViolationKind::DuplicatePoints:
        std::snprintf(buf, sizeof buf, "duplicate points (%d,%d) at distance 0", i, j);
        break;
    }
    return buf;
  }
};

/// Checks symmetry, zero diagonal, nonnegativity, the triangle inequality
/// (tolerance kDistTol) and, unless allow_duplicates, strictly positive
/// off-diagonal entries. Returns the first violation in scan order, if any.
inline std::optional<MetricViolation> validate_metric(const FiniteMetric& m,
                                                      bool allow_duplicates = false) {
  if (m.is_line()) return std::nullopt;  // exact by construction
  const int n = m.size();
  for (int i = 0; i < n; ++i) {
    if (std::abs(m(i, i)) > kDistTol)
      return MetricViolation{MetricViolationKind::NegativeEntry, i, i, -1};
    for (int j = 0; j < n; ++j) {
      if (m(i, j) < -kDistTol)
        return MetricViolation{MetricViolationKind::NegativeEntry, i, j, -1};
      if (std::abs(m(i, j) - m(j, i)) > kDistTol)
        return MetricViolation{MetricViolationKind::Asymmetry, i, j, -1};
      if (!allow_duplicates && i != j && m(i, j) <= kDistTol)
        return MetricViolation{MetricViolationKind::DuplicatePoints, i, j, -1};
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        if (m(i, j) + m(j, k) < m(i, k) - kDistTol)
          return MetricViolation{MetricViolationKind::TriangleViolation, i, j, k};
  return std::nullopt;
}

inline void require_valid_metric(const FiniteMetric& m, bool allow_duplicates = false) {
  if (auto v = validate_metric(m, allow_duplicates))
    throw std::invalid_argument("invalid metric: " + v->message());
}

/// n evenly spaced points 1/n, 2/n, ..., 1 on the unit interval; point k sits
/// at coordinate (k+1)/n.
inline FiniteMetric line_metric(int n) { return FiniteMetric::line(n); }

inline double line_coordinate(int n, int point) { return (point + 1) / static_cast<double>(n); }

/// max off-diagonal distance / min off-diagonal distance
inline double aspect_ratio(const FiniteMetric& m) {
  const int n = m.size();
  if (n < 2) throw std::invalid_argument("aspect_ratio requires n >= 2");
  if (m.is_line()) return n - 1.0;  // (n-1)/n over 1/n
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      lo = std::min(lo, m(i, j));
      hi = std::max(hi, m(i, j));
    }
  return hi / lo;
}

struct CollapseResult {
  FiniteMetric metric;
  std::vector<int> alias;  // original point -> collapsed point
};

/// Collapses points at distance <= kDistTol of each other; the alias table
/// maps every original point to its representative in the collapsed metric.
inline CollapseResult collapse_duplicates(const FiniteMetric& m) {
  const int n = m.size();
  if (m.is_line()) {  // all points distinct
    std::vector<int> alias(n);
    for (int i = 0; i < n; ++i) alias[i] = i;
    return CollapseResult{m, std::move(alias)};
  }
  std::vector<int> alias(n, -1);
  std::vector<int> reps;
  for (int i = 0; i < n; ++i) {
    for (int r = 0; r < static_cast<int>(reps.size()); ++r)
      if (m(i, reps[r]) <= kDistTol) {
        alias[i] = r;
        break;
      }
    if (alias[i] < 0) {
      alias[i] = static_cast<int>(reps.size());
      reps.push_back(i);
    }
  }
  const int k = static_cast<int>(reps.size());
  std::vector<double> flat(static_cast<std::size_t>(k) * k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b)
      flat[static_cast<std::size_t>(a) * k + b] = a == b ? 0.0 : m(reps[a], reps[b]);
  return CollapseResult{FiniteMetric::from_flat(k, std::move(flat)), std::move(alias)};
}

}  // namespace mdlab

#endif
