#include "ctxgeo/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>

namespace ctxgeo::oracle {

std::vector<double> jacobi_eigenvalues(Eigen::MatrixXd a, double tolerance, int max_sweeps) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("jacobi_eigenvalues: matrix must be square");
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        total += a(i, j) * a(i, j);
        if (i != j) off += a(i, j) * a(i, j);
      }
    }
    if (off <= tolerance * tolerance * total) break;
    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        // Rotation angle zeroing a(p, q) (Golub & Van Loan, sym.schur2).
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Eigen::Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  std::vector<double> values(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) values[static_cast<std::size_t>(i)] = a(i, i);
  std::sort(values.begin(), values.end(), std::greater<>());
  return values;
}

double oracle_mev(const Eigen::MatrixXd& m) {
  const Eigen::Index d = m.rows();
  const Eigen::Index n = m.cols();
  const Eigen::Index side = std::min(d, n);
  Eigen::MatrixXd gram(side, side);
  // Explicit loops rather than a matrix product.
  for (Eigen::Index i = 0; i < side; ++i) {
    for (Eigen::Index j = 0; j < side; ++j) {
      double acc = 0.0;
      if (n <= d) {
        for (Eigen::Index k = 0; k < d; ++k) acc += m(k, i) * m(k, j);
      } else {
        for (Eigen::Index k = 0; k < n; ++k) acc += m(i, k) * m(j, k);
      }
      gram(i, j) = acc;
    }
  }
  const auto eig = jacobi_eigenvalues(gram);
  double sum = 0.0;
  for (double v : eig) sum += std::max(v, 0.0);
  if (sum == 0.0) throw std::invalid_argument("oracle_mev: all-zero matrix");
  return std::max(eig.front(), 0.0) / sum;
}

namespace {

std::vector<double> counting_ranks(std::span<const double> xs) {
  std::vector<double> ranks(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    std::size_t less = 0;
    std::size_t equal = 0;
    for (double x : xs) {
      if (x < xs[i]) ++less;
      if (x == xs[i]) ++equal;
    }
    ranks[i] = 1.0 + static_cast<double>(less) + 0.5 * static_cast<double>(equal - 1);
  }
  return ranks;
}

}  // namespace

double oracle_spearman(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw std::invalid_argument("oracle_spearman: need equal lengths >= 2");
  }
  const auto rx = counting_ranks(xs);
  const auto ry = counting_ranks(ys);
  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sx += rx[i];
    sy += ry[i];
    sxx += rx[i] * rx[i];
    syy += ry[i] * ry[i];
    sxy += rx[i] * ry[i];
  }
  const double cov = sxy - sx * sy / n;
  const double vx = sxx - sx * sx / n;
  const double vy = syy - sy * sy / n;
  if (vx <= 0.0 || vy <= 0.0) throw std::invalid_argument("oracle_spearman: constant input");
  return cov / std::sqrt(vx * vy);
}

double oracle_pairwise_mean_cos(const Eigen::MatrixXd& m) {
  const Eigen::Index n = m.cols();
  if (n < 2) throw std::invalid_argument("oracle_pairwise_mean_cos: need >= 2 columns");
  double total = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      if (j == k) continue;
      double dot = 0.0, nj = 0.0, nk = 0.0;
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        dot += m(r, j) * m(r, k);
        nj += m(r, j) * m(r, j);
        nk += m(r, k) * m(r, k);
      }
      total += std::clamp(dot / std::sqrt(nj * nk), -1.0, 1.0);
    }
  }
  return total / (static_cast<double>(n) * static_cast<double>(n - 1));
}

namespace {

double projected_energy(const Eigen::MatrixXd& m, const Eigen::VectorXd& u) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    double dot = 0.0;
    for (Eigen::Index r = 0; r < m.rows(); ++r) dot += u(r) * m(r, j);
    total += dot * dot;
  }
  return total;
}

Eigen::VectorXd polar(double theta) { return Eigen::Vector2d(std::cos(theta), std::sin(theta)); }

Eigen::VectorXd spherical(double theta, double phi) {
  return Eigen::Vector3d(std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi),
                         std::cos(theta));
}

}  // namespace

Eigen::VectorXd grid_principal_direction(const Eigen::MatrixXd& m) {
  constexpr double pi = 3.14159265358979323846;
  if (m.rows() == 2) {
    double best_theta = 0.0;
    double best = -1.0;
    double step = pi / 3600.0;
    for (int i = 0; i < 3600; ++i) {
      const double e = projected_energy(m, polar(i * step));
      if (e > best) best = e, best_theta = i * step;
    }
    for (int round = 0; round < 12; ++round) {
      const double center = best_theta;
      for (int i = -20; i <= 20; ++i) {
        const double t = center + i * step / 10.0;
        const double e = projected_energy(m, polar(t));
        if (e > best) best = e, best_theta = t;
      }
      step /= 10.0;
    }
    return polar(best_theta);
  }
  if (m.rows() == 3) {
    double best_theta = 0.0, best_phi = 0.0;
    double best = -1.0;
    double step = pi / 180.0;
    for (int i = 0; i <= 180; ++i) {
      for (int j = 0; j < 360; ++j) {
        const double e = projected_energy(m, spherical(i * step, j * step));
        if (e > best) best = e, best_theta = i * step, best_phi = j * step;
      }
    }
    for (int round = 0; round < 12; ++round) {
      const double ct = best_theta, cp = best_phi;
      for (int i = -10; i <= 10; ++i) {
        for (int j = -10; j <= 10; ++j) {
          const double t = ct + i * step / 5.0;
          const double p = cp + j * step / 5.0;
          const double e = projected_energy(m, spherical(t, p));
          if (e > best) best = e, best_theta = t, best_phi = p;
        }
      }
      step /= 5.0;
    }
    return spherical(best_theta, best_phi);
  }
  throw std::invalid_argument("grid_principal_direction: d must be 2 or 3");
}

namespace {

struct PartitionSearch {
  const Eigen::MatrixXd& points;
  const std::vector<int>& labels;
  int k;
  std::vector<int> groups;
  PartitionOptimum best{std::numeric_limits<double>::infinity(), 0.0};

  void evaluate() {
    double inertia = 0.0;
    std::size_t majority_total = 0;
    for (int g = 0; g < k; ++g) {
      Eigen::VectorXd centroid = Eigen::VectorXd::Zero(points.rows());
      std::vector<std::size_t> members;
      for (std::size_t i = 0; i < groups.size(); ++i) {
        if (groups[i] == g) {
          centroid += points.col(static_cast<Eigen::Index>(i));
          members.push_back(i);
        }
      }
      centroid /= static_cast<double>(members.size());
      std::map<int, std::size_t> counts;
      for (std::size_t i : members) {
        inertia += (points.col(static_cast<Eigen::Index>(i)) - centroid).squaredNorm();
        ++counts[labels[i]];
      }
      std::size_t majority = 0;
      for (const auto& [label, c] : counts) majority = std::max(majority, c);
      majority_total += majority;
    }
    if (inertia < best.inertia) {
      best.inertia = inertia;
      best.purity = static_cast<double>(majority_total) / static_cast<double>(groups.size());
    }
  }

  // Restricted growth strings: item i joins an existing group or opens group `used`.
  void recurse(std::size_t i, int used) {
    const int remaining = static_cast<int>(groups.size() - i);
    if (used + remaining < k) return;
    if (i == groups.size()) {
      if (used == k) evaluate();
      return;
    }
    for (int g = 0; g < used; ++g) {
      groups[i] = g;
      recurse(i + 1, used);
    }
    if (used < k) {
      groups[i] = used;
      recurse(i + 1, used + 1);
    }
  }
};

}  // namespace

PartitionOptimum best_partition(const Eigen::MatrixXd& points, const std::vector<int>& labels, int k) {
  if (k < 1 || points.cols() < k || labels.size() != static_cast<std::size_t>(points.cols())) {
    throw std::invalid_argument("best_partition: need 1 <= k <= N and one label per point");
  }
  PartitionSearch search{points, labels, k, std::vector<int>(static_cast<std::size_t>(points.cols()), 0)};
  search.recurse(0, 0);
  return search.best;
}

}  // namespace ctxgeo::oracle
