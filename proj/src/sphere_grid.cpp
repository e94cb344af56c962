#include "conewalk/sphere_grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <string>

#include "conewalk/error.hpp"

namespace conewalk {

namespace {

constexpr double kSnap = 1e-9;

std::uint64_t lattice_code(const std::vector<std::size_t>& k, std::size_t level) {
  std::uint64_t code = 0;
  for (std::size_t i = 0; i + 1 < k.size(); ++i) code = code * (level + 1) + k[i];
  return code;
}

void add_weight(Stencil& stencil, std::size_t node, double w) {
  if (w <= 0.0) return;
  for (auto& nw : stencil) {
    if (nw.node == node) {
      nw.weight += w;
      return;
    }
  }
  stencil.push_back({node, w});
}

}  // namespace

SphereGrid SphereGrid::angle(std::size_t n_nodes) {
  if (n_nodes < 2) throw Error(ErrorCode::InvalidArgument, "angle grid needs at least 2 nodes");
  SphereGrid g(2, n_nodes);
  g.nodes_.resize(2 * n_nodes);
  const double h = (std::numbers::pi / 2.0) / static_cast<double>(n_nodes - 1);
  for (std::size_t i = 0; i < n_nodes; ++i) {
    const double theta = h * static_cast<double>(i);
    g.nodes_[2 * i] = i + 1 == n_nodes ? 0.0 : std::cos(theta);
    g.nodes_[2 * i + 1] = i == 0 ? 0.0 : (i + 1 == n_nodes ? 1.0 : std::sin(theta));
  }
  return g;
}

SphereGrid SphereGrid::simplex(std::size_t dim, std::size_t level) {
  if (dim < 2) throw Error(ErrorCode::InvalidArgument, "simplex grid needs dimension >= 2");
  if (level < 1) throw Error(ErrorCode::InvalidArgument, "simplex refinement level must be >= 1");
  SphereGrid g(dim, level);
  // Compositions of `level` into `dim` parts, lexicographic in k.
  std::vector<std::size_t> k(dim, 0);
  auto emit = [&] {
    const double n = std::sqrt(std::inner_product(k.begin(), k.end(), k.begin(), 0.0));
    g.code_to_node_.emplace(lattice_code(k, level), g.nodes_.size() / dim);
    for (std::size_t c : k) g.nodes_.push_back(static_cast<double>(c) / n);
  };
  auto recurse = [&](auto& self, std::size_t pos, std::size_t remaining) -> void {
    if (pos + 1 == dim) {
      k[pos] = remaining;
      emit();
      return;
    }
    for (std::size_t v = 0; v <= remaining; ++v) {
      k[pos] = v;
      self(self, pos + 1, remaining - v);
    }
  };
  recurse(recurse, 0, level);
  return g;
}

SphereGrid SphereGrid::make(std::size_t dim, std::size_t resolution) {
  return dim == 2 ? angle(resolution) : simplex(dim, resolution);
}

ConeVector SphereGrid::node_vector(std::size_t i) const {
  const auto n = node(i);
  return ConeVector::raw({n.begin(), n.end()});
}

std::size_t SphereGrid::lattice_index(const std::vector<std::size_t>& k) const {
  return code_to_node_.at(lattice_code(k, resolution_));
}

std::vector<std::size_t> SphereGrid::cell_vertices(std::span<const double> x, Stencil* stencil) const {
  if (x.size() != dim_) throw Error(ErrorCode::InvalidArgument, "point dimension does not match grid");
  std::vector<std::size_t> vertices;
  if (dim_ == 2) {
    const std::size_t n = size();
    const double h = (std::numbers::pi / 2.0) / static_cast<double>(n - 1);
    const double theta = std::atan2(x[1], x[0]);
    const double u = std::clamp(theta / h, 0.0, static_cast<double>(n - 1));
    const double r = std::round(u);
    if (std::abs(u - r) < kSnap) {
      const auto i = static_cast<std::size_t>(r);
      vertices = {i};
      if (stencil) *stencil = {{i, 1.0}};
      return vertices;
    }
    const auto i = std::min(static_cast<std::size_t>(std::floor(u)), n - 2);
    const double t = u - static_cast<double>(i);
    vertices = {i, i + 1};
    if (stencil) *stencil = {{i, 1.0 - t}, {i + 1, t}};
    return vertices;
  }

  const auto level = static_cast<double>(resolution_);
  const double l1 = std::accumulate(x.begin(), x.end(), 0.0);
  if (!(l1 > 0.0)) throw Error(ErrorCode::InvalidArgument, "point is not in the cone");
  // Ordered coordinates level >= u_1 >= ... >= u_{d-1} >= 0, u_r = level * sum_{i >= r} y_i.
  const std::size_t m = dim_ - 1;
  std::vector<double> u(m);
  double tail = 0.0;
  for (std::size_t r = dim_ - 1; r >= 1; --r) {
    tail += x[r] / l1;
    u[r - 1] = std::clamp(level * tail, 0.0, level);
  }
  std::vector<long long> base(m);
  std::vector<double> frac(m);
  for (std::size_t r = 0; r < m; ++r) {
    double b = std::floor(u[r]);
    double f = u[r] - b;
    if (f < kSnap) f = 0.0;
    if (f > 1.0 - kSnap) {
      b += 1.0;
      f = 0.0;
    }
    base[r] = static_cast<long long>(b);
    frac[r] = f;
  }
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });

  auto to_node = [&](const std::vector<long long>& v) -> std::optional<std::size_t> {
    std::vector<std::size_t> k(dim_);
    long long prev = static_cast<long long>(resolution_);
    for (std::size_t r = 0; r < m; ++r) {
      if (v[r] < 0 || v[r] > prev) return std::nullopt;
      k[r] = static_cast<std::size_t>(prev - v[r]);
      prev = v[r];
    }
    k[m] = static_cast<std::size_t>(prev);
    return lattice_index(k);
  };

  std::vector<long long> v = base;
  std::vector<double> weights(m + 1);
  weights[0] = 1.0 - frac[order[0]];
  for (std::size_t r = 1; r < m; ++r) weights[r] = frac[order[r - 1]] - frac[order[r]];
  weights[m] = frac[order[m - 1]];
  if (stencil) stencil->clear();
  for (std::size_t r = 0; r <= m; ++r) {
    if (r > 0) v[order[r - 1]] += 1;
    const auto node = to_node(v);
    if (!node) continue;  // only zero-weight vertices can fall outside the simplex
    vertices.push_back(*node);
    if (stencil) add_weight(*stencil, *node, weights[r]);
  }
  return vertices;
}

Stencil SphereGrid::locate(std::span<const double> x) const {
  Stencil stencil;
  (void)cell_vertices(x, &stencil);
  double total = 0.0;
  for (const auto& nw : stencil) total += nw.weight;
  for (auto& nw : stencil) nw.weight /= total;
  return stencil;
}

std::size_t SphereGrid::nearest(std::span<const double> x) const {
  const std::vector<std::size_t> vertices = cell_vertices(x, nullptr);
  std::size_t best = vertices.front();
  double best_dist = euclidean_distance(node(best), x);
  for (std::size_t v : vertices) {
    const double dist = euclidean_distance(node(v), x);
    if (dist < best_dist || (dist == best_dist && v < best)) {
      best = v;
      best_dist = dist;
    }
  }
  return best;
}

}  // namespace conewalk
