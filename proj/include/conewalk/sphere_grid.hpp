#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "conewalk/ensemble.hpp"

namespace conewalk {

struct NodeWeight {
  std::size_t node;
  double weight;
};

/// Interpolation stencil: at most d nodes, nonnegative weights summing to 1.
using Stencil = std::vector<NodeWeight>;

/// Discretization of the nonnegative part of the unit sphere.
///
/// d = 2: nodes uniform in angle on [0, pi/2], linear interpolation in angle.
/// d >= 3: lattice points of level N on the l1-simplex (Kuhn triangulation),
/// projected to the sphere; a point is interpolated with the barycentric
/// weights of its l1-normalization.
class SphereGrid {
 public:
  static SphereGrid angle(std::size_t n_nodes);
  static SphereGrid simplex(std::size_t dim, std::size_t level);
  /// angle(resolution) for d = 2, simplex(d, resolution) otherwise.
  static SphereGrid make(std::size_t dim, std::size_t resolution);

  [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
  [[nodiscard]] std::size_t size() const noexcept { return nodes_.size() / dim_; }
  [[nodiscard]] std::size_t resolution() const noexcept { return resolution_; }
  [[nodiscard]] std::span<const double> node(std::size_t i) const {
    return {nodes_.data() + i * dim_, dim_};
  }
  [[nodiscard]] ConeVector node_vector(std::size_t i) const;

  /// Weights are snapped to a knot when within 1e-9 of it (in cell units).
  [[nodiscard]] Stencil locate(std::span<const double> x) const;
  /// Closest node (Euclidean) among the vertices of the containing cell;
  /// ties go to the lowest index.
  [[nodiscard]] std::size_t nearest(std::span<const double> x) const;

 private:
  SphereGrid(std::size_t dim, std::size_t resolution) : dim_(dim), resolution_(resolution) {}

  [[nodiscard]] std::vector<std::size_t> cell_vertices(std::span<const double> x, Stencil* stencil) const;
  [[nodiscard]] std::size_t lattice_index(const std::vector<std::size_t>& k) const;

  std::size_t dim_;
  std::size_t resolution_;
  std::vector<double> nodes_;
  // simplex grids: lattice code -> node index
  std::unordered_map<std::uint64_t, std::size_t> code_to_node_;
};

}  // namespace conewalk
