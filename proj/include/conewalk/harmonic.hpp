#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string_view>
#include <vector>

#include "conewalk/ensemble.hpp"
#include "conewalk/rng.hpp"
#include "conewalk/sphere_grid.hpp"
#include "conewalk/walk.hpp"

namespace conewalk {

/// How the s-axis is extended outside [-T, T].
///  Clamp: edge value.
///  Periodic: period 2T, i.e. the grid represents a 2T-periodic function on R.
enum class Boundary { Clamp, Periodic };

std::string_view to_string(Boundary b);
Boundary boundary_from_string(std::string_view name);

/// Uniform s-grid on [-T, T] with 2T/ds + 1 points.
class Window {
 public:
  /// Throws InvalidArgument unless T > 0, ds > 0 and T/ds is an integer (to 1e-9).
  Window(double T, double ds, Boundary policy = Boundary::Clamp);

  [[nodiscard]] double T() const noexcept { return T_; }
  [[nodiscard]] double ds() const noexcept { return ds_; }
  [[nodiscard]] Boundary policy() const noexcept { return policy_; }
  [[nodiscard]] std::size_t points() const noexcept { return points_; }
  [[nodiscard]] double s(std::size_t k) const noexcept;

  /// Linear interpolation stencil in s: value = (1-theta) L[lo] + theta L[hi].
  struct Interp {
    std::size_t lo;
    std::size_t hi;
    double theta;
  };
  /// Position in grid units (0 at -T); applies the boundary policy and snaps
  /// to a knot within 1e-9.
  [[nodiscard]] Interp locate_index(double u) const noexcept;
  [[nodiscard]] Interp locate(double s) const noexcept { return locate_index((s + T_) / ds_); }
  /// Grid index k + offset under the boundary policy.
  [[nodiscard]] std::size_t wrap(long long index) const noexcept;

 private:
  double T_;
  double ds_;
  Boundary policy_;
  std::size_t points_;
};

/// Bounded function on (sphere grid) x (s window), values stored node-major.
class GridFunction {
 public:
  GridFunction(std::shared_ptr<const SphereGrid> grid, Window window, std::vector<double> values);

  static GridFunction constant(std::shared_ptr<const SphereGrid> grid, Window window, double c);
  static GridFunction from_function(std::shared_ptr<const SphereGrid> grid, Window window,
                                    const std::function<double(std::span<const double>, double)>& f);
  /// Independent uniform [0, 1) values at every grid point.
  static GridFunction random(std::shared_ptr<const SphereGrid> grid, Window window, RngStream rng);

  [[nodiscard]] const SphereGrid& grid() const noexcept { return *grid_; }
  [[nodiscard]] const std::shared_ptr<const SphereGrid>& grid_ptr() const noexcept { return grid_; }
  [[nodiscard]] const Window& window() const noexcept { return window_; }
  [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }
  [[nodiscard]] double at(std::size_t node, std::size_t k) const { return values_[node * window_.points() + k]; }
  [[nodiscard]] std::span<const double> row(std::size_t node) const {
    return {values_.data() + node * window_.points(), window_.points()};
  }

  [[nodiscard]] double min() const;
  [[nodiscard]] double max() const;
  [[nodiscard]] double oscillation() const { return max() - min(); }
  [[nodiscard]] double sup_norm() const;

 private:
  std::shared_ptr<const SphereGrid> grid_;
  Window window_;
  std::vector<double> values_;
};

/// Interpolated value: sphere stencil x linear in s, boundary policy outside the window.
double eval(const GridFunction& L, const ConeVector& x, double s);
/// Value on a node row at arbitrary s.
double eval_row(const GridFunction& L, std::size_t node, double s);

/// Precomputed one-step transition of (X, S) from every grid node: for each
/// generator, the stencil of a_j . x_i and the increment log|a_j x_i|.
class TransitionPlan {
 public:
  TransitionPlan(const SphereGrid& grid, const MatrixEnsemble& e);

  struct Move {
    double prob;
    Stencil stencil;
    double increment;
  };
  [[nodiscard]] const std::vector<Move>& moves(std::size_t node) const { return moves_[node]; }

 private:
  std::vector<std::vector<Move>> moves_;
};

/// (PL)(x, s) = sum_j p_j L(a_j . x, s - log|a_j x|) at every grid point.
/// Each output is clamped to the range of the grid values it averages, so
/// sup-norm and oscillation never increase under rounding.
GridFunction apply_P(const GridFunction& L, const MatrixEnsemble& e);
GridFunction apply_P(const GridFunction& L, const TransitionPlan& plan);

struct DefectReport {
  double sup = 0.0;
  std::vector<double> per_node;  // sup over s of |L - PL| on each node row
};

DefectReport harmonic_defect(const GridFunction& L, const MatrixEnsemble& e);

struct IterationResult {
  GridFunction L;
  std::vector<double> osc_history;     // osc(L_k), k = 0..iterations
  std::vector<double> defect_history;  // sup |L_k - L_{k+1}|, k = 0..iterations-1
  std::size_t iterations = 0;
};

/// L <- PL until n_iter iterations or osc(L_k) < tol * osc(L_0).
IterationResult iterate_to_fixed(const GridFunction& L0, const MatrixEnsemble& e, std::size_t n_iter, double tol);

/// Triangular probability kernel h(r) = (1 - |r|/w)/w on [-w, w], discretized
/// as quadrature weights on the window step, normalized to sum 1. Each half
/// [-w, 0], [0, w] uses Gregory's rule when w/ds is an integer >= 4, Simpson
/// when it is 2, trapezoid otherwise.
class SmoothingKernel {
 public:
  static SmoothingKernel triangular(double half_width, double ds);

  [[nodiscard]] double half_width() const noexcept { return half_width_; }
  [[nodiscard]] double ds() const noexcept { return ds_; }
  /// Weight of offset m in [-reach, reach].
  [[nodiscard]] double weight(long long m) const { return weights_[static_cast<std::size_t>(m + reach_)]; }
  [[nodiscard]] long long reach() const noexcept { return reach_; }
  [[nodiscard]] const std::vector<double>& weights() const noexcept { return weights_; }
  /// Continuous Fourier factor (sin(w omega / 2) / (w omega / 2))^2.
  [[nodiscard]] double fourier_factor(double omega) const;

 private:
  double half_width_ = 0.0;
  double ds_ = 0.0;
  long long reach_ = 0;
  std::vector<double> weights_;
};

/// L_h(x, s) = int L(x, s + r) h(r) dr, per node row, with the window's boundary
/// policy. Throws KernelTooWide if the kernel is wider than the window.
GridFunction smooth(const GridFunction& L, const SmoothingKernel& h);

/// For each radius rho: sup over grid nodes y with |y - z| <= rho and grid
/// points t, t' with |t - t'| < delta of |L(z, t) - L(y, t')|.
std::vector<double> equicontinuity_modulus(const GridFunction& L, const ConeVector& z,
                                           const std::vector<double>& radii, double delta);

/// Monte Carlo means of L(X_n, s - S_n), n = 0..horizon, over n_paths paths
/// (path p uses rng.child(p)). SE is the i.i.d. standard error across paths.
std::vector<Estimate> martingale_check(const GridFunction& L, const MatrixEnsemble& e, const ConeVector& x, double s,
                                       std::size_t n_paths, std::size_t horizon, const RngStream& rng);

/// sup |L(x, s) - L(x, s + zeta)| over nodes and grid points s whose shift stays
/// in the window (all points for a periodic window). Throws ShiftTooLarge
/// unless |zeta| < 2T.
double shift_invariance_check(const GridFunction& L, double zeta);

/// Bound on the s-interpolation error of L: max second difference / 8.
double s_interpolation_bound(const GridFunction& L);

/// CSV snapshot: node, x_0..x_{d-1}, s, value.
void write_grid_function_csv(std::ostream& os, const GridFunction& L);
/// Reads a snapshot written for the same grid and window. Throws MalformedInput.
GridFunction read_grid_function_csv(std::istream& is, std::shared_ptr<const SphereGrid> grid, const Window& window);
/// CSV: iteration, osc, defect (defect empty on the last row).
void write_history_csv(std::ostream& os, const IterationResult& result);

}  // namespace conewalk
