#include "conewalk/harmonic.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "conewalk/error.hpp"
#include "conewalk/format.hpp"
#include "conewalk/parallel.hpp"

namespace conewalk {

namespace {

constexpr double kKnotSnap = 1e-9;

double interp(std::span<const double> row, const Window::Interp& it) {
  if (it.theta == 0.0) return row[it.lo];
  return (1.0 - it.theta) * row[it.lo] + it.theta * row[it.hi];
}

}  // namespace

std::string_view to_string(Boundary b) { return b == Boundary::Clamp ? "clamp" : "periodic"; }

Boundary boundary_from_string(std::string_view name) {
  if (name == "clamp") return Boundary::Clamp;
  if (name == "periodic") return Boundary::Periodic;
  throw Error(ErrorCode::InvalidArgument, "unknown boundary policy '" + std::string(name) + "'");
}

Window::Window(double T, double ds, Boundary policy) : T_(T), ds_(ds), policy_(policy), points_(0) {
  if (!(T > 0.0) || !(ds > 0.0) || !std::isfinite(T) || !std::isfinite(ds)) {
    throw Error(ErrorCode::InvalidArgument, "window needs T > 0 and ds > 0");
  }
  const double ratio = T / ds;
  const double r = std::round(ratio);
  if (r < 1.0 || std::abs(ratio - r) > 1e-9 * std::max(1.0, ratio)) {
    throw Error(ErrorCode::InvalidArgument, "T must be an integer multiple of ds");
  }
  points_ = 2 * static_cast<std::size_t>(r) + 1;
}

double Window::s(std::size_t k) const noexcept {
  const auto half = static_cast<long long>((points_ - 1) / 2);
  return static_cast<double>(static_cast<long long>(k) - half) * ds_;
}

std::size_t Window::wrap(long long index) const noexcept {
  const auto last = static_cast<long long>(points_ - 1);
  if (policy_ == Boundary::Clamp) return static_cast<std::size_t>(std::clamp(index, 0LL, last));
  // Period 2T: index `last` is the same point as index 0.
  const long long r = ((index % last) + last) % last;
  return static_cast<std::size_t>(r);
}

Window::Interp Window::locate_index(double u) const noexcept {
  const auto last = static_cast<double>(points_ - 1);
  if (policy_ == Boundary::Clamp) {
    if (u <= 0.0) return {0, 0, 0.0};
    if (u >= last) return {points_ - 1, points_ - 1, 0.0};
  }
  double base = std::floor(u);
  double theta = u - base;
  if (theta < kKnotSnap) {
    theta = 0.0;
  } else if (theta > 1.0 - kKnotSnap) {
    base += 1.0;
    theta = 0.0;
  }
  const auto b = static_cast<long long>(base);
  return {wrap(b), wrap(b + 1), theta};
}

GridFunction::GridFunction(std::shared_ptr<const SphereGrid> grid, Window window, std::vector<double> values)
    : grid_(std::move(grid)), window_(window), values_(std::move(values)) {
  if (!grid_) throw Error(ErrorCode::InvalidArgument, "grid function needs a grid");
  if (values_.size() != grid_->size() * window_.points()) {
    throw Error(ErrorCode::InvalidArgument, "grid function value count does not match grid x window");
  }
  if (std::any_of(values_.begin(), values_.end(), [](double v) { return !std::isfinite(v); })) {
    throw Error(ErrorCode::InvalidArgument, "grid function values must be finite");
  }
}

GridFunction GridFunction::constant(std::shared_ptr<const SphereGrid> grid, Window window, double c) {
  const std::size_t n = grid->size() * window.points();
  return GridFunction(std::move(grid), window, std::vector<double>(n, c));
}

GridFunction GridFunction::from_function(std::shared_ptr<const SphereGrid> grid, Window window,
                                         const std::function<double(std::span<const double>, double)>& f) {
  std::vector<double> values;
  values.reserve(grid->size() * window.points());
  for (std::size_t i = 0; i < grid->size(); ++i)
    for (std::size_t k = 0; k < window.points(); ++k) values.push_back(f(grid->node(i), window.s(k)));
  return GridFunction(std::move(grid), window, std::move(values));
}

GridFunction GridFunction::random(std::shared_ptr<const SphereGrid> grid, Window window, RngStream rng) {
  std::vector<double> values(grid->size() * window.points());
  for (double& v : values) v = rng.uniform();
  return GridFunction(std::move(grid), window, std::move(values));
}

double GridFunction::min() const { return *std::min_element(values_.begin(), values_.end()); }
double GridFunction::max() const { return *std::max_element(values_.begin(), values_.end()); }

double GridFunction::sup_norm() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double eval_row(const GridFunction& L, std::size_t node, double s) {
  return interp(L.row(node), L.window().locate(s));
}

double eval(const GridFunction& L, const ConeVector& x, double s) {
  const Window::Interp it = L.window().locate(s);
  double acc = 0.0;
  for (const auto& nw : L.grid().locate(x.coords())) acc += nw.weight * interp(L.row(nw.node), it);
  return acc;
}

TransitionPlan::TransitionPlan(const SphereGrid& grid, const MatrixEnsemble& e) : moves_(grid.size()) {
  if (grid.dim() != e.dim()) throw Error(ErrorCode::InvalidArgument, "grid dimension does not match ensemble");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const ConeVector x = grid.node_vector(i);
    for (std::size_t j = 0; j < e.size(); ++j) {
      const ProjectiveStep st = act_projective(e.matrix(j), x);
      moves_[i].push_back({e.prob(j), grid.locate(st.x.coords()), st.increment});
    }
  }
}

GridFunction apply_P(const GridFunction& L, const TransitionPlan& plan) {
  const Window& win = L.window();
  const std::size_t np = win.points();
  const auto last = static_cast<long long>(np - 1);
  const std::size_t nodes = L.grid().size();
  std::vector<double> out(L.values().size());
  parallel_for(nodes, [&](std::size_t begin, std::size_t end) {
    std::vector<double> acc(np), lo(np), hi(np);
    std::vector<std::size_t> ia(np), ib(np), runs;
    for (std::size_t i = begin; i < end; ++i) {
      std::fill(acc.begin(), acc.end(), 0.0);
      std::fill(lo.begin(), lo.end(), std::numeric_limits<double>::infinity());
      std::fill(hi.begin(), hi.end(), -std::numeric_limits<double>::infinity());
      for (const auto& mv : plan.moves(i)) {
        // s_k - increment sits at grid position k + base + theta for every k.
        const double u0 = -mv.increment / win.ds();
        double base = std::floor(u0);
        double theta = u0 - base;
        if (theta < kKnotSnap) {
          theta = 0.0;
        } else if (theta > 1.0 - kKnotSnap) {
          base += 1.0;
          theta = 0.0;
        }
        const auto shift = static_cast<long long>(base);
        if (win.policy() == Boundary::Clamp) {
          for (std::size_t k = 0; k < np; ++k) {
            const long long idx = static_cast<long long>(k) + shift;
            if (idx < 0 || idx >= last) {
              ia[k] = ib[k] = idx < 0 ? 0 : static_cast<std::size_t>(last);  // edge value
            } else {
              ia[k] = static_cast<std::size_t>(idx);
              ib[k] = ia[k] + 1;
            }
          }
        } else {
          const auto period = static_cast<std::size_t>(last);
          ia[0] = win.wrap(shift);
          ib[0] = win.wrap(shift + 1);
          for (std::size_t k = 1; k < np; ++k) {
            ia[k] = ia[k - 1] + 1 == period ? 0 : ia[k - 1] + 1;
            ib[k] = ib[k - 1] + 1 == period ? 0 : ib[k - 1] + 1;
          }
        }
        // Maximal runs on which both source indices advance by one.
        runs.clear();
        for (std::size_t k = 0; k < np; ++k) {
          if (k == 0 || ia[k] != ia[k - 1] + 1 || ib[k] != ib[k - 1] + 1) runs.push_back(k);
        }
        runs.push_back(np);
        for (const auto& nw : mv.stencil) {
          const double c = mv.prob * nw.weight;
          const double* row = L.row(nw.node).data();
          for (std::size_t r = 0; r + 1 < runs.size(); ++r) {
            const std::size_t k0 = runs[r];
            const std::size_t len = runs[r + 1] - k0;
            const double* pa = row + ia[k0];
            const double* pb = row + ib[k0];
            double* pacc = acc.data() + k0;
            double* plo = lo.data() + k0;
            double* phi = hi.data() + k0;
            for (std::size_t t = 0; t < len; ++t) {
              const double a = pa[t];
              const double b = pb[t];
              pacc[t] += c * ((1.0 - theta) * a + theta * b);
              plo[t] = std::min(plo[t], std::min(a, b));
              phi[t] = std::max(phi[t], std::max(a, b));
            }
          }
        }
      }
      // Keep rounding inside the convex hull of the averaged values.
      for (std::size_t k = 0; k < np; ++k) out[i * np + k] = std::clamp(acc[k], lo[k], hi[k]);
    }
  });
  return GridFunction(L.grid_ptr(), win, std::move(out));
}

GridFunction apply_P(const GridFunction& L, const MatrixEnsemble& e) {
  return apply_P(L, TransitionPlan(L.grid(), e));
}

DefectReport harmonic_defect(const GridFunction& L, const MatrixEnsemble& e) {
  const GridFunction PL = apply_P(L, e);
  const std::size_t np = L.window().points();
  DefectReport report;
  report.per_node.assign(L.grid().size(), 0.0);
  for (std::size_t i = 0; i < L.grid().size(); ++i) {
    for (std::size_t k = 0; k < np; ++k) {
      report.per_node[i] = std::max(report.per_node[i], std::abs(L.at(i, k) - PL.at(i, k)));
    }
    report.sup = std::max(report.sup, report.per_node[i]);
  }
  return report;
}

IterationResult iterate_to_fixed(const GridFunction& L0, const MatrixEnsemble& e, std::size_t n_iter, double tol) {
  const TransitionPlan plan(L0.grid(), e);
  IterationResult result{L0, {L0.oscillation()}, {}, 0};
  const double osc0 = result.osc_history.front();
  for (std::size_t k = 0; k < n_iter; ++k) {
    if (osc0 > 0.0 && result.osc_history.back() < tol * osc0) break;
    GridFunction next = apply_P(result.L, plan);
    double defect = 0.0;
    for (std::size_t idx = 0; idx < next.values().size(); ++idx) {
      defect = std::max(defect, std::abs(next.values()[idx] - result.L.values()[idx]));
    }
    result.defect_history.push_back(defect);
    result.osc_history.push_back(next.oscillation());
    result.L = std::move(next);
    ++result.iterations;
  }
  return result;
}

SmoothingKernel SmoothingKernel::triangular(double half_width, double ds) {
  if (!(half_width > 0.0) || !(ds > 0.0)) throw Error(ErrorCode::InvalidArgument, "kernel needs half_width, ds > 0");
  SmoothingKernel h;
  h.half_width_ = half_width;
  h.ds_ = ds;
  const double ratio = half_width / ds;
  const double rounded = std::round(ratio);
  const bool aligned = std::abs(ratio - rounded) < 1e-9 * std::max(1.0, ratio);
  h.reach_ = static_cast<long long>(aligned ? rounded : std::floor(ratio));
  if (h.reach_ < 1) throw Error(ErrorCode::InvalidArgument, "kernel half-width is below the grid step");
  const long long n = h.reach_;

  // Per-half quadrature coefficients in units of ds, index 0 at r = 0.
  std::vector<double> half(static_cast<std::size_t>(n + 1), 1.0);
  if (aligned && n >= 4) {
    // Gregory end corrections through fourth differences: exact for quintics.
    half.front() = half.back() = 0.5;
    const double gregory[] = {1.0 / 12, 1.0 / 24, 19.0 / 720, 3.0 / 160};
    for (long long k = 1; k <= 4; ++k) {
      const double ck = gregory[k - 1];
      const double end_sign = (k % 2 == 1) ? -1.0 : 1.0;
      double binom = 1.0;
      for (long long j = 0; j <= k; ++j) {
        const double pm_j = (j % 2 == 0) ? 1.0 : -1.0;
        const double pm_kj = ((k - j) % 2 == 0) ? 1.0 : -1.0;
        half[static_cast<std::size_t>(n - j)] -= ck * pm_j * binom;
        half[static_cast<std::size_t>(j)] -= ck * end_sign * pm_kj * binom;
        binom = binom * static_cast<double>(k - j) / static_cast<double>(j + 1);
      }
    }
  } else if (aligned && n % 2 == 0) {
    for (long long a = 0; a <= n; ++a) {
      half[static_cast<std::size_t>(a)] = (a == 0 || a == n) ? 1.0 / 3.0 : ((a % 2 == 1) ? 4.0 / 3.0 : 2.0 / 3.0);
    }
  } else {
    half.back() = 0.5;
  }

  auto density = [&](double r) { return std::max(0.0, 1.0 - std::abs(r) / half_width) / half_width; };
  h.weights_.assign(static_cast<std::size_t>(2 * n + 1), 0.0);
  for (long long m = -n; m <= n; ++m) {
    // Node 0 closes both halves.
    const double coef = m == 0 ? 2.0 * half[0] : half[static_cast<std::size_t>(std::abs(m))];
    h.weights_[static_cast<std::size_t>(m + n)] = coef * ds * density(static_cast<double>(m) * ds);
  }
  double total = 0.0;
  for (double w : h.weights_) total += w;
  for (double& w : h.weights_) w /= total;
  return h;
}

double SmoothingKernel::fourier_factor(double omega) const {
  const double x = omega * half_width_ / 2.0;
  if (x == 0.0) return 1.0;
  const double sinc = std::sin(x) / x;
  return sinc * sinc;
}

GridFunction smooth(const GridFunction& L, const SmoothingKernel& h) {
  const Window& win = L.window();
  if (std::abs(h.ds() - win.ds()) > 1e-12 * win.ds()) {
    throw Error(ErrorCode::InvalidArgument, "kernel step does not match window step");
  }
  if (static_cast<double>(h.reach()) * win.ds() > win.T() * (1.0 + 1e-12)) {
    throw Error(ErrorCode::KernelTooWide, "kernel support exceeds the window");
  }
  const std::size_t np = win.points();
  std::vector<double> out(L.values().size());
  parallel_for(L.grid().size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto row = L.row(i);
      for (std::size_t k = 0; k < np; ++k) {
        double acc = 0.0;
        for (long long m = -h.reach(); m <= h.reach(); ++m) {
          acc += h.weight(m) * row[win.wrap(static_cast<long long>(k) + m)];
        }
        out[i * np + k] = acc;
      }
    }
  });
  return GridFunction(L.grid_ptr(), win, std::move(out));
}

std::vector<double> equicontinuity_modulus(const GridFunction& L, const ConeVector& z,
                                           const std::vector<double>& radii, double delta) {
  const Window& win = L.window();
  const std::size_t np = win.points();
  std::vector<double> at_z(np);
  const Stencil zs = L.grid().locate(z.coords());
  for (std::size_t k = 0; k < np; ++k) {
    double acc = 0.0;
    for (const auto& nw : zs) acc += nw.weight * L.at(nw.node, k);
    at_z[k] = acc;
  }
  // Offsets o with |o| ds < delta.
  const long long reach = std::max(0LL, static_cast<long long>(std::ceil(delta / win.ds())) - 1);

  std::vector<double> moduli;
  for (double rho : radii) {
    double sup = 0.0;
    for (std::size_t y = 0; y < L.grid().size(); ++y) {
      if (euclidean_distance(L.grid().node(y), z.coords()) > rho) continue;
      const auto row = L.row(y);
      for (std::size_t k = 0; k < np; ++k) {
        for (long long o = -reach; o <= reach; ++o) {
          const long long k2 = static_cast<long long>(k) + o;
          if (k2 < 0 || k2 >= static_cast<long long>(np)) continue;
          sup = std::max(sup, std::abs(at_z[k] - row[static_cast<std::size_t>(k2)]));
        }
      }
    }
    moduli.push_back(sup);
  }
  return moduli;
}

std::vector<Estimate> martingale_check(const GridFunction& L, const MatrixEnsemble& e, const ConeVector& x, double s,
                                       std::size_t n_paths, std::size_t horizon, const RngStream& rng) {
  if (n_paths < 2) throw Error(ErrorCode::InvalidArgument, "martingale check needs at least 2 paths");
  std::vector<double> samples(n_paths * (horizon + 1));
  parallel_for(n_paths, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      RngStream stream = rng.child(p);
      WalkState st{x, 0.0};
      samples[p * (horizon + 1)] = eval(L, st.x, s);
      for (std::size_t n = 1; n <= horizon; ++n) {
        st = step(st, e.matrix(e.sample_index(stream)));
        samples[p * (horizon + 1) + n] = eval(L, st.x, s - st.s);
      }
    }
  });
  std::vector<Estimate> out;
  out.reserve(horizon + 1);
  for (std::size_t n = 0; n <= horizon; ++n) {
    // Offsets from the first path's value: identical samples give SE 0 exactly.
    const double origin = samples[n];
    double sum = 0.0;
    for (std::size_t p = 0; p < n_paths; ++p) sum += samples[p * (horizon + 1) + n] - origin;
    const double mean_offset = sum / static_cast<double>(n_paths);
    double ss = 0.0;
    for (std::size_t p = 0; p < n_paths; ++p) {
      const double dev = samples[p * (horizon + 1) + n] - origin - mean_offset;
      ss += dev * dev;
    }
    const double var = ss / static_cast<double>(n_paths - 1);
    out.push_back({origin + mean_offset, std::sqrt(var / static_cast<double>(n_paths))});
  }
  return out;
}

double shift_invariance_check(const GridFunction& L, double zeta) {
  const Window& win = L.window();
  if (!(std::abs(zeta) < 2.0 * win.T())) throw Error(ErrorCode::ShiftTooLarge, "|zeta| must be below 2T");
  const std::size_t np = win.points();
  double sup = 0.0;
  for (std::size_t k = 0; k < np; ++k) {
    const double s = win.s(k);
    if (win.policy() == Boundary::Clamp && (s + zeta < -win.T() || s + zeta > win.T())) continue;
    const Window::Interp it = win.locate(s + zeta);
    for (std::size_t i = 0; i < L.grid().size(); ++i) {
      sup = std::max(sup, std::abs(L.at(i, k) - interp(L.row(i), it)));
    }
  }
  return sup;
}

double s_interpolation_bound(const GridFunction& L) {
  const std::size_t np = L.window().points();
  double worst = 0.0;
  for (std::size_t i = 0; i < L.grid().size(); ++i) {
    const auto row = L.row(i);
    for (std::size_t k = 1; k + 1 < np; ++k) worst = std::max(worst, std::abs(row[k + 1] - 2.0 * row[k] + row[k - 1]));
  }
  return worst / 8.0;
}

void write_grid_function_csv(std::ostream& os, const GridFunction& L) {
  const SphereGrid& g = L.grid();
  os << "node";
  for (std::size_t i = 0; i < g.dim(); ++i) os << ",x" << i;
  os << ",s,value\n";
  for (std::size_t n = 0; n < g.size(); ++n) {
    std::string prefix = std::to_string(n);
    for (double c : g.node(n)) prefix += "," + format_double(c);
    for (std::size_t k = 0; k < L.window().points(); ++k) {
      os << prefix << ',' << format_double(L.window().s(k)) << ',' << format_double(L.at(n, k)) << '\n';
    }
  }
}

GridFunction read_grid_function_csv(std::istream& is, std::shared_ptr<const SphereGrid> grid, const Window& window) {
  const std::size_t d = grid->dim();
  const std::size_t np = window.points();
  std::vector<double> values(grid->size() * np, 0.0);
  std::vector<bool> seen(values.size(), false);
  std::string line;
  if (!std::getline(is, line)) throw Error(ErrorCode::MalformedInput, "empty grid function file");
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != d + 3) {
      throw Error(ErrorCode::MalformedInput, "line " + std::to_string(lineno) + ": expected " + std::to_string(d + 3) + " fields");
    }
    try {
      const std::size_t node = std::stoul(fields[0]);
      const double s = std::stod(fields[d + 1]);
      const double value = std::stod(fields[d + 2]);
      if (node >= grid->size()) throw Error(ErrorCode::MalformedInput, "node index out of range");
      for (std::size_t c = 0; c < d; ++c) {
        if (std::abs(std::stod(fields[1 + c]) - grid->node(node)[c]) > 1e-12) {
          throw Error(ErrorCode::MalformedInput, "line " + std::to_string(lineno) + ": node coordinates do not match grid");
        }
      }
      const double u = (s + window.T()) / window.ds();
      const double k = std::round(u);
      if (std::abs(u - k) > 1e-6 || k < 0 || k >= static_cast<double>(np)) {
        throw Error(ErrorCode::MalformedInput, "line " + std::to_string(lineno) + ": s is not a window point");
      }
      const std::size_t idx = node * np + static_cast<std::size_t>(k);
      values[idx] = value;
      seen[idx] = true;
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::MalformedInput, "line " + std::to_string(lineno) + ": unparsable number");
    }
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw Error(ErrorCode::MalformedInput, "grid function file does not cover every grid point");
  }
  return GridFunction(std::move(grid), window, std::move(values));
}

void write_history_csv(std::ostream& os, const IterationResult& result) {
  os << "iteration,osc,defect\n";
  for (std::size_t k = 0; k < result.osc_history.size(); ++k) {
    os << k << ',' << format_double(result.osc_history[k]) << ',';
    if (k < result.defect_history.size()) os << format_double(result.defect_history[k]);
    os << '\n';
  }
}

}  // namespace conewalk
