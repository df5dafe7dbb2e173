#ifndef NLSYS_GRID_HPP
#define NLSYS_GRID_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "nlsys/params.hpp"

namespace nlsys {

/// Area of the unit sphere S^{n-1}; for n = 1 this is 2 (two half-lines).
inline double unit_sphere_area(int n) {
  const double half = 0.5 * static_cast<double>(n);
  return 2.0 * std::pow(std::numbers::pi, half) / std::tgamma(half);
}

/// Uniform radial mesh on [0, R] for radial functions on the ball B_R in R^n.
///
/// Node i sits at r_i = i*h, h = R/(m+1), for i = 0..m+1. Node 0 is the
/// origin (regularity node), nodes 1..m are the interior nodes and node m+1
/// is the Dirichlet boundary r = R. The unknowns of every boundary value
/// problem are nodes 0..m.
///
/// Weights are control volumes |S^{n-1}| * int r^{n-1} dr over
/// [r_i - h/2, r_i + h/2] ∩ [0, R], so they sum to the exact ball volume.
/// For n = 1 the mesh represents even functions on (-R, R): the origin
/// counts once, every other node twice. Face areas sit at r_i + h/2 and
/// define the conservative (finite-volume) radial Laplacian.
struct RadialGrid {
  int n = 1;
  double R = 0.0;
  int m = 0;
  double h = 0.0;
  double sphere_area = 2.0;
  std::vector<double> r;     // m+2 nodes
  std::vector<double> w;     // m+2 quadrature weights
  std::vector<double> face;  // m+1 face areas, face[i] between nodes i and i+1

  [[nodiscard]] std::size_t size() const { return r.size(); }
  /// Number of unknown nodes (origin plus interior), i.e. m+1.
  [[nodiscard]] std::size_t unknowns() const { return static_cast<std::size_t>(m) + 1; }
  [[nodiscard]] double volume() const {
    return sphere_area * std::pow(R, n) / static_cast<double>(n);
  }
};

using GridPtr = std::shared_ptr<const RadialGrid>;

inline GridPtr make_grid(int n, double R, int m) {
  if (n < 1) throw InvalidArgument("grid dimension must be >= 1");
  if (!(R > 0.0) || !std::isfinite(R)) throw InvalidArgument("truncation radius R must be positive");
  if (m < 16) throw InvalidArgument("insufficient resolution: m=" + std::to_string(m) + " < 16");

  auto g = std::make_shared<RadialGrid>();
  g->n = n;
  g->R = R;
  g->m = m;
  g->h = R / static_cast<double>(m + 1);
  g->sphere_area = unit_sphere_area(n);
  const std::size_t count = static_cast<std::size_t>(m) + 2;
  g->r.resize(count);
  g->w.resize(count);
  g->face.resize(count - 1);
  const double dn = static_cast<double>(n);
  for (std::size_t i = 0; i < count; ++i) {
    g->r[i] = static_cast<double>(i) * g->h;
  }
  g->r.back() = R;
  for (std::size_t i = 0; i < count; ++i) {
    const double lo = std::max(0.0, g->r[i] - 0.5 * g->h);
    const double hi = std::min(R, g->r[i] + 0.5 * g->h);
    g->w[i] = g->sphere_area * (std::pow(hi, dn) - std::pow(lo, dn)) / dn;
  }
  for (std::size_t i = 0; i + 1 < count; ++i) {
    g->face[i] = g->sphere_area * std::pow(g->r[i] + 0.5 * g->h, dn - 1.0);
  }
  return g;
}

/// Nodal radial profile on a grid. Values are stored at all m+2 nodes; the
/// differential operators and the energy functionals treat the boundary
/// value as the Dirichlet datum 0.
struct Field {
  GridPtr grid;
  std::vector<double> values;

  Field() = default;
  explicit Field(GridPtr g) : grid(std::move(g)), values(grid->size(), 0.0) {}
  Field(GridPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != grid->size()) throw InvalidArgument("field size does not match grid");
  }

  [[nodiscard]] std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
};

/// Samples f at every node, including the boundary node.
inline Field sample(const GridPtr& grid, const std::function<double(double)>& f) {
  Field out(grid);
  for (std::size_t i = 0; i < grid->size(); ++i) out[i] = f(grid->r[i]);
  return out;
}

/// Samples f at the unknown nodes and sets the boundary value to 0.
inline Field sample_dirichlet(const GridPtr& grid, const std::function<double(double)>& f) {
  Field out = sample(grid, f);
  out.values.back() = 0.0;
  return out;
}

/// Quadrature sum_i w_i f(r_i) over all nodes.
inline double integrate(const Field& f) {
  const auto& w = f.grid->w;
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += w[i] * f[i];
  return s;
}

namespace detail {

/// Conservative radial Laplacian on raw nodal values (boundary treated as 0).
inline void laplacian_raw(const RadialGrid& g, std::span<const double> f, std::span<double> out) {
  const std::size_t last = g.unknowns();  // boundary index m+1
  const double h = g.h;
  for (std::size_t i = 0; i < last; ++i) {
    const double fi = f[i];
    const double right = (i + 1 < last) ? f[i + 1] : 0.0;
    double flux = g.face[i] * (right - fi);
    if (i > 0) flux -= g.face[i - 1] * (fi - f[i - 1]);
    out[i] = flux / (h * g.w[i]);
  }
  out[last] = 0.0;
}

}  // namespace detail

/// Second-order discrete radial Laplacian u'' + (n-1)u'/r with the even
/// extension at the origin (limit n*u''(0)) and Dirichlet 0 at r = R.
inline Field laplacian_apply(const Field& f) {
  Field out(f.grid);
  detail::laplacian_raw(*f.grid, f.values, out.values);
  return out;
}

/// Discrete Dirichlet energy int |∇f|² built from first differences
/// (Dirichlet 0 at R). Equals integrate(-Δf · f) exactly.
inline double dirichlet_form(const RadialGrid& g, std::span<const double> f) {
  const std::size_t last = g.unknowns();
  double s = 0.0;
  for (std::size_t i = 0; i < last; ++i) {
    const double right = (i + 1 < last) ? f[i + 1] : 0.0;
    const double d = right - f[i];
    s += g.face[i] * d * d;
  }
  return s / g.h;
}

/// sum over unknown nodes of w_i |f_i|^p.
inline double power_sum(const RadialGrid& g, std::span<const double> f, double p) {
  const std::size_t last = g.unknowns();
  double s = 0.0;
  if (p == 2.0) {
    for (std::size_t i = 0; i < last; ++i) s += g.w[i] * f[i] * f[i];
  } else {
    for (std::size_t i = 0; i < last; ++i) s += g.w[i] * std::pow(std::abs(f[i]), p);
  }
  return s;
}

/// Applies K_c = -W Δ_h + c W (the Gram matrix of ∫|∇f|² + c f²) to f.
inline std::vector<double> helmholtz_apply(const RadialGrid& g, std::span<const double> f, double c) {
  std::vector<double> out(g.size(), 0.0);
  detail::laplacian_raw(g, f, out);
  const std::size_t last = g.unknowns();
  for (std::size_t i = 0; i < last; ++i) out[i] = g.w[i] * (c * f[i] - out[i]);
  return out;
}

/// Direct solver for (K_c + diag(shift)) x = y restricted to the node block
/// [lo, hi] (homogeneous Dirichlet data outside the block). The matrix is
/// symmetric, tridiagonal and positive definite for c > 0, shift >= 0.
class HelmholtzSolver {
 public:
  HelmholtzSolver(const RadialGrid& g, double c, std::size_t lo, std::size_t hi, std::span<const double> shift = {})
      : lo_(lo), hi_(hi) {
    if (lo > hi || hi >= g.unknowns()) throw InvalidArgument("invalid node block for Helmholtz solve");
    const std::size_t k = hi - lo + 1;
    diag_.resize(k);
    upper_.resize(k);
    for (std::size_t j = 0; j < k; ++j) {
      const std::size_t i = lo + j;
      const double left = (i > 0) ? g.face[i - 1] : 0.0;
      diag_[j] = (left + g.face[i]) / g.h + c * g.w[i] + (shift.empty() ? 0.0 : shift[i]);
      upper_[j] = -g.face[i] / g.h;
    }
    // Thomas factorization: store modified upper coefficients and pivots.
    cp_.resize(k);
    piv_.resize(k);
    piv_[0] = diag_[0];
    cp_[0] = upper_[0] / piv_[0];
    for (std::size_t j = 1; j < k; ++j) {
      piv_[j] = diag_[j] - upper_[j - 1] * cp_[j - 1];
      cp_[j] = upper_[j] / piv_[j];
    }
  }

  HelmholtzSolver(const RadialGrid& g, double c, std::span<const double> shift = {})
      : HelmholtzSolver(g, c, 0, g.unknowns() - 1, shift) {}

  /// Returns a full-length vector (grid size) that is zero outside the block.
  [[nodiscard]] std::vector<double> solve(std::span<const double> rhs) const {
    std::vector<double> x(rhs.size(), 0.0);
    const std::size_t k = hi_ - lo_ + 1;
    std::vector<double> d(k);
    d[0] = rhs[lo_] / piv_[0];
    for (std::size_t j = 1; j < k; ++j) d[j] = (rhs[lo_ + j] - upper_[j - 1] * d[j - 1]) / piv_[j];
    x[hi_] = d[k - 1];
    for (std::size_t j = k - 1; j-- > 0;) x[lo_ + j] = d[j] - cp_[j] * x[lo_ + j + 1];
    return x;
  }

  [[nodiscard]] std::size_t lo() const { return lo_; }
  [[nodiscard]] std::size_t hi() const { return hi_; }

 private:
  std::size_t lo_, hi_;
  std::vector<double> diag_, upper_, cp_, piv_;
};

/// Centered first differences; f'(0) = 0 by evenness, boundary value 0.
inline std::vector<double> centered_derivative(const RadialGrid& g, std::span<const double> f) {
  const std::size_t last = g.unknowns();
  std::vector<double> d(g.size(), 0.0);
  for (std::size_t i = 1; i < last; ++i) {
    const double right = (i + 1 < last) ? f[i + 1] : 0.0;
    d[i] = (right - f[i - 1]) / (2.0 * g.h);
  }
  d[last] = (0.0 - f[last - 1]) / g.h;
  return d;
}

}  // namespace nlsys

#endif  // NLSYS_GRID_HPP
