#include "xdiff/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

#include "xdiff/errors.hpp"

namespace xdiff {
namespace {

void check_shape(std::span<const double> f, const PeriodicGrid& grid) {
  if (f.size() != grid.size()) {
    throw DomainError("grid: field has " + std::to_string(f.size()) + " values, grid expects " +
                      std::to_string(grid.size()));
  }
}

// FFTW planning is not thread-safe.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

struct PlanGuard {
  fftw_plan plan = nullptr;
  ~PlanGuard() {
    if (plan) {
      std::lock_guard lock(fftw_planner_mutex());
      fftw_destroy_plan(plan);
    }
  }
};

}  // namespace

PeriodicGrid::PeriodicGrid(int d, int n) : d_(d), n_(n) {
  if (d != 1 && d != 2) throw DomainError("PeriodicGrid: dimension must be 1 or 2");
  if (n < 4) throw DomainError("PeriodicGrid: need at least 4 points per axis");
  dx_ = 1.0 / n;
  cell_volume_ = std::pow(dx_, d);
  size_ = d == 1 ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n) * n;
}

std::size_t PeriodicGrid::neighbor(std::size_t k, int axis, int offset) const {
  const std::size_t nn = static_cast<std::size_t>(n_);
  const std::size_t shift = static_cast<std::size_t>(offset + n_);  // offset mod n, kept unsigned
  const std::size_t i = k % nn;
  if (axis == 0) return k - i + (i + shift) % nn;
  const std::size_t j = k / nn;
  return ((j + shift) % nn) * nn + i;
}

void laplacian_into(std::span<const double> f, const PeriodicGrid& grid, std::span<double> out) {
  check_shape(f, grid);
  check_shape(out, grid);
  const double inv = 1.0 / (grid.dx() * grid.dx());
  const int n = grid.n();
  if (grid.dim() == 1) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
      const int ip = i + 1 == n ? 0 : i + 1;
      const int im = i == 0 ? n - 1 : i - 1;
      out[i] = (f[ip] - 2.0 * f[i] + f[im]) * inv;
    }
    return;
  }
#pragma omp parallel for schedule(static)
  for (int j = 0; j < n; ++j) {
    const int jp = j + 1 == n ? 0 : j + 1;
    const int jm = j == 0 ? n - 1 : j - 1;
    for (int i = 0; i < n; ++i) {
      const int ip = i + 1 == n ? 0 : i + 1;
      const int im = i == 0 ? n - 1 : i - 1;
      const double c = f[j * n + i];
      out[j * n + i] =
          (f[j * n + ip] + f[j * n + im] + f[jp * n + i] + f[jm * n + i] - 4.0 * c) * inv;
    }
  }
}

Field laplacian(std::span<const double> f, const PeriodicGrid& grid) {
  Field out(grid.size());
  laplacian_into(f, grid, out);
  return out;
}

namespace serial {
Field laplacian(std::span<const double> f, const PeriodicGrid& grid) {
  check_shape(f, grid);
  Field out(grid.size());
  const double inv = 1.0 / (grid.dx() * grid.dx());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    double acc = 0.0;
    for (int axis = 0; axis < grid.dim(); ++axis) {
      acc += f[grid.neighbor(k, axis, +1)] - 2.0 * f[k] + f[grid.neighbor(k, axis, -1)];
    }
    out[k] = acc * inv;
  }
  return out;
}
}  // namespace serial

std::vector<Field> gradient(std::span<const double> f, const PeriodicGrid& grid) {
  check_shape(f, grid);
  std::vector<Field> g(grid.dim(), Field(grid.size()));
  const double inv = 1.0 / (2.0 * grid.dx());
  for (int axis = 0; axis < grid.dim(); ++axis) {
    auto& ga = g[axis];
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(grid.size()); ++k) {
      ga[k] = (f[grid.neighbor(k, axis, +1)] - f[grid.neighbor(k, axis, -1)]) * inv;
    }
  }
  return g;
}

double first_eigenvalue(const PeriodicGrid& grid) {
  const double dx = grid.dx();
  return 2.0 / (dx * dx) * (1.0 - std::cos(2.0 * std::numbers::pi * dx));
}

PoissonSolution poisson_solve(std::span<const double> rhs, const PeriodicGrid& grid) {
  check_shape(rhs, grid);
  const int n = grid.n();
  const int nc = n / 2 + 1;
  const std::size_t real_size = grid.size();
  const std::size_t complex_size =
      grid.dim() == 1 ? static_cast<std::size_t>(nc) : static_cast<std::size_t>(n) * nc;

  std::unique_ptr<double, FftwFree> in(static_cast<double*>(fftw_malloc(sizeof(double) * real_size)));
  std::unique_ptr<fftw_complex, FftwFree> spec(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * complex_size)));
  if (!in || !spec) throw std::bad_alloc();

  PlanGuard forward, backward;
  {
    std::lock_guard lock(fftw_planner_mutex());
    if (grid.dim() == 1) {
      forward.plan = fftw_plan_dft_r2c_1d(n, in.get(), spec.get(), FFTW_ESTIMATE);
      backward.plan = fftw_plan_dft_c2r_1d(n, spec.get(), in.get(), FFTW_ESTIMATE);
    } else {
      forward.plan = fftw_plan_dft_r2c_2d(n, n, in.get(), spec.get(), FFTW_ESTIMATE);
      backward.plan = fftw_plan_dft_c2r_2d(n, n, spec.get(), in.get(), FFTW_ESTIMATE);
    }
  }
  if (!forward.plan || !backward.plan) throw NumericError("poisson_solve: FFTW planning failed");

  PoissonSolution out;
  out.removed_mean = mean(rhs);
  for (std::size_t k = 0; k < real_size; ++k) in.get()[k] = rhs[k] - out.removed_mean;
  fftw_execute(forward.plan);

  const double dx = grid.dx();
  auto symbol = [&](int k) {
    return 2.0 / (dx * dx) * (1.0 - std::cos(2.0 * std::numbers::pi * k / n));
  };
  const double scale = 1.0 / static_cast<double>(real_size);
  auto* s = spec.get();
  if (grid.dim() == 1) {
    s[0][0] = s[0][1] = 0.0;
    for (int k = 1; k < nc; ++k) {
      const double f = scale / symbol(k);
      s[k][0] *= f;
      s[k][1] *= f;
    }
  } else {
    for (int kj = 0; kj < n; ++kj) {
      for (int ki = 0; ki < nc; ++ki) {
        const std::size_t idx = static_cast<std::size_t>(kj) * nc + ki;
        if (kj == 0 && ki == 0) {
          s[idx][0] = s[idx][1] = 0.0;
          continue;
        }
        const double f = scale / (symbol(ki) + symbol(kj));
        s[idx][0] *= f;
        s[idx][1] *= f;
      }
    }
  }
  fftw_execute(backward.plan);

  out.phi.assign(in.get(), in.get() + real_size);
  // Remove the rounding-level mean so the zero-mean constraint holds exactly-ish.
  const double m = mean(out.phi);
  for (double& v : out.phi) v -= m;
  return out;
}

double mean(std::span<const double> f) {
  if (f.empty()) return 0.0;
  double s = 0.0;
  for (double v : f) s += v;
  return s / static_cast<double>(f.size());
}

double integral(std::span<const double> f, const PeriodicGrid& grid) {
  check_shape(f, grid);
  double s = 0.0;
  for (double v : f) s += v;
  return s * grid.cell_volume();
}

double norm_l2(std::span<const double> f, const PeriodicGrid& grid) {
  check_shape(f, grid);
  double s = 0.0;
  for (double v : f) s += v * v;
  return std::sqrt(s * grid.cell_volume());
}

double seminorm_h1(std::span<const double> f, const PeriodicGrid& grid) {
  const auto g = gradient(f, grid);
  double s = 0.0;
  for (const auto& ga : g) {
    for (double v : ga) s += v * v;
  }
  return std::sqrt(s * grid.cell_volume());
}

double norm_hminus1(std::span<const double> f, const PeriodicGrid& grid) {
  const auto sol = poisson_solve(f, grid);
  const double h1 = seminorm_h1(sol.phi, grid);
  return std::sqrt(h1 * h1 + sol.removed_mean * sol.removed_mean);
}

double norm_inf(std::span<const double> f) {
  double m = 0.0;
  for (double v : f) m = std::fmax(m, std::abs(v));
  return m;
}

}  // namespace xdiff
