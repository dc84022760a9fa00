#include "mbpt/oracle.hpp"

#include <Eigen/Eigenvalues>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>

#include "mbpt/enumeration.hpp"

namespace mbpt {

void gauss_hermite(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  Matrix J = Matrix::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = std::sqrt(k / 2.0);
    J(k, k - 1) = b;
    J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(J);
  nodes.resize(n);
  weights.resize(n);
  const double mu0 = std::sqrt(M_PI);  // integral of exp(-x^2)
  for (int k = 0; k < n; ++k) {
    nodes[k] = es.eigenvalues()(k);
    const double v0 = es.eigenvectors()(0, k);
    weights[k] = mu0 * v0 * v0;
  }
}

namespace {

struct Grid {
  int N;
  int nodes;
  std::vector<double> y;  // nodes scaled for weight exp(-y^2/2)
  std::vector<double> w;  // normalized so that the weights sum to one
  Matrix Linv_t;          // columns c_k: x = sum_k y_k c_k
};

Grid make_grid(const GibbsProblem& p, const QuadratureSpec& spec) {
  if (spec.nodes_per_dim < 10) throw Error("nodes_per_dim must be at least 10");
  if (p.N > spec.max_dim)
    throw DimensionTooLarge("dimension " + std::to_string(p.N) + " exceeds quadrature max_dim " +
                            std::to_string(spec.max_dim));
  double budget = 1.0;
  for (int k = 0; k < p.N; ++k) budget *= spec.nodes_per_dim;
  if (budget > 1e8) throw GridBudgetExceeded("quadrature grid exceeds the 1e8-point budget");

  Grid g;
  g.N = p.N;
  g.nodes = spec.nodes_per_dim;
  std::vector<double> t, w;
  gauss_hermite(spec.nodes_per_dim, t, w);
  g.y.resize(g.nodes);
  g.w.resize(g.nodes);
  for (int k = 0; k < g.nodes; ++k) {
    g.y[k] = std::sqrt(2.0) * t[k];
    g.w[k] = w[k] / std::sqrt(M_PI);  // E_{y ~ N(0,1)}[f] = sum w_k f(y_k)
  }
  const Matrix L = cholesky_factor(p.A);
  g.Linv_t = L.transpose().lu().solve(Matrix::Identity(p.N, p.N));
  return g;
}

// Walks the tensor grid with prefix sums of the whitening transform so only
// the innermost coordinate is recomputed per step.  fn(x, y2, logw) where
// y2 = |y|^2 and logw the log of the normalized weight product.
template <typename Fn>
void grid_pass(const Grid& g, Fn&& fn) {
  const int N = g.N, M = g.nodes;
  std::vector<int> idx(N, 0);
  // xs[d] = sum_{k<d} y_k c_k, ysq[d], lw[d] analogous partials
  std::vector<Vector> xs(N + 1, Vector::Zero(N));
  std::vector<double> ysq(N + 1, 0.0), lw(N + 1, 0.0);
  auto refresh_from = [&](int d) {
    for (int k = d; k < N; ++k) {
      xs[k + 1] = xs[k] + g.y[idx[k]] * g.Linv_t.col(k);
      ysq[k + 1] = ysq[k] + g.y[idx[k]] * g.y[idx[k]];
      lw[k + 1] = lw[k] + std::log(g.w[idx[k]]);
    }
  };
  refresh_from(0);
  while (true) {
    fn(xs[N], ysq[N], lw[N]);
    int d = N - 1;
    while (d >= 0 && idx[d] == M - 1) idx[d--] = 0;
    if (d < 0) break;
    ++idx[d];
    refresh_from(d);
  }
}

double potential_quartic(const GibbsProblem& p, const Vector& x) {
  const Vector s = x.cwiseProduct(x);
  return 0.125 * s.dot(p.v * s);
}

}  // namespace

ExactQuantities exact_quantities(const GibbsProblem& p, const QuadratureSpec& spec) {
  const Grid g = make_grid(p, spec);
  const GaussianReference ref = gaussian_reference(p);

  double zrel = 0.0, e_num = 0.0;
  Matrix g_num = Matrix::Zero(p.N, p.N);
  grid_pass(g, [&](const Vector& x, double y2, double logw) {
    const double u = potential_quartic(p, x);
    const double f = std::exp(logw - u);
    zrel += f;
    e_num += f * (0.5 * y2 + u);
    g_num.noalias() += f * x * x.transpose();
  });

  ExactQuantities out;
  out.Z_over_Z0 = zrel;
  out.Z = std::exp(ref.logZ0) * zrel;
  out.Omega = ref.Omega0 - std::log(zrel);
  out.E = e_num / zrel;
  out.G = g_num / zrel;
  return out;
}

double gaussian_moment(const GibbsProblem& p, const std::vector<int>& multi_index) {
  if (multi_index.size() % 2 != 0) return 0.0;
  for (int a : multi_index)
    if (a < 0 || a >= p.N) throw DimensionMismatch("moment index out of range");
  const Matrix G0 = gaussian_reference(p).G0;
  std::vector<int> positions(multi_index.size());
  for (std::size_t k = 0; k < positions.size(); ++k) positions[k] = static_cast<int>(k);
  double total = 0.0;
  for_each_pairing(positions, [&](const std::vector<std::pair<int, int>>& pairing) {
    double prod = 1.0;
    for (const auto& [a, b] : pairing) prod *= G0(multi_index[a], multi_index[b]);
    total += prod;
  });
  return total;
}

double gaussian_moment_quadrature(const GibbsProblem& p, const std::vector<int>& multi_index,
                                  const QuadratureSpec& spec) {
  for (int a : multi_index)
    if (a < 0 || a >= p.N) throw DimensionMismatch("moment index out of range");
  const Grid g = make_grid(p, spec);
  double acc = 0.0;
  grid_pass(g, [&](const Vector& x, double, double logw) {
    double prod = std::exp(logw);
    for (int a : multi_index) prod *= x(a);
    acc += prod;
  });
  return acc;
}

namespace {

struct McAccum {
  double sw = 0.0, sw2 = 0.0;
  Matrix sa, sa2, saw;  // sums of w x x^T, its square, and w * (w x x^T)
};

std::uint64_t chunk_seed(std::uint64_t seed, int chunk) {
  // splitmix64 step on (seed, chunk)
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(chunk + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

void mc_chunk(const GibbsProblem& p, const Matrix& Linv_t, long n, std::uint64_t seed,
              McAccum& acc) {
  std::mt19937_64 rng(seed);
  auto uniform = [&rng]() {
    // in (0,1]: avoids log(0) in the Box-Muller transform
    return (static_cast<double>(rng() >> 11) + 1.0) * 0x1p-53;
  };
  double spare = 0.0;
  bool has_spare = false;
  auto normal = [&]() {
    if (has_spare) {
      has_spare = false;
      return spare;
    }
    const double u1 = uniform(), u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare = r * std::sin(2.0 * M_PI * u2);
    has_spare = true;
    return r * std::cos(2.0 * M_PI * u2);
  };

  acc.sa = Matrix::Zero(p.N, p.N);
  acc.sa2 = Matrix::Zero(p.N, p.N);
  acc.saw = Matrix::Zero(p.N, p.N);
  Vector xi(p.N);
  for (long s = 0; s < n; ++s) {
    for (int k = 0; k < p.N; ++k) xi(k) = normal();
    const Vector x = Linv_t * xi;
    const double w = std::exp(-potential_quartic(p, x));
    acc.sw += w;
    acc.sw2 += w * w;
    const Matrix a = w * x * x.transpose();
    acc.sa += a;
    acc.sa2 += a.cwiseProduct(a);
    acc.saw += w * a;
  }
}

}  // namespace

MonteCarloResult monte_carlo(const GibbsProblem& p, long samples, std::uint64_t seed,
                             int n_threads) {
  if (samples < 1000) throw Error("monte_carlo needs at least 1000 samples");
  const Matrix L = cholesky_factor(p.A);
  const Matrix Linv_t = L.transpose().lu().solve(Matrix::Identity(p.N, p.N));

  constexpr int kChunks = 64;
  std::vector<McAccum> accs(kChunks);
  std::vector<long> counts(kChunks, samples / kChunks);
  for (int c = 0; c < samples % kChunks; ++c) ++counts[c];

  const int workers = std::clamp(n_threads, 1, kChunks);
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  for (int t = 0; t < workers; ++t)
    pool.emplace_back([&] {
      for (int c = next.fetch_add(1); c < kChunks; c = next.fetch_add(1))
        mc_chunk(p, Linv_t, counts[c], chunk_seed(seed, c), accs[c]);
    });
  for (auto& th : pool) th.join();

  double sw = 0.0, sw2 = 0.0;
  Matrix sa = Matrix::Zero(p.N, p.N), sa2 = Matrix::Zero(p.N, p.N), saw = Matrix::Zero(p.N, p.N);
  for (const auto& a : accs) {  // fixed chunk order keeps the sums bitwise stable
    sw += a.sw;
    sw2 += a.sw2;
    sa += a.sa;
    sa2 += a.sa2;
    saw += a.saw;
  }

  const double m = static_cast<double>(samples);
  MonteCarloResult out;
  out.samples = samples;
  out.seed = seed;
  out.z_over_z0 = sw / m;
  out.z_over_z0_stderr = std::sqrt(std::max(0.0, sw2 / m - out.z_over_z0 * out.z_over_z0) / m);
  out.G = sa / sw;
  // linearized standard error of the ratio estimator (sum a)/(sum w)
  out.G_stderr = Matrix::Zero(p.N, p.N);
  for (int i = 0; i < p.N; ++i)
    for (int j = 0; j < p.N; ++j) {
      const double mean_a = sa(i, j) / m;
      const double r = out.G(i, j);
      const double var = sa2(i, j) / m - 2.0 * r * saw(i, j) / m + r * r * sw2 / m -
                         (mean_a - r * sw / m) * (mean_a - r * sw / m);
      out.G_stderr(i, j) = std::sqrt(std::max(0.0, var) / m) / (sw / m);
    }
  return out;
}

}  // namespace mbpt
