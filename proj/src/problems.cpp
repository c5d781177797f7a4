#include "zhd/problems.hpp"


#include <numbers>
#include <random>

namespace zhd {

namespace {

double get_param(const std::map<std::string, double>& params,
                 const std::string& key, double fallback) {
  auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

}  // namespace

Vector prox_l1(double gamma, double lambda, const Vector& z) {
  if (!(gamma > 0.0) || !(lambda > 0.0)) {
    throw std::invalid_argument("prox_l1: gamma and lambda must be positive");
  }
  require_finite(z, "prox_l1 z");
  const double t = gamma * lambda;
  Vector y(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double zi = z[i];
    y[i] = (zi > t) ? zi - t : (zi < -t ? zi + t : 0.0);
  }
  return y;
}

Vector prox_l0(double gamma, double lambda, const Vector& z) {
  if (!(gamma > 0.0) || !(lambda > 0.0)) {
    throw std::invalid_argument("prox_l0: gamma and lambda must be positive");
  }
  require_finite(z, "prox_l0 z");
  const double threshold = std::sqrt(2.0 * gamma * lambda);
  Vector y(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    y[i] = std::abs(z[i]) > threshold ? z[i] : 0.0;
  }
  return y;
}

Vector prox_box(const Vector& lower, const Vector& upper, const Vector& z) {
  if (lower.size() != z.size() || upper.size() != z.size()) {
    throw std::invalid_argument("prox_box: dimension mismatch");
  }
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    if (lower[i] > upper[i]) {
      throw std::invalid_argument("prox_box: lower > upper in a coordinate");
    }
  }
  return z.cwiseMax(lower).cwiseMin(upper);
}

Vector sphere_tangent_project(const Vector& x, const Vector& v) {
  if (std::abs(x.norm() - 1.0) > 1e-8) {
    throw std::invalid_argument("sphere_tangent_project: x not unit norm");
  }
  return v - x.dot(v) * x;
}

Vector sphere_retract(const Vector& x, const Vector& v) {
  if (std::abs(x.dot(v)) > 1e-8 * (1.0 + v.norm())) {
    throw std::invalid_argument("sphere_retract: v not tangent at x");
  }
  const Vector y = x + v;
  return y / y.norm();
}

Vector rayleigh_grad(const Matrix& A, const Vector& x) {
  if (A.rows() != A.cols() || A.rows() != x.size()) {
    throw std::invalid_argument("rayleigh_grad: dimension mismatch");
  }
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + A.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("rayleigh_grad: A must be symmetric");
  }
  if (std::abs(x.norm() - 1.0) > 1e-8) {
    throw std::invalid_argument("rayleigh_grad: x not unit norm");
  }
  const Vector ax = A * x;
  return 2.0 * (ax - x.dot(ax) * x);
}

namespace {

TestProblem make_lasso(const std::map<std::string, double>& params) {
  const int n = static_cast<int>(get_param(params, "dim", 50));
  const double lambda = get_param(params, "lambda", 0.1);
  const auto seed = static_cast<std::uint64_t>(get_param(params, "seed", 1));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(1.0, 2.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector d(n), b(n);
  for (int i = 0; i < n; ++i) d[i] = unif(rng);
  for (int i = 0; i < n; ++i) b[i] = normal(rng);

  TestProblem p;
  p.problem_id = "lasso";
  CompositeObjective obj;
  obj.smooth.evaluate = [d, b](const Vector& x) {
    return 0.5 * (d.cwiseProduct(x) - b).squaredNorm();
  };
  obj.smooth.gradient = [d, b](const Vector& x) {
    return d.cwiseProduct(d.cwiseProduct(x) - b).eval();
  };
  obj.nonsmooth.evaluate = [lambda](const Vector& x) {
    return lambda * x.lpNorm<1>();
  };
  obj.nonsmooth.prox = [lambda](double gamma, const Vector& z) {
    return prox_l1(gamma, lambda, z);
  };
  obj.lower_bound_known = 0.0;
  p.composite = obj;

  // Separable: x*_i minimizes 1/2 (d_i x - b_i)^2 + lambda |x|.
  Vector xstar(n);
  for (int i = 0; i < n; ++i) {
    const double u = b[i] / d[i];
    const double t = lambda / (d[i] * d[i]);
    xstar[i] = (u > t) ? u - t : (u < -t ? u + t : 0.0);
  }
  p.minimizer = xstar;
  p.optimal_value = obj.value(xstar);
  p.kl = KlProfile{0.5, std::numbers::sqrt2, std::nullopt, 1.0};
  return p;
}

TestProblem make_quartic(const std::map<std::string, double>& params) {
  const int n = static_cast<int>(get_param(params, "dim", 1));
  TestProblem p;
  p.problem_id = "quartic";
  CompositeObjective obj;
  obj.smooth.evaluate = [](const Vector& x) {
    const double s = x.squaredNorm();
    return s * s;
  };
  obj.smooth.gradient = [](const Vector& x) {
    return (4.0 * x.squaredNorm() * x).eval();
  };
  obj.nonsmooth.evaluate = [](const Vector&) { return 0.0; };
  obj.nonsmooth.prox = [](double, const Vector& z) { return z; };
  obj.lower_bound_known = 0.0;
  p.composite = obj;
  p.minimizer = Vector::Zero(n);
  p.optimal_value = 0.0;
  // phi(t) = t^(1/4): phi'(Phi) * ||grad Phi|| = 1 exactly, so c = 1.
  p.kl = KlProfile{0.75, 1.0, std::nullopt, 1.0};
  return p;
}

TestProblem make_l0_least_squares(const std::map<std::string, double>& params) {
  const int n = static_cast<int>(get_param(params, "dim", 20));
  const double lambda = get_param(params, "lambda", 0.1);
  const auto seed = static_cast<std::uint64_t>(get_param(params, "seed", 2));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector b(n);
  for (int i = 0; i < n; ++i) b[i] = normal(rng);

  TestProblem p;
  p.problem_id = "l0_least_squares";
  CompositeObjective obj;
  obj.smooth.evaluate = [b](const Vector& x) {
    return 0.5 * (x - b).squaredNorm();
  };
  obj.smooth.gradient = [b](const Vector& x) { return (x - b).eval(); };
  obj.nonsmooth.evaluate = [lambda](const Vector& x) {
    double nnz = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      if (x[i] != 0.0) nnz += 1.0;
    }
    return lambda * nnz;
  };
  obj.nonsmooth.prox = [lambda](double gamma, const Vector& z) {
    return prox_l0(gamma, lambda, z);
  };
  obj.lower_bound_known = 0.0;
  p.composite = obj;
  p.minimizer = prox_l0(1.0, lambda, b);
  p.optimal_value = obj.value(*p.minimizer);
  p.kl = KlProfile{0.5, std::numbers::sqrt2, std::nullopt, 0.1};
  return p;
}

TestProblem make_rayleigh_sphere(const std::map<std::string, double>& params) {
  const int n = static_cast<int>(get_param(params, "dim", 2));
  if (n < 2) throw std::invalid_argument("rayleigh_sphere: dim must be >= 2");
  Matrix A;
  if (params.count("seed")) {
    const auto seed = static_cast<std::uint64_t>(params.at("seed"));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix B(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) B(i, j) = normal(rng);
    }
    A = 0.5 * (B + B.transpose());
  } else {
    A = Matrix::Zero(n, n);
    for (int i = 0; i < n; ++i) A(i, i) = static_cast<double>(i + 1);
  }

  TestProblem p;
  p.problem_id = "rayleigh_sphere";
  p.manifold = ManifoldObjective{A, SphereManifold{n}};
  Eigen::SelfAdjointEigenSolver<Matrix> es(A);
  p.optimal_value = es.eigenvalues()[0];
  p.minimizer = es.eigenvectors().col(0);
  p.kl = KlProfile{0.5, std::numbers::sqrt2, std::nullopt, 0.5};
  return p;
}

}  // namespace

TestProblem make_test_problem(const std::string& name,
                              const std::map<std::string, double>& params) {
  if (name == "lasso") return make_lasso(params);
  if (name == "quartic") return make_quartic(params);
  if (name == "l0_least_squares") return make_l0_least_squares(params);
  if (name == "rayleigh_sphere") return make_rayleigh_sphere(params);
  throw std::invalid_argument("make_test_problem: unknown problem '" + name + "'");
}

SmoothFunction rosenbrock() {
  SmoothFunction f;
  f.evaluate = [](const Vector& x) {
    const double a = x[1] - x[0] * x[0];
    const double b = 1.0 - x[0];
    return 100.0 * a * a + b * b;
  };
  f.gradient = [](const Vector& x) {
    Vector g(2);
    const double a = x[1] - x[0] * x[0];
    g[0] = -400.0 * x[0] * a - 2.0 * (1.0 - x[0]);
    g[1] = 200.0 * a;
    return g;
  };
  f.domain_open_set = "R^2";
  return f;
}

}  // namespace zhd
