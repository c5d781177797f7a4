#pragma once

#include "zhd/core.hpp"

#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <string>

namespace zhd {

// ---------------------------------------------------------------------------
// Objective building blocks
// ---------------------------------------------------------------------------

/// Smooth part f: value and gradient, both defined on an open set
/// containing the feasible region.
struct SmoothFunction {
  std::function<double(const Vector&)> evaluate;
  std::function<Vector(const Vector&)> gradient;
  std::string domain_open_set = "R^n";
};

/// Proxable part g: value (may be +inf) and one deterministic selection
/// from the prox set Prox_{gamma g}(z).
struct ProxableFunction {
  std::function<double(const Vector&)> evaluate;
  std::function<Vector(double, const Vector&)> prox;
};

/// Theta = f + g.
struct CompositeObjective {
  SmoothFunction smooth;
  ProxableFunction nonsmooth;
  std::optional<double> lower_bound_known;

  double value(const Vector& x) const {
    return smooth.evaluate(x) + nonsmooth.evaluate(x);
  }
};

/// The unit sphere in R^n as an embedded submanifold.
struct SphereManifold {
  int ambient_dim = 2;

  void validate_point(const Vector& x) const {
    if (x.size() != ambient_dim) {
      throw std::invalid_argument("SphereManifold: wrong dimension");
    }
    if (std::abs(x.norm() - 1.0) > 1e-8) {
      throw std::invalid_argument("SphereManifold: point not on the sphere");
    }
  }
};

// ---------------------------------------------------------------------------
// Prox operations
// ---------------------------------------------------------------------------

/// Componentwise soft threshold for g = lambda ||.||_1.
Vector prox_l1(double gamma, double lambda, const Vector& z);

/// Componentwise hard threshold for g = lambda ||.||_0; at the tie
/// |z_i| = sqrt(2 gamma lambda) the zero branch is returned.
Vector prox_l0(double gamma, double lambda, const Vector& z);

/// Projection onto the box [lower, upper]; gamma-independent.
Vector prox_box(const Vector& lower, const Vector& upper, const Vector& z);

// ---------------------------------------------------------------------------
// Sphere operations
// ---------------------------------------------------------------------------

/// v - <x, v> x; output orthogonal to x.
Vector sphere_tangent_project(const Vector& x, const Vector& v);

/// Metric-projection retraction (x + v)/||x + v||.
Vector sphere_retract(const Vector& x, const Vector& v);

/// Riemannian gradient of the Rayleigh quotient f(x) = x'Ax on the unit
/// sphere: 2(Ax - (x'Ax) x).
Vector rayleigh_grad(const Matrix& A, const Vector& x);

// ---------------------------------------------------------------------------
// Test-problem library
// ---------------------------------------------------------------------------

/// Data for the Riemannian test problem: f(x) = x'Ax on the sphere.
struct ManifoldObjective {
  Matrix A;
  SphereManifold manifold;

  double value(const Vector& x) const { return x.dot(A * x); }
  Vector riemannian_gradient(const Vector& x) const { return rayleigh_grad(A, x); }
};

struct TestProblem {
  std::string problem_id;
  std::optional<CompositeObjective> composite;
  std::optional<ManifoldObjective> manifold;
  KlProfile kl;
  std::optional<Vector> minimizer;
  std::optional<double> optimal_value;
};

/// Configured instances with known KL exponents:
///   lasso            -- f = 1/2 ||Dx - b||^2 (diagonal well-conditioned D),
///                       g = lambda ||.||_1; theta = 1/2; closed-form minimizer.
///   quartic          -- Phi(x) = ||x||^4, g = 0; theta = 3/4.
///   l0_least_squares -- f = 1/2 ||x - b||^2, g = lambda ||.||_0; theta = 1/2.
///   rayleigh_sphere  -- f = x'Ax on the unit sphere; theta = 1/2 at a
///                       simple smallest eigenvalue.
/// params keys (all optional, problem-dependent): dim, lambda, seed.
TestProblem make_test_problem(const std::string& name,
                              const std::map<std::string, double>& params = {});

/// The 2-D Rosenbrock function, the classic smooth line-search benchmark.
SmoothFunction rosenbrock();

}  // namespace zhd
