#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "tscopf/nlp.hpp"

namespace tscopf::detail {

/// f = Va * Vb * (alpha * cos(ta - tb) + beta * sin(ta - tb)) with first and
/// second derivatives in the local order (Va, Vb, ta, tb). The same shape
/// covers bus injections, branch flows and reduced-network machine power.
struct TrigTerm {
  double value = 0.0;
  std::array<double, 4> grad{};
  std::array<std::array<double, 4>, 4> hess{};

  TrigTerm(double va, double vb, double ta, double tb, double alpha, double beta) {
    const double c = std::cos(ta - tb);
    const double s = std::sin(ta - tb);
    const double u = alpha * c + beta * s;   // d/dta of u is w
    const double w = -alpha * s + beta * c;
    value = va * vb * u;
    grad = {vb * u, va * u, va * vb * w, -va * vb * w};
    hess[0][1] = hess[1][0] = u;
    hess[0][2] = hess[2][0] = vb * w;
    hess[0][3] = hess[3][0] = -vb * w;
    hess[1][2] = hess[2][1] = va * w;
    hess[1][3] = hess[3][1] = -va * w;
    hess[2][2] = -va * vb * u;
    hess[3][3] = -va * vb * u;
    hess[2][3] = hess[3][2] = va * vb * u;
  }
};

/// Emits scale * (gradient, Hessian) of a local function over `vars` into row `row`.
template <std::size_t N>
void emit_derivatives(nlp::Evaluation& out, std::size_t row, const std::array<std::size_t, N>& vars,
                      const std::array<double, N>& grad, const std::array<std::array<double, N>, N>& hess,
                      double scale) {
  if (out.wants_jacobian()) {
    for (std::size_t i = 0; i < N; ++i) out.add_jacobian(row, vars[i], scale * grad[i]);
  }
  if (out.wants_hessian()) {
    for (std::size_t i = 0; i < N; ++i) {
      for (std::size_t j = 0; j <= i; ++j) out.add_hessian(row, vars[i], vars[j], scale * hess[i][j]);
    }
  }
}

}  // namespace tscopf::detail
