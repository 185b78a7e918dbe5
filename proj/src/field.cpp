#include "isochron/field.hpp"

namespace isochron {

BivariateRational directional_derivative(const PlanarField &v,
                                         const BivariateRational &f) {
  return f.dx() * v.p + f.dy() * v.q;
}

PlanarField lie_bracket(const PlanarField &x_field,
                        const PlanarField &u_field) {
  return {directional_derivative(x_field, u_field.p) -
              directional_derivative(u_field, x_field.p),
          directional_derivative(x_field, u_field.q) -
              directional_derivative(u_field, x_field.q)};
}

BivariateRational wedge(const PlanarField &x_field,
                        const PlanarField &y_field) {
  return x_field.p * y_field.q - x_field.q * y_field.p;
}

BracketDecomposition bracket_decompose(const PlanarField &x_field,
                                       const PlanarField &u_field) {
  const BivariateRational w = wedge(x_field, u_field);
  if (w.is_zero())
    throw DegeneratePairError(
        "bracket_decompose: fields are everywhere parallel (X wedge U = 0)");
  const PlanarField br = lie_bracket(x_field, u_field);
  return {(wedge(br, u_field) / w).reduced(), (wedge(x_field, br) / w).reduced()};
}

LambdaMu lambda_mu(const PlanarField &y_field, const PlanarField &x0,
                   const PlanarField &u0) {
  const BivariateRational w = wedge(x0, u0);
  if (w.is_zero())
    throw DegeneratePairError(
        "lambda_mu: X0 and U0 are everywhere parallel (X0 wedge U0 = 0)");
  return {(wedge(y_field, u0) / w).reduced(), (wedge(x0, y_field) / w).reduced()};
}

} // namespace isochron
