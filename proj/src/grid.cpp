#include "sinhq/grid.hpp"

#include <stdexcept>
#include <string>

namespace sinhq {

bool is_pow2(int v) { return v > 0 && (v & (v - 1)) == 0; }

Grid2::Grid2(int Nz_, double eps_) : Nz(Nz_), eps(eps_) {
  if (!is_pow2(Nz)) throw std::invalid_argument("Grid2: Nz must be a power of two");
  if (!(eps > 0.0)) throw std::invalid_argument("Grid2: eps must be positive");
}

Grid4::Grid4(int Mx_, double hx_, int Nz_, double eps_)
    : Mx(Mx_), hx(hx_), Nz(Nz_), eps(eps_) {
  if (!is_pow2(Mx) || !is_pow2(Nz))
    throw std::invalid_argument("Grid4: Mx and Nz must be powers of two");
  if (!(hx > 0.0) || !(eps > 0.0))
    throw std::invalid_argument("Grid4: spacings must be positive");
}

PhysicsParams::PhysicsParams(double m_, double alpha_, double lambda_,
                             bool allow_supercritical)
    : m(m_), alpha(alpha_), lambda(lambda_) {
  if (!(m > 0.0)) throw std::invalid_argument("PhysicsParams: m must be positive");
  if (lambda < 0.0) throw std::invalid_argument("PhysicsParams: lambda must be >= 0");
  if (alpha * alpha >= four_pi * four_pi && !allow_supercritical)
    throw std::invalid_argument(
        "PhysicsParams: alpha^2 >= (4 pi)^2; pass allow_supercritical to override");
  beta = alpha / std::sqrt(four_pi);
}

}  // namespace sinhq
