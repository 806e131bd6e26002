#include <cmath>
#include <complex>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "lss/oracle.hpp"

namespace lss::oracle {

namespace {

constexpr double kTolerance = 1e-13;

// int_a^b h(x) sqrt((b - x)(x - a)) dx. The two-argument functor form gives
// the signed distance to the nearer endpoint, which keeps the square root
// accurate right at the edges.
template <class F>
double integrate_against_semicircle(F&& h, double a, double b) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  auto f = [&](double x, double xc) {
    double below;  // x - a
    double above;  // b - x
    if (xc <= 0.0) {
      below = -xc;
      above = b - x;
    } else {
      below = x - a;
      above = xc;
    }
    return h(x) * std::sqrt(std::max(0.0, below) * std::max(0.0, above));
  };
  return integrator.integrate(f, a, b, kTolerance);
}

}  // namespace

double mean_correction_numeric(LssFunction g, AspectRatio c) {
  const auto [a, b] = mp_support(c);
  const double norm = 1.0 / (2.0 * std::numbers::pi * c.value());
  return norm * integrate_against_semicircle([&](double z) { return evaluate(g, z) / z; }, a, b);
}

double mp_moment_numeric(int k, AspectRatio c) {
  if (k < 1 || k > 8) throw std::invalid_argument("mp_moment_numeric supports 1 <= k <= 8");
  const auto [a, b] = mp_support(c);
  const double norm = 1.0 / (2.0 * std::numbers::pi * c.value());
  return norm * integrate_against_semicircle([&](double x) { return std::pow(x, k - 1); }, a, b);
}

double mp_mass_numeric(AspectRatio c) {
  const auto [a, b] = mp_support(c);
  const double norm = 1.0 / (2.0 * std::numbers::pi * c.value());
  return norm * integrate_against_semicircle([](double x) { return 1.0 / x; }, a, b);
}

std::complex<double> companion_stieltjes_numeric(std::complex<double> z, AspectRatio c) {
  if (z.imag() == 0.0) {
    throw std::invalid_argument("companion_stieltjes_numeric: z must be off the real axis");
  }
  const auto [a, b] = mp_support(c);
  const double norm = 1.0 / (2.0 * std::numbers::pi * c.value());
  // m_F(z) = int f(x) / (x - z) dx - mass0 / z
  const double re = integrate_against_semicircle(
      [&](double x) { return (1.0 / (x - z)).real() / x; }, a, b);
  const double im = integrate_against_semicircle(
      [&](double x) { return (1.0 / (x - z)).imag() / x; }, a, b);
  const double mass0 = std::max(0.0, 1.0 - 1.0 / c.value());
  const std::complex<double> m_f = norm * std::complex<double>(re, im) - mass0 / z;
  return -(1.0 - c.value()) / z + c.value() * m_f;
}

}  // namespace lss::oracle
