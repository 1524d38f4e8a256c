#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fluctlat/errors.hpp"

namespace fluctlat {

/// Local function of the window (eta(-R), ..., eta(R)).
///
/// Windows are encoded as binary numbers with eta(-R) as the most significant
/// bit, so site offset y in [-R, R] lives at bit position R - y.
class CylinderFunction {
public:
  CylinderFunction() = default;
  CylinderFunction(int range, std::vector<double> table);

  int range() const noexcept { return range_; }
  int width() const noexcept { return 2 * range_ + 1; }
  const std::vector<double>& table() const noexcept { return table_; }

  double operator()(std::uint32_t window) const { return table_[window]; }

  /// Occupation of offset y in an encoded window.
  static int bit(std::uint32_t window, int range, int y) {
    return static_cast<int>((window >> (range - y)) & 1u);
  }

  /// Expectation under the Bernoulli(alpha) product measure, by enumeration.
  double bernoulli_mean(double alpha) const;

private:
  int range_ = 0;
  std::vector<double> table_{0.0, 0.0};
};

/// Translation-invariant creation/annihilation rate c(x, eta) of range M.
class CylinderRate {
public:
  CylinderRate() = default;
  CylinderRate(std::string name, int range, std::vector<double> table);

  const std::string& name() const noexcept { return name_; }
  int range() const noexcept { return fn_.range(); }
  const std::vector<double>& table() const noexcept { return fn_.table(); }
  const CylinderFunction& function() const noexcept { return fn_; }
  double operator()(std::uint32_t window) const { return fn_(window); }

  bool is_zero() const;
  double max_rate() const;

private:
  std::string name_ = "zero";
  CylinderFunction fn_;
};

/// Builtin families: "constant", "neighbor-sum", "zero". Use "custom" with a table.
CylinderRate build_cylinder_rate(const std::string& name);
CylinderRate build_cylinder_rate(const std::string& name, int range,
                                 const std::vector<double>& table);

struct CreationAnnihilation {
  double creation;
  double annihilation;
};

/// C(alpha) = nu_alpha(c (1 - eta(0))), A(alpha) = nu_alpha(c eta(0)).
CreationAnnihilation macroscopic_rates(const CylinderRate& rate, double alpha);

/// Cached Bernstein form of C and A for fast evaluation inside solvers.
class MacroscopicCoefficients {
public:
  explicit MacroscopicCoefficients(const CylinderRate& rate);

  double creation(double alpha) const { return eval(creation_, alpha); }
  double annihilation(double alpha) const { return eval(annihilation_, alpha); }
  bool creation_vanishes() const noexcept { return creation_zero_; }
  bool annihilation_vanishes() const noexcept { return annihilation_zero_; }

private:
  static double eval(const std::vector<double>& bernstein, double alpha);

  std::vector<double> creation_;
  std::vector<double> annihilation_;
  bool creation_zero_ = true;
  bool annihilation_zero_ = true;
};

template <typename Scalar>
Scalar conductivity(Scalar alpha) {
  if (!(alpha >= Scalar(0) && alpha <= Scalar(1)))
    throw DomainError("conductivity: density outside [0,1]");
  return alpha * (Scalar(1) - alpha);
}

/// Reservoir density beta / (1 + beta).
template <typename Scalar>
Scalar boundary_density(Scalar beta) {
  if (!(beta >= Scalar(0))) throw DomainError("boundary_density: negative intensity");
  return beta / (Scalar(1) + beta);
}

struct AssumptionReport {
  bool l1_ok = false;
  bool l2_ok = false;
  /// Density at which a failed hypothesis was observed; -1 when none.
  double l1_witness = -1.0;
  double l2_witness = -1.0;
  std::string detail;
};

/// Grid test of (L1) concavity/positivity and (L2) monotonicity of A and C.
AssumptionReport check_assumptions(const CylinderRate& rate, int grid_points = 257,
                                   double tol = 1e-12);

}  // namespace fluctlat
