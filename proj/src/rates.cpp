#include "fluctlat/rates.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

namespace fluctlat {

namespace {

std::size_t table_size(int range) {
  if (range < 0 || range > 7) throw ShapeError("cylinder range must lie in [0,7]");
  return std::size_t{1} << (2 * range + 1);
}

}  // namespace

CylinderFunction::CylinderFunction(int range, std::vector<double> table)
    : range_(range), table_(std::move(table)) {
  if (table_.size() != table_size(range))
    throw ShapeError("cylinder table must have 2^(2M+1) = " +
                     std::to_string(table_size(range)) + " entries, got " +
                     std::to_string(table_.size()));
  for (double v : table_)
    if (!std::isfinite(v)) throw ValidationError("cylinder table entry is not finite");
}

double CylinderFunction::bernoulli_mean(double alpha) const {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw DomainError("bernoulli_mean: density outside [0,1]");
  const int n = width();
  double mean = 0.0;
  for (std::uint32_t w = 0; w < table_.size(); ++w) {
    if (table_[w] == 0.0) continue;
    const int ones = std::popcount(w);
    mean += table_[w] * std::pow(alpha, ones) * std::pow(1.0 - alpha, n - ones);
  }
  return mean;
}

CylinderRate::CylinderRate(std::string name, int range, std::vector<double> table)
    : name_(std::move(name)), fn_(range, std::move(table)) {
  for (double v : fn_.table())
    if (v < 0.0) throw ValidationError("rate table entries must be nonnegative");
}

bool CylinderRate::is_zero() const {
  return std::all_of(table().begin(), table().end(), [](double v) { return v == 0.0; });
}

double CylinderRate::max_rate() const {
  return *std::max_element(table().begin(), table().end());
}

CylinderRate build_cylinder_rate(const std::string& name) {
  if (name == "constant") return CylinderRate(name, 0, {1.0, 1.0});
  if (name == "zero") return CylinderRate(name, 0, {0.0, 0.0});
  if (name == "neighbor-sum") {
    std::vector<double> table(8);
    for (std::uint32_t w = 0; w < 8; ++w)
      table[w] = CylinderFunction::bit(w, 1, -1) + CylinderFunction::bit(w, 1, 1);
    return CylinderRate(name, 1, std::move(table));
  }
  if (name == "custom") throw ValidationError("custom rate requires a table");
  throw ValidationError("unknown rate family '" + name + "'");
}

CylinderRate build_cylinder_rate(const std::string& name, int range,
                                 const std::vector<double>& table) {
  if (name != "custom") {
    CylinderRate builtin = build_cylinder_rate(name);
    if (!table.empty() && table != builtin.table())
      throw ValidationError("builtin family '" + name + "' does not take a table");
    return builtin;
  }
  return CylinderRate(name, range, table);
}

CreationAnnihilation macroscopic_rates(const CylinderRate& rate, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw DomainError("macroscopic_rates: density outside [0,1]");
  const int m = rate.range();
  const int n = 2 * m + 1;
  CreationAnnihilation out{0.0, 0.0};
  for (std::uint32_t w = 0; w < rate.table().size(); ++w) {
    const double c = rate(w);
    if (c == 0.0) continue;
    const int ones = std::popcount(w);
    const double weight = std::pow(alpha, ones) * std::pow(1.0 - alpha, n - ones);
    if (CylinderFunction::bit(w, m, 0))
      out.annihilation += weight * c;
    else
      out.creation += weight * c;
  }
  return out;
}

MacroscopicCoefficients::MacroscopicCoefficients(const CylinderRate& rate) {
  const int m = rate.range();
  const int n = 2 * m + 1;
  creation_.assign(n + 1, 0.0);
  annihilation_.assign(n + 1, 0.0);
  for (std::uint32_t w = 0; w < rate.table().size(); ++w) {
    const int ones = std::popcount(w);
    if (CylinderFunction::bit(w, m, 0))
      annihilation_[ones] += rate(w);
    else
      creation_[ones] += rate(w);
  }
  creation_zero_ = std::all_of(creation_.begin(), creation_.end(), [](double v) { return v == 0.0; });
  annihilation_zero_ =
      std::all_of(annihilation_.begin(), annihilation_.end(), [](double v) { return v == 0.0; });
}

double MacroscopicCoefficients::eval(const std::vector<double>& bernstein, double alpha) {
  const int n = static_cast<int>(bernstein.size()) - 1;
  double s = 0.0;
  for (int k = 0; k <= n; ++k)
    if (bernstein[k] != 0.0) s += bernstein[k] * std::pow(alpha, k) * std::pow(1.0 - alpha, n - k);
  return s;
}

namespace {

struct L1Result {
  bool ok = true;
  double witness = -1.0;
  std::string why;
};

L1Result check_concave_positive(const std::vector<double>& alpha, const std::vector<double>& v,
                                double tol, const char* label) {
  const double scale = std::max(1.0, *std::max_element(v.begin(), v.end()));
  if (std::all_of(v.begin(), v.end(), [&](double x) { return std::abs(x) <= tol * scale; }))
    return {};
  const std::size_t n = v.size();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(v[i] > tol * scale))
      return {false, alpha[i], std::string(label) + " not positive on ]0,1["};
    if (v[i + 1] - 2.0 * v[i] + v[i - 1] > tol * scale)
      return {false, alpha[i], std::string(label) + " not concave"};
  }
  return {};
}

}  // namespace

AssumptionReport check_assumptions(const CylinderRate& rate, int grid_points, double tol) {
  if (grid_points < 3) throw DomainError("check_assumptions needs at least 3 grid points");
  std::vector<double> alpha(grid_points), c(grid_points), a(grid_points);
  for (int i = 0; i < grid_points; ++i) {
    alpha[i] = static_cast<double>(i) / (grid_points - 1);
    const auto ca = macroscopic_rates(rate, alpha[i]);
    c[i] = ca.creation;
    a[i] = ca.annihilation;
  }

  AssumptionReport report;
  std::ostringstream detail;

  const L1Result l1c = check_concave_positive(alpha, c, tol, "C");
  const L1Result l1a = check_concave_positive(alpha, a, tol, "A");
  report.l1_ok = l1c.ok && l1a.ok;
  if (!l1c.ok) {
    report.l1_witness = l1c.witness;
    detail << l1c.why << " at alpha=" << l1c.witness << "; ";
  } else if (!l1a.ok) {
    report.l1_witness = l1a.witness;
    detail << l1a.why << " at alpha=" << l1a.witness << "; ";
  }

  const double scale = std::max(1.0, rate.max_rate());
  report.l2_ok = true;
  for (int i = 0; i + 1 < grid_points && report.l2_ok; ++i) {
    if (c[i + 1] - c[i] > tol * scale) {
      report.l2_ok = false;
      report.l2_witness = alpha[i];
      detail << "C increasing at alpha=" << alpha[i] << "; ";
    } else if (a[i + 1] - a[i] < -tol * scale) {
      report.l2_ok = false;
      report.l2_witness = alpha[i];
      detail << "A decreasing at alpha=" << alpha[i] << "; ";
    }
  }
  report.detail = detail.str();
  return report;
}

}  // namespace fluctlat
