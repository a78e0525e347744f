#include <algorithm>

#include "levylan/stable.hpp"

namespace levylan {

int StableTable::column(int m, int s) {
  if (m == 0 && s == 3) return 12;
  if (m < 0 || m > 3 || s < 0 || s > 2) throw DomainError("StableTable: column out of range");
  return 3 * m + s;
}

double StableTable::node(std::size_t i, int m, int s) const {
  return values_.at(i)[static_cast<std::size_t>(column(m, s))];
}

double StableTable::operator()(double z, int m, int s) const {
  if (!((m <= 3 && s <= 1) || (m == 0 && s == 2)) || m < 0 || s < 0)
    throw DomainError("StableTable: unsupported derivative order");
  const double sign = (z < 0.0 && s % 2 == 1) ? -1.0 : 1.0;
  const double az = std::abs(z);
  if (az >= z_switch_ || az >= z_max_) return sign * (*tail_)(az, m, s);
  const auto it = std::upper_bound(grid_.begin(), grid_.end(), az);
  const std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(1, it - grid_.begin())) - 1;
  const double z0 = grid_[i], h = grid_[i + 1] - z0;
  const double t = (az - z0) / h;
  const auto c = static_cast<std::size_t>(column(m, s));
  const auto d = static_cast<std::size_t>(column(m, s + 1));
  const auto& a = values_[i];
  const auto& b = values_[i + 1];
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  return sign * (h00 * a[c] + h10 * h * a[d] + h01 * b[c] + h11 * h * b[d]);
}

double StableTable::mass() const {
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < grid_.size(); ++i) {
    const double h = grid_[i + 1] - grid_[i];
    sum += 0.5 * h * (values_[i][0] + values_[i + 1][0]) +
           h * h / 12.0 * (values_[i][1] - values_[i + 1][1]);
  }
  return 2.0 * sum + tail_->two_sided_mass(z_max_);
}

StableTable build_stable_table(AlphaIndex alpha, double z_max, int grid_size) {
  if (!(z_max > 1.0) || grid_size < 8) throw DomainError("build_stable_table: need Z_max > 1, G >= 8");
  StableTable t;
  t.alpha_ = alpha;
  t.z_max_ = z_max;
  t.tail_ = stable_tail(alpha);
  t.z_switch_ = t.tail_->switch_point();
  t.c_ = c_alpha(alpha);
  t.dc_ = d_alpha_c_alpha(alpha);

  // Graded nodes on [0, 1], denser toward 0, then geometric on [1, Z_max].
  const int n1 = grid_size / 4;
  const int n2 = grid_size - n1;
  for (int i = 0; i < n1; ++i) t.grid_.push_back(std::pow(double(i) / n1, 1.5));
  const double ratio = std::pow(z_max, 1.0 / n2);
  for (int i = 0; i <= n2; ++i) t.grid_.push_back(i == n2 ? z_max : std::pow(ratio, i));

  t.values_.resize(t.grid_.size());
  for (std::size_t i = 0; i < t.grid_.size(); ++i) {
    const double z = t.grid_[i];
    auto& row = t.values_[i];
    if (z >= t.z_switch_) {
      const auto b = t.tail_->eval(z);
      for (int m = 0; m < 4; ++m)
        for (int s = 0; s < 3; ++s) row[static_cast<std::size_t>(3 * m + s)] = b.v[0][m][s];
      row[12] = b.v[0][0][3];
    } else {
      for (int m = 0; m < 4; ++m)
        for (int s = 0; s < 3; ++s) row[static_cast<std::size_t>(3 * m + s)] = stable_pdf(alpha, z, m, s);
      row[12] = stable_pdf(alpha, z, 0, 3);
    }
    if (!(row[0] > 0.0)) throw NonConvergedQuadrature("stable table: non-positive density node", row[0]);
  }
  return t;
}

}  // namespace levylan
