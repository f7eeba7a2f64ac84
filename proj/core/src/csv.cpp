#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <system_error>

#include "delaysafe/scenario.hpp"

namespace delaysafe {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> columns = {
      "t_s",           "x_m",          "y_m",          "theta_rad",
      "v_mps",         "omega_radps",  "v_right_mps",  "v_left_mps",
      "u_right_V",     "u_left_V",     "v_a_mps",      "theta_a_rad",
      "dtheta_a_radps", "theta_s_rad", "z_radps",      "v_s_mps",
      "omega_a_radps", "mu",           "B",            "c",
      "delta_rad",     "beta_rad",     "active",       "overridden",
      "xr_m",          "yr_m",         "theta_r_rad",  "vr_mps",
      "contour_m"};
  return columns;
}

std::string trace_to_csv(const SimTrace& trace) {
  std::string out;
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out += cols[i];
    out += i + 1 < cols.size() ? ',' : '\n';
  }
  for (const auto& s : trace.samples) {
    const double row[] = {s.t,        s.pose.x,     s.pose.y,   s.pose.theta,
                          s.twist.v,  s.twist.omega, s.v_right, s.v_left,
                          s.u_right,  s.u_left,     s.v_a,      s.theta_a,
                          s.dtheta_a, s.theta_s,    s.z,        s.v_s,
                          s.omega_a,  s.mu,         s.b,        s.c,
                          s.delta,    s.beta,       s.active ? 1.0 : 0.0,
                          s.overridden ? 1.0 : 0.0,  s.ref.xr,  s.ref.yr,
                          s.ref.theta_r, s.ref.vr,  s.contour};
    static_assert(std::size(row) == 29);
    for (std::size_t i = 0; i < std::size(row); ++i) {
      out += format_number(row[i]);
      out += i + 1 < std::size(row) ? ',' : '\n';
    }
  }
  return out;
}

void export_csv(const SimTrace& trace, const std::filesystem::path& path) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  const std::string text = trace_to_csv(trace);
  file.write(text.data(), static_cast<std::streamsize>(text.size()));
  file.flush();
  if (!file) throw std::runtime_error("failed writing '" + path.string() + "'");
}

}  // namespace delaysafe
