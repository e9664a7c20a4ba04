#include "landsite/params.hpp"

#include <charconv>
#include <cmath>
#include <functional>

namespace landsite {
namespace {

struct Entry {
  const char* symbol;
  double Params::*field;
  const char* domain;
  const char* description;
  std::function<bool(double)> admissible;
};

bool is_integer(double v) { return std::floor(v) == v; }

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = {
      {"f_s", &Params::f_s, "(0, inf) Hz", "belief update / loop rate", [](double v) { return v > 0; }},
      {"w_f", &Params::w_f, "[0, inf)", "flatness weight", [](double v) { return v >= 0; }},
      {"w_s", &Params::w_s, "[0, inf)", "slope weight", [](double v) { return v >= 0; }},
      {"w_o", &Params::w_o, "[0, inf)", "obstacle proximity weight", [](double v) { return v >= 0; }},
      {"alpha", &Params::alpha, "(0.5, 1)", "temporal persistence", [](double v) { return v > 0.5 && v < 1; }},
      {"b0", &Params::b0, "(0, 1)", "initial belief", [](double v) { return v > 0 && v < 1; }},
      {"tau", &Params::tau, "(0, 1)", "belief threshold", [](double v) { return v > 0 && v < 1; }},
      {"rho_min", &Params::rho_min, "(0, inf) m", "minimum landing radius", [](double v) { return v > 0; }},
      {"lambda", &Params::lambda, "(0, inf)", "servo gain", [](double v) { return v > 0; }},
      {"v_xy_max", &Params::v_xy_max, "(0, inf) m/s", "maximum lateral velocity", [](double v) { return v > 0; }},
      {"v_z_max", &Params::v_z_max, "(0, inf) m/s", "maximum vertical rate", [](double v) { return v > 0; }},
      {"epsilon_L", &Params::epsilon_L, "(0, 1)", "likelihood floor", [](double v) { return v > 0 && v < 1; }},
      {"sigma_f", &Params::sigma_f, "(0, inf) m", "flatness residual normalization", [](double v) { return v > 0; }},
      {"scale_f", &Params::scale_f, "(0, inf)", "flatness likelihood scale", [](double v) { return v > 0; }},
      {"scale_s", &Params::scale_s, "(0, inf) rad", "slope likelihood scale", [](double v) { return v > 0; }},
      {"scale_o", &Params::scale_o, "(0, inf)", "obstacle likelihood scale", [](double v) { return v > 0; }},
      {"d_scale", &Params::d_scale, "(0, inf) m", "obstacle distance scale", [](double v) { return v > 0; }},
      {"min_iou", &Params::min_iou, "(0, 1]", "association IoU gate", [](double v) { return v > 0 && v <= 1; }},
      {"G", &Params::G, "integer >= 0", "frames a lost track or tracker survives", [](double v) { return v >= 0 && is_integer(v); }},
      {"v_des", &Params::v_des, "(0, inf) m/s", "descent rate once aligned", [](double v) { return v > 0; }},
      {"e_align", &Params::e_align, "(0, inf)", "alignment gate on ||e||", [](double v) { return v > 0; }},
      {"T_v", &Params::T_v, "(0, inf) s", "vehicle velocity time constant", [](double v) { return v > 0; }},
      {"h_td", &Params::h_td, "(0, inf) m", "touchdown height", [](double v) { return v > 0; }},
      {"h_blind", &Params::h_blind, "[0, inf) m", "height below which descent is blind", [](double v) { return v >= 0; }},
      {"max_frames", &Params::max_frames, "integer >= 1", "scan-phase frame budget", [](double v) { return v >= 1 && is_integer(v); }},
      {"max_servo_frames", &Params::max_servo_frames, "integer >= 1", "execution-phase frame budget",
       [](double v) { return v >= 1 && is_integer(v); }},
  };
  return entries;
}

const Entry& lookup(std::string_view symbol) {
  for (const auto& e : registry()) {
    if (symbol == e.symbol) return e;
  }
  throw ConfigError(std::string(symbol), "unknown parameter '" + std::string(symbol) + "'");
}

}  // namespace

void Params::set(std::string_view symbol, double value) {
  const Entry& e = lookup(symbol);
  if (!std::isfinite(value) || !e.admissible(value)) {
    throw ConfigError(e.symbol, "parameter " + std::string(e.symbol) + " = " + std::to_string(value) + " outside its domain " +
                                    e.domain);
  }
  this->*e.field = value;
}

double Params::get(std::string_view symbol) const { return this->*lookup(symbol).field; }

void Params::validate() const {
  for (const auto& e : registry()) {
    const double v = this->*e.field;
    if (!std::isfinite(v) || !e.admissible(v)) {
      throw ConfigError(e.symbol, "parameter " + std::string(e.symbol) + " outside its domain " + e.domain);
    }
  }
  if (v_des > v_z_max) throw ConfigError("v_des", "parameter v_des must not exceed v_z_max");
}

const std::vector<Params::Info>& Params::describe() {
  static const std::vector<Info> info = [] {
    std::vector<Info> out;
    for (const auto& e : registry()) out.push_back({e.symbol, e.domain, e.description});
    return out;
  }();
  return info;
}

void apply_overrides(Params& params, const std::vector<std::string>& assignments) {
  for (const auto& a : assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError(a, "override '" + a + "' is not of the form symbol=value");
    const std::string symbol = a.substr(0, eq);
    const std::string text = a.substr(eq + 1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      throw ConfigError(symbol, "override for " + symbol + " has a non-numeric value '" + text + "'");
    }
    params.set(symbol, value);
  }
}

void apply_overrides(Params& params, const std::map<std::string, double>& values) {
  for (const auto& [k, v] : values) params.set(k, v);
}

}  // namespace landsite
