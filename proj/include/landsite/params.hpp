#pragma once

// Run parameters. Names follow the experiment-table symbols (alpha, tau,
// rho_min, ...) so a config maps one-to-one onto them.

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace landsite {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string symbol, const std::string& message)
      : std::runtime_error(message), symbol_(std::move(symbol)) {}
  const std::string& symbol() const { return symbol_; }

 private:
  std::string symbol_;
};

struct Params {
  // Experiment table.
  double f_s = 10.0;       // Hz
  double w_f = 0.4;
  double w_s = 0.2;
  double w_o = 0.4;
  double alpha = 0.95;
  double b0 = 0.5;
  double tau = 0.75;
  double rho_min = 0.55;   // m
  double lambda = 0.8;
  double v_xy_max = 0.25;  // m/s
  double v_z_max = 0.30;   // m/s

  // Model and simulator settings.
  double epsilon_L = 0.05;
  double sigma_f = 0.02;   // m, flatness normalization
  double scale_f = 1.0;
  double scale_s = 0.15;   // rad
  double scale_o = 0.5;
  double d_scale = 0.5;    // m
  double min_iou = 0.3;
  double G = 5;            // frames a lost track / lost tracker survives
  double v_des = 0.2;      // m/s
  double e_align = 0.05;
  double T_v = 0.5;        // s
  double h_td = 0.05;      // m
  double h_blind = 0.4;    // m
  double max_frames = 400;
  double max_servo_frames = 1500;

  /// Sets one parameter by symbol; throws ConfigError naming the symbol and
  /// its domain when the name is unknown or the value is out of domain.
  void set(std::string_view symbol, double value);
  double get(std::string_view symbol) const;
  void validate() const;

  struct Info {
    std::string symbol;
    std::string domain;
    std::string description;
  };
  static const std::vector<Info>& describe();
};

/// Applies "symbol=value" strings in order.
void apply_overrides(Params& params, const std::vector<std::string>& assignments);
void apply_overrides(Params& params, const std::map<std::string, double>& values);

}  // namespace landsite
