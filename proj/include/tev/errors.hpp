#pragma once

#include <stdexcept>
#include <string>

namespace tev {

/// Malformed tabular input. Row is 1-based including the header row.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& msg, int row = 0, std::string column = {})
      : std::runtime_error(msg), row_(row), column_(std::move(column)) {}
  int row() const { return row_; }
  const std::string& column() const { return column_; }

 private:
  int row_;
  std::string column_;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// SOC or charger limits broken by a state transition.
class PhysicsViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// No (spec, schedule) pairing passed the feasibility screen.
class FleetError : public std::runtime_error {
 public:
  FleetError(const std::string& msg, std::string model)
      : std::runtime_error(msg), model_(std::move(model)) {}
  const std::string& model() const { return model_; }

 private:
  std::string model_;
};

class MarketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A module error raised inside the time loop, tagged with where it happened.
class SimulationError : public std::runtime_error {
 public:
  SimulationError(const std::string& msg, int hour, int agent_id = -1)
      : std::runtime_error(msg), hour_(hour), agent_id_(agent_id) {}
  int hour() const { return hour_; }
  /// -1 when the failure is not tied to one agent.
  int agent_id() const { return agent_id_; }

 private:
  int hour_;
  int agent_id_;
};

}  // namespace tev
