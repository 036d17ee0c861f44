#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "til/market_model.hpp"
#include "til/policy.hpp"
#include "til/simulator.hpp"
#include "til/sweep.hpp"

namespace til {

// Sectioned key-value configuration (a TOML subset: [section], key = value,
// numbers, booleans, quoted strings, flat and nested arrays; # comments).
// Matrices are row-major lists of rows. All diagnostics carry line numbers.
class ConfigValue {
 public:
  enum class Kind { boolean, integer, real, string, array };

  Kind kind = Kind::real;
  bool bool_v = false;
  std::int64_t int_v = 0;
  double real_v = 0.0;
  std::string string_v;
  std::vector<ConfigValue> array_v;
  int line = 0;

  double as_real(const std::string& what) const;
  std::int64_t as_int(const std::string& what) const;
  std::uint64_t as_uint(const std::string& what) const;
  bool as_bool(const std::string& what) const;
  const std::string& as_string(const std::string& what) const;
  const std::vector<ConfigValue>& as_array(const std::string& what) const;

  Eigen::VectorXd as_vector(const std::string& what) const;
  Eigen::MatrixXd as_matrix(const std::string& what) const;
};

class ConfigSection {
 public:
  std::string name;
  std::map<std::string, ConfigValue> values;

  bool has(const std::string& key) const { return values.count(key) > 0; }
  const ConfigValue& at(const std::string& key) const;

  double real(const std::string& key) const;
  double real_or(const std::string& key, double fallback) const;
  std::int64_t integer(const std::string& key) const;
  std::int64_t integer_or(const std::string& key, std::int64_t fallback) const;
  std::uint64_t uint_or(const std::string& key, std::uint64_t fallback) const;
  bool bool_or(const std::string& key, bool fallback) const;
  std::string str(const std::string& key) const;
  std::string str_or(const std::string& key, const std::string& fallback) const;
  Eigen::VectorXd vector(const std::string& key) const;
  Eigen::MatrixXd matrix(const std::string& key) const;
};

class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse(const std::string& text, const std::string& origin);

  bool has(const std::string& section) const { return sections_.count(section) > 0; }
  const ConfigSection& at(const std::string& section) const;
  const std::string& text() const { return text_; }
  const std::string& origin() const { return origin_; }

 private:
  std::map<std::string, ConfigSection> sections_;
  std::string text_;
  std::string origin_;
};

// Loaders from the shared dialect into domain objects.
MarketModel load_model(const Config& cfg);
Eigen::VectorXd load_y0(const Config& cfg, const MarketModel& model);
FrictionSpec load_frictions(const Config& cfg, int n);
SimConfig load_sim(const Config& cfg);
InitState load_init(const Config& cfg, const MarketModel& model);
PolicySpec load_policy(const Config& cfg, const MarketModel& model,
                       const FrictionSpec& frictions);
SweepPlan load_plan(const Config& cfg, const MarketModel& model);

PolicyKind policy_kind_from_string(const std::string& name);

}  // namespace til
