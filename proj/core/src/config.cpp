#include "til/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "til/errors.hpp"
#include "til/riccati.hpp"

namespace til {

namespace {

[[noreturn]] void fail(const std::string& origin, int line, const std::string& msg) {
  throw config_error(origin + ":" + std::to_string(line) + ": " + msg);
}

struct Parser {
  std::string_view text;
  std::size_t pos = 0;
  int line = 1;
  const std::string& origin;

  bool eof() const { return pos >= text.size(); }
  char peek() const { return text[pos]; }
  char take() {
    const char c = text[pos++];
    if (c == '\n') ++line;
    return c;
  }

  void skip_ws_and_comments(bool stop_at_newline) {
    while (!eof()) {
      const char c = peek();
      if (c == '#') {
        while (!eof() && peek() != '\n') ++pos;
      } else if (c == '\n') {
        if (stop_at_newline) return;
        take();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        take();
      } else {
        return;
      }
    }
  }

  std::string parse_bare_key() {
    std::string key;
    while (!eof()) {
      const char c = peek();
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
          c == '.') {
        key += take();
      } else {
        break;
      }
    }
    if (key.empty()) fail(origin, line, "expected a key");
    return key;
  }

  // Top-level values must start on the key's line; arrays may span lines.
  ConfigValue parse_value(bool top_level = false) {
    skip_ws_and_comments(top_level);
    if (eof() || (top_level && peek() == '\n')) {
      fail(origin, line, "expected a value");
    }
    ConfigValue v;
    v.line = line;
    const char c = peek();
    if (c == '[') {
      take();
      v.kind = ConfigValue::Kind::array;
      skip_ws_and_comments(false);
      while (!eof() && peek() != ']') {
        v.array_v.push_back(parse_value());
        skip_ws_and_comments(false);
        if (!eof() && peek() == ',') {
          take();
          skip_ws_and_comments(false);
        }
      }
      if (eof()) fail(origin, v.line, "unterminated array");
      take();  // ']'
      return v;
    }
    if (c == '"') {
      take();
      v.kind = ConfigValue::Kind::string;
      while (!eof() && peek() != '"') {
        if (peek() == '\n') fail(origin, v.line, "unterminated string");
        v.string_v += take();
      }
      if (eof()) fail(origin, v.line, "unterminated string");
      take();
      return v;
    }
    std::string token;
    while (!eof()) {
      const char t = peek();
      if (t == ',' || t == ']' || t == '#' || t == '\n' ||
          std::isspace(static_cast<unsigned char>(t))) {
        break;
      }
      token += take();
    }
    if (token == "true" || token == "false") {
      v.kind = ConfigValue::Kind::boolean;
      v.bool_v = token == "true";
      return v;
    }
    if (token.find_first_of(".eEinfa") == std::string::npos) {
      std::int64_t iv = 0;
      const auto [p, ec] = std::from_chars(token.data(), token.data() + token.size(), iv);
      if (ec == std::errc() && p == token.data() + token.size()) {
        v.kind = ConfigValue::Kind::integer;
        v.int_v = iv;
        v.real_v = static_cast<double>(iv);
        return v;
      }
    }
    try {
      std::size_t used = 0;
      const double rv = std::stod(token, &used);
      if (used == token.size()) {
        v.kind = ConfigValue::Kind::real;
        v.real_v = rv;
        return v;
      }
    } catch (...) {
    }
    fail(origin, v.line, "cannot parse value '" + token + "'");
  }
};

}  // namespace

double ConfigValue::as_real(const std::string& what) const {
  if (kind == Kind::real || kind == Kind::integer) return real_v;
  throw config_error(what + " (line " + std::to_string(line) + ") must be a number");
}

std::int64_t ConfigValue::as_int(const std::string& what) const {
  if (kind == Kind::integer) return int_v;
  throw config_error(what + " (line " + std::to_string(line) + ") must be an integer");
}

std::uint64_t ConfigValue::as_uint(const std::string& what) const {
  if (kind == Kind::integer && int_v >= 0) return static_cast<std::uint64_t>(int_v);
  throw config_error(what + " (line " + std::to_string(line) +
                     ") must be a nonnegative integer");
}

bool ConfigValue::as_bool(const std::string& what) const {
  if (kind == Kind::boolean) return bool_v;
  throw config_error(what + " (line " + std::to_string(line) + ") must be true or false");
}

const std::string& ConfigValue::as_string(const std::string& what) const {
  if (kind == Kind::string) return string_v;
  throw config_error(what + " (line " + std::to_string(line) + ") must be a string");
}

const std::vector<ConfigValue>& ConfigValue::as_array(const std::string& what) const {
  if (kind == Kind::array) return array_v;
  throw config_error(what + " (line " + std::to_string(line) + ") must be an array");
}

Eigen::VectorXd ConfigValue::as_vector(const std::string& what) const {
  if (kind != Kind::array) {
    Eigen::VectorXd v(1);
    v[0] = as_real(what);
    return v;
  }
  Eigen::VectorXd v(static_cast<int>(array_v.size()));
  for (std::size_t i = 0; i < array_v.size(); ++i) {
    v[static_cast<int>(i)] = array_v[i].as_real(what + "[" + std::to_string(i) + "]");
  }
  return v;
}

Eigen::MatrixXd ConfigValue::as_matrix(const std::string& what) const {
  if (kind != Kind::array) {
    Eigen::MatrixXd m(1, 1);
    m(0, 0) = as_real(what);
    return m;
  }
  if (array_v.empty()) throw config_error(what + " matrix must not be empty");
  if (array_v[0].kind != Kind::array) {
    // flat array: interpret as a diagonal-free 1 x k row only when k == 1
    if (array_v.size() == 1) {
      Eigen::MatrixXd m(1, 1);
      m(0, 0) = array_v[0].as_real(what);
      return m;
    }
    throw config_error(what + " (line " + std::to_string(line) +
                       ") must be a row-major list of rows");
  }
  const int rows = static_cast<int>(array_v.size());
  const int cols = static_cast<int>(array_v[0].array_v.size());
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const auto& row = array_v[r].as_array(what + " row " + std::to_string(r));
    if (static_cast<int>(row.size()) != cols) {
      throw config_error(what + " row " + std::to_string(r) + " has " +
                         std::to_string(row.size()) + " entries, expected " +
                         std::to_string(cols));
    }
    for (int c = 0; c < cols; ++c) {
      m(r, c) = row[c].as_real(what + "(" + std::to_string(r) + "," + std::to_string(c) +
                               ")");
    }
  }
  return m;
}

const ConfigValue& ConfigSection::at(const std::string& key) const {
  const auto it = values.find(key);
  if (it == values.end()) {
    throw config_error("missing key '" + key + "' in section [" + name + "]");
  }
  return it->second;
}

double ConfigSection::real(const std::string& key) const {
  return at(key).as_real("[" + name + "]." + key);
}
double ConfigSection::real_or(const std::string& key, double fallback) const {
  return has(key) ? real(key) : fallback;
}
std::int64_t ConfigSection::integer(const std::string& key) const {
  return at(key).as_int("[" + name + "]." + key);
}
std::int64_t ConfigSection::integer_or(const std::string& key, std::int64_t fallback) const {
  return has(key) ? integer(key) : fallback;
}
std::uint64_t ConfigSection::uint_or(const std::string& key, std::uint64_t fallback) const {
  return has(key) ? at(key).as_uint("[" + name + "]." + key) : fallback;
}
bool ConfigSection::bool_or(const std::string& key, bool fallback) const {
  return has(key) ? at(key).as_bool("[" + name + "]." + key) : fallback;
}
std::string ConfigSection::str(const std::string& key) const {
  return at(key).as_string("[" + name + "]." + key);
}
std::string ConfigSection::str_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? str(key) : fallback;
}
Eigen::VectorXd ConfigSection::vector(const std::string& key) const {
  return at(key).as_vector("[" + name + "]." + key);
}
Eigen::MatrixXd ConfigSection::matrix(const std::string& key) const {
  return at(key).as_matrix("[" + name + "]." + key);
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

Config Config::parse(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.text_ = text;
  cfg.origin_ = origin;

  Parser p{text, 0, 1, origin};
  std::string current;
  while (true) {
    p.skip_ws_and_comments(false);
    if (p.eof()) break;
    if (p.peek() == '[') {
      p.take();
      std::string name = p.parse_bare_key();
      p.skip_ws_and_comments(true);
      if (p.eof() || p.peek() != ']') fail(origin, p.line, "expected ']'");
      p.take();
      current = name;
      cfg.sections_[current].name = current;
      continue;
    }
    const int key_line = p.line;
    std::string key = p.parse_bare_key();
    p.skip_ws_and_comments(true);
    if (p.eof() || p.peek() != '=') fail(origin, key_line, "expected '=' after '" + key + "'");
    p.take();
    ConfigValue value = p.parse_value(true);
    if (current.empty()) {
      fail(origin, key_line, "key '" + key + "' outside of any [section]");
    }
    cfg.sections_[current].values[key] = std::move(value);
  }
  return cfg;
}

const ConfigSection& Config::at(const std::string& section) const {
  const auto it = sections_.find(section);
  if (it == sections_.end()) {
    throw config_error(origin_ + ": missing section [" + section + "]");
  }
  return it->second;
}

MarketModel load_model(const Config& cfg) {
  const ConfigSection& s = cfg.at("model");
  const std::string kind = s.str("kind");
  const double gamma = s.real_or("gamma", 1.0);
  const double rho = s.real_or("rho", 1.0);
  if (kind == "ou_linear" || kind == "ou_custom") {
    OUParams ou;
    ou.lambda = s.real("lambda");
    ou.eta = s.real("eta");
    ou.sigma = s.real("sigma");
    ou.nu = kind == "ou_linear" ? linear_signal() : signal_by_name(s.str("nu"));
    return MarketModel::ou(ou, gamma, rho);
  }
  if (kind == "matrix_constant") {
    return MarketModel::constant(s.vector("mu"), s.matrix("Sigma"), gamma, rho);
  }
  throw config_error("[model].kind must be ou_linear | ou_custom | matrix_constant, got '" +
                     kind + "'");
}

Eigen::VectorXd load_y0(const Config& cfg, const MarketModel& model) {
  const ConfigSection& s = cfg.at("model");
  if (s.has("y0")) {
    Eigen::VectorXd y0 = s.vector("y0");
    if (y0.size() != model.state_dim()) {
      throw config_error("[model].y0 must have n + m = " +
                         std::to_string(model.state_dim()) + " entries");
    }
    return y0;
  }
  return Eigen::VectorXd::Zero(model.state_dim());
}

FrictionSpec load_frictions(const Config& cfg, int n) {
  const ConfigSection& s = cfg.at("frictions");
  Eigen::MatrixXd lambda = s.matrix("Lambda");
  Eigen::MatrixXd c = s.matrix("C");
  if (lambda.rows() != n || c.rows() != n) {
    throw config_error("[frictions] matrices must be " + std::to_string(n) + "x" +
                       std::to_string(n));
  }
  return FrictionSpec(std::move(lambda), std::move(c), s.real("R"), s.real("eps"));
}

SimConfig load_sim(const Config& cfg) {
  const ConfigSection& s = cfg.at("sim");
  SimConfig sim;
  sim.dt = s.real("dt");
  sim.horizon = s.real("horizon");
  sim.paths = s.integer("paths");
  sim.seed = s.uint_or("seed", 1);
  sim.stiffness_guard = s.bool_or("stiffness_guard", true);
  sim.allow_short_horizon = s.bool_or("allow_short_horizon", false);
  return sim;
}

InitState load_init(const Config& cfg, const MarketModel& model) {
  const ConfigSection& s = cfg.at("sim");
  InitState init;
  init.y0 = load_y0(cfg, model);
  init.d0 = s.has("d0") ? s.vector("d0") : Eigen::VectorXd::Zero(model.n());
  if (s.has("h0") && s.at("h0").kind == ConfigValue::Kind::string) {
    if (s.str("h0") != "merton") {
      throw config_error("[sim].h0 must be a vector or the string \"merton\"");
    }
    init.h0 = merton_portfolio(model, init.y0);
  } else {
    init.h0 = s.has("h0") ? s.vector("h0") : merton_portfolio(model, init.y0);
  }
  if (init.d0.size() != model.n() || init.h0.size() != model.n()) {
    throw config_error("[sim].d0 and h0 must have n = " + std::to_string(model.n()) +
                       " entries");
  }
  return init;
}

PolicyKind policy_kind_from_string(const std::string& name) {
  if (name == "asymptotic") return PolicyKind::asymptotic;
  if (name == "constant_coeff") return PolicyKind::constant_coeff;
  if (name == "temporary_only") return PolicyKind::temporary_only;
  if (name == "zero") return PolicyKind::zero;
  throw config_error("unknown policy kind '" + name +
                     "' (asymptotic | constant_coeff | temporary_only | zero)");
}

PolicySpec load_policy(const Config& cfg, const MarketModel& model,
                       const FrictionSpec& frictions) {
  const std::string kind_str =
      cfg.has("policy") ? cfg.at("policy").str_or("kind", "asymptotic") : "asymptotic";
  const PolicyKind kind = policy_kind_from_string(kind_str);
  switch (kind) {
    case PolicyKind::zero:
      return PolicySpec::zero(model.n());
    case PolicyKind::constant_coeff: {
      Eigen::MatrixXd alpha = cfg.at("policy").matrix("alpha");
      return PolicySpec::constant_coeff(alpha, frictions);
    }
    case PolicyKind::asymptotic:
    case PolicyKind::temporary_only: {
      const Eigen::VectorXd y0 = load_y0(cfg, model);
      RiccatiSolution sol = solve_maximal(build_problem(model, frictions, y0));
      return kind == PolicyKind::asymptotic ? PolicySpec::asymptotic(std::move(sol))
                                            : PolicySpec::temporary_only(std::move(sol));
    }
  }
  throw config_error("unreachable policy kind");
}

SweepPlan load_plan(const Config& cfg, const MarketModel& model) {
  const ConfigSection& s = cfg.at("sweep");
  SweepPlan plan;
  const Eigen::VectorXd grid = s.vector("eps_grid");
  plan.eps_grid.assign(grid.data(), grid.data() + grid.size());
  plan.dt_over_eps = s.real("dt_over_eps");
  plan.paths = s.integer("paths");
  plan.seed = s.uint_or("seed", 1);
  plan.horizon = s.real_or("horizon", 0.0);
  plan.mode = s.str_or("mode", "expansion");
  if (plan.mode != "expansion" && plan.mode != "ranking" && plan.mode != "field") {
    throw config_error("[sweep].mode must be expansion | ranking | field");
  }
  plan.y0 = load_y0(cfg, model);
  plan.d_rescaled = s.has("d_rescaled") ? s.vector("d_rescaled") : Eigen::VectorXd::Zero(model.n());
  if (s.has("h0") && s.at("h0").kind == ConfigValue::Kind::string) {
    if (s.str("h0") != "merton") {
      throw config_error("[sweep].h0 must be a vector or the string \"merton\"");
    }
    plan.h0_at_merton = true;
    plan.h0 = Eigen::VectorXd::Zero(model.n());
  } else if (s.has("h0")) {
    plan.h0 = s.vector("h0");
  } else {
    plan.h0_at_merton = true;
    plan.h0 = Eigen::VectorXd::Zero(model.n());
  }

  if (!s.has("policies")) {
    plan.policies.push_back(SweepPolicy{PolicyKind::asymptotic, {}});
  } else {
    for (const auto& entry :
         s.at("policies").as_array("[sweep].policies")) {
      SweepPolicy sp;
      sp.kind = policy_kind_from_string(entry.as_string("[sweep].policies[]"));
      if (sp.kind == PolicyKind::constant_coeff) {
        sp.alpha = s.matrix("alpha");
      }
      plan.policies.push_back(std::move(sp));
    }
  }
  return plan;
}

}  // namespace til
