#pragma once

// Run configuration files: one `key = value` pair per line, `#` starts a
// comment, blank lines are ignored. Keys are dotted paths:
//
//   photons = 10000
//   seed = 42
//   f_s = 0.1
//   f_d = 0.05
//   f_b = 0.05
//   abort_threshold = 0.05
//   multiphoton_tolerance = 0
//   P0 = 0.5
//   bob_self_measures = false
//   noise.p = 0.0
//   noise.loss = 0.0
//   attack.leg = E2
//   attack.kind = intercept_resend      # none | intercept_resend | trojan | collective
//   attack.params = basis:random        # comma-separated name:value list
//   sweep.kind = imax_vs_D              # imax_vs_D | holevo_vs_geometry
//   sweep.grid = 0:0.5:0.1              # start:stop:step or a comma list
//   sweep.family = presets
//   sweep.weight_x = 0.5
//
// Attack parameters by kind:
//   intercept_resend  basis:{z,x,random}
//   trojan            k:<count>, probe:{0,1,+,-}
//   collective        F:<fidelity>, geometry:{orthonormal,basis_copy,phase_covariant}

#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qsdc/analysis.hpp"
#include "qsdc/channel.hpp"
#include "qsdc/protocol.hpp"

namespace qsdc {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, const std::string& what)
      : std::runtime_error(key.empty() ? what : key + ": " + what), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

enum class SweepKind { ImaxVsD, HolevoVsGeometry };

inline std::string_view sweep_kind_name(SweepKind k) {
  return k == SweepKind::ImaxVsD ? "imax_vs_D" : "holevo_vs_geometry";
}

struct SweepSpec {
  SweepKind kind = SweepKind::ImaxVsD;
  std::vector<double> grid;
  AttackFamily family = AttackFamily::Presets;
  double weight_x = 0.5;
};

struct RunConfig {
  ProtocolConfig protocol;
  std::optional<SweepSpec> sweep;
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double to_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc{} || p != v.data() + v.size() || !std::isfinite(x)) {
    throw ConfigError(key, "expected a number, got '" + v + "'");
  }
  return x;
}

inline std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc{} || p != v.data() + v.size()) {
    throw ConfigError(key, "expected a non-negative integer, got '" + v + "'");
  }
  return x;
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key, "expected true or false, got '" + v + "'");
}

inline double unit_range(const std::string& key, double x, bool open_top = false) {
  if (x < 0.0 || x > 1.0 || (open_top && x >= 1.0)) {
    throw ConfigError(key, "value " + trim(std::to_string(x)) + " is out of range " +
                               (open_top ? "[0, 1)" : "[0, 1]"));
  }
  return x;
}

}  // namespace detail

// "start:stop:step" (inclusive) or "a,b,c".
inline std::vector<double> parse_grid(const std::string& key, const std::string& text) {
  std::vector<double> grid;
  if (text.empty()) throw ConfigError(key, "grid is empty");
  if (text.find(':') != std::string::npos) {
    const auto parts = detail::split(text, ':');
    if (parts.size() != 3) throw ConfigError(key, "range grid must be start:stop:step");
    const double a = detail::to_double(key, parts[0]);
    const double b = detail::to_double(key, parts[1]);
    const double step = detail::to_double(key, parts[2]);
    if (!(step > 0.0)) throw ConfigError(key, "grid step must be positive");
    if (b < a) throw ConfigError(key, "grid stop is below start");
    const auto count = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) grid.push_back(a + static_cast<double>(i) * step);
  } else {
    for (const auto& p : detail::split(text, ',')) {
      if (p.empty()) throw ConfigError(key, "empty grid entry");
      grid.push_back(detail::to_double(key, p));
    }
  }
  if (grid.empty()) throw ConfigError(key, "grid is empty");
  return grid;
}

inline LegAttack parse_attack(const std::string& kind, const std::string& params_text) {
  std::map<std::string, std::string> params;
  if (!params_text.empty()) {
    for (const auto& item : detail::split(params_text, ',')) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) throw ConfigError("attack.params", "expected name:value, got '" + item + "'");
      params[detail::trim(item.substr(0, colon))] = detail::trim(item.substr(colon + 1));
    }
  }
  auto take = [&](const std::string& name, const std::string& fallback) {
    const auto it = params.find(name);
    if (it == params.end()) return fallback;
    std::string v = it->second;
    params.erase(it);
    return v;
  };
  auto finish = [&](LegAttack a) {
    if (!params.empty()) {
      throw ConfigError("attack.params", "unknown parameter '" + params.begin()->first + "' for " + kind);
    }
    return a;
  };

  if (kind == "none") return finish(NoAttack{});
  if (kind == "intercept_resend") {
    const std::string b = take("basis", "random");
    BasisPolicy p;
    if (b == "z") {
      p = BasisPolicy::AlwaysZ;
    } else if (b == "x") {
      p = BasisPolicy::AlwaysX;
    } else if (b == "random") {
      p = BasisPolicy::Random;
    } else {
      throw ConfigError("attack.params.basis", "expected z, x or random, got '" + b + "'");
    }
    return finish(InterceptResend{p});
  }
  if (kind == "trojan") {
    const auto k = detail::to_uint("attack.params.k", take("k", "1"));
    if (k == 0) throw ConfigError("attack.params.k", "must be >= 1");
    const std::string probe = take("probe", "0");
    PureState s;
    if (probe == "0") {
      s = PureState::zero();
    } else if (probe == "1") {
      s = PureState::one();
    } else if (probe == "+") {
      s = PureState::plus_x();
    } else if (probe == "-") {
      s = PureState::minus_x();
    } else {
      throw ConfigError("attack.params.probe", "expected 0, 1, + or -, got '" + probe + "'");
    }
    return finish(TrojanInject{static_cast<std::size_t>(k), s});
  }
  if (kind == "collective") {
    const double f = detail::unit_range("attack.params.F", detail::to_double("attack.params.F", take("F", "1")));
    const std::string g = take("geometry", "phase_covariant");
    const auto geom = parse_geometry(g);
    if (!geom) throw ConfigError("attack.params.geometry", "unknown geometry '" + g + "'");
    return finish(CollectiveAttack{CollectiveParams::preset(*geom, f)});
  }
  throw ConfigError("attack.kind", "unknown attack kind '" + kind + "'");
}

inline RunConfig parse_config_text(std::string_view text) {
  RunConfig rc;
  ProtocolConfig& c = rc.protocol;
  std::map<std::string, std::string> kv;

  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("", "line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("", "line " + std::to_string(lineno) + ": empty key");
    if (!kv.emplace(key, value).second) throw ConfigError(key, "duplicate key");
  }

  std::optional<std::string> attack_leg, attack_kind, attack_params;
  std::optional<std::string> sweep_kind, sweep_grid, sweep_family, sweep_weight;
  for (const auto& [key, v] : kv) {
    if (key == "photons") {
      c.photons = static_cast<std::size_t>(detail::to_uint(key, v));
      if (c.photons == 0) throw ConfigError(key, "must be >= 1");
    } else if (key == "seed") {
      c.seed = detail::to_uint(key, v);
    } else if (key == "f_s") {
      c.f_s = detail::unit_range(key, detail::to_double(key, v), true);
    } else if (key == "f_d") {
      c.f_d = detail::unit_range(key, detail::to_double(key, v), true);
    } else if (key == "f_b") {
      c.f_b = detail::unit_range(key, detail::to_double(key, v), true);
    } else if (key == "abort_threshold") {
      c.abort_threshold = detail::unit_range(key, detail::to_double(key, v));
    } else if (key == "multiphoton_tolerance") {
      c.multiphoton_tolerance = static_cast<std::size_t>(detail::to_uint(key, v));
    } else if (key == "P0") {
      c.p0 = detail::unit_range(key, detail::to_double(key, v));
    } else if (key == "bob_self_measures") {
      c.bob_self_measures = detail::to_bool(key, v);
    } else if (key == "noise.p") {
      c.noise.depolarize = detail::unit_range(key, detail::to_double(key, v));
    } else if (key == "noise.loss") {
      c.noise.loss = detail::unit_range(key, detail::to_double(key, v));
    } else if (key == "attack.leg") {
      attack_leg = v;
    } else if (key == "attack.kind") {
      attack_kind = v;
    } else if (key == "attack.params") {
      attack_params = v;
    } else if (key == "sweep.kind") {
      sweep_kind = v;
    } else if (key == "sweep.grid") {
      sweep_grid = v;
    } else if (key == "sweep.family") {
      sweep_family = v;
    } else if (key == "sweep.weight_x") {
      sweep_weight = v;
    } else {
      throw ConfigError(key, "unknown key");
    }
  }
  if (c.f_s + c.f_d + c.f_b >= 1.0) throw ConfigError("f_s", "f_s + f_d + f_b must be < 1");

  if (attack_kind && *attack_kind != "none") {
    if (!attack_leg) throw ConfigError("attack.leg", "required when attack.kind is set");
    const auto leg = parse_leg(*attack_leg);
    if (!leg) throw ConfigError("attack.leg", "expected E1, E2 or E3, got '" + *attack_leg + "'");
    c.attack.set(*leg, parse_attack(*attack_kind, attack_params.value_or("")));
  } else if (attack_params) {
    if (!attack_kind) throw ConfigError("attack.params", "attack.kind is not set");
    parse_attack("none", *attack_params);
  } else if (attack_leg && !parse_leg(*attack_leg)) {
    throw ConfigError("attack.leg", "expected E1, E2 or E3, got '" + *attack_leg + "'");
  }

  if (sweep_kind || sweep_grid || sweep_family || sweep_weight) {
    SweepSpec s;
    const std::string k = sweep_kind.value_or("imax_vs_D");
    if (k == "imax_vs_D") {
      s.kind = SweepKind::ImaxVsD;
    } else if (k == "holevo_vs_geometry") {
      s.kind = SweepKind::HolevoVsGeometry;
    } else {
      throw ConfigError("sweep.kind", "expected imax_vs_D or holevo_vs_geometry, got '" + k + "'");
    }
    if (!sweep_grid) throw ConfigError("sweep.grid", "required for a sweep");
    s.grid = parse_grid("sweep.grid", *sweep_grid);
    if (sweep_family) {
      const auto f = parse_family(*sweep_family);
      if (!f) throw ConfigError("sweep.family", "unknown family '" + *sweep_family + "'");
      s.family = *f;
    }
    if (sweep_weight) s.weight_x = detail::unit_range("sweep.weight_x", detail::to_double("sweep.weight_x", *sweep_weight));
    rc.sweep = std::move(s);
  }
  return rc;
}

inline RunConfig parse_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("", "cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace qsdc
