#include "d2dstore/app/config.hpp"

#include <cmath>
#include <fstream>

#ifndef D2D_DEFAULT_GOLDEN
#define D2D_DEFAULT_GOLDEN "goldens.json"
#endif

namespace d2dstore::app {

using nlohmann::json;

namespace {

const json& section(const json& doc, const char* name) {
  static const json empty = json::object();
  if (!doc.contains(name)) return empty;
  const json& s = doc.at(name);
  if (!s.is_object()) throw ConfigError(std::string("section '") + name + "' must be an object");
  return s;
}

template <typename T>
void read(const json& s, const char* key, T& out) {
  if (!s.contains(key)) return;
  try {
    out = s.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

void check_keys(const json& s, const char* name, std::initializer_list<const char*> known) {
  for (auto it = s.begin(); it != s.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) throw ConfigError(std::string("unknown key '") + it.key() + "' in " + name);
  }
}

CodeSpec parse_code(const json& c) {
  if (!c.is_object()) throw ConfigError("code entries must be objects");
  check_keys(c, "code", {"family", "m", "h", "r"});
  std::string family;
  int m = 0, h = 1, r = 1;
  read(c, "family", family);
  read(c, "m", m);
  read(c, "h", h);
  read(c, "r", r);
  const CodeFamily f = parse_family(family);
  if (f == CodeFamily::Replication) return replication(m);
  return derive_code(f, m, h, r);
}

std::vector<double> spaced(const json& v, bool log) {
  if (!v.is_array() || v.size() != 3) throw ConfigError("grid spacing needs [start, stop, count]");
  const double a = v[0].get<double>(), b = v[1].get<double>();
  const int n = v[2].get<int>();
  if (n < 2 || !(b > a) || (log && !(a > 0))) throw ConfigError("grid spacing needs start < stop and count >= 2");
  std::vector<double> out;
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / (n - 1);
    out.push_back(log ? a * std::pow(b / a, t) : a + (b - a) * t);
  }
  return out;
}

}  // namespace

std::vector<double> parse_grid(const json& g) {
  if (!g.is_object()) throw ConfigError("section 'grid' must be an object");
  check_keys(g, "grid", {"delta", "linspace", "logspace", "include_zero"});
  const int forms = g.contains("delta") + g.contains("linspace") + g.contains("logspace");
  if (forms != 1) throw ConfigError("grid needs exactly one of 'delta', 'linspace', 'logspace'");
  std::vector<double> out;
  if (g.contains("delta")) {
    read(g, "delta", out);
  } else if (g.contains("linspace")) {
    out = spaced(g.at("linspace"), false);
  } else if (g.contains("logspace")) {
    out = spaced(g.at("logspace"), true);
  }
  if (out.empty()) throw ConfigError("empty delta grid");
  bool zero = false;
  read(g, "include_zero", zero);
  if (zero && (out.empty() || out.front() != 0.0)) out.insert(out.begin(), 0.0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!std::isfinite(out[i]) || out[i] < 0) throw ConfigError("grid values must be finite and >= 0");
    if (i > 0 && !(out[i] > out[i - 1])) throw ConfigError("grid must be strictly increasing");
  }
  return out;
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' is not key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  std::vector<std::string> parts;
  for (std::size_t start = 0;;) {
    const auto dot = key.find('.', start);
    parts.push_back(key.substr(start, dot == std::string::npos ? dot : dot - start));
    if (parts.back().empty()) throw ConfigError("override '" + assignment + "' has an empty key");
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  json* node = &doc;
  for (const auto& part : parts) {
    if (node->is_null()) *node = json::object();
    if (!node->is_object()) throw ConfigError("override '" + key + "' descends into a non-object");
    node = &(*node)[part];
  }
  *node = value;
}

Config parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object");
  check_keys(doc, "configuration",
             {"network", "code", "codes", "scheme", "grid", "sim", "search", "incoming", "golden"});
  Config cfg;
  try {
    const json& net = section(doc, "network");
    check_keys(net, "network", {"M", "lambda", "mu", "omega", "lambda_c", "rho_bs", "rho_d2d", "F"});
    NetworkParams& p = cfg.network;
    read(net, "M", p.M);
    read(net, "lambda", p.lambda);
    read(net, "mu", p.mu);
    read(net, "omega", p.omega);
    read(net, "lambda_c", p.lambda_c);
    read(net, "rho_bs", p.rho_bs);
    read(net, "rho_d2d", p.rho_d2d);
    read(net, "F", p.F);
    p.validate();

    for (const char* key : {"code", "codes"}) {
      if (!doc.contains(key)) continue;
      const json& c = doc.at(key);
      if (c.is_array()) {
        for (const auto& e : c) cfg.codes.push_back(parse_code(e));
      } else {
        cfg.codes.push_back(parse_code(c));
      }
    }
    for (auto& c : cfg.codes) {
      if (c.F != p.F) c = c.family == CodeFamily::Replication ? replication(c.m, p.F)
                                                              : derive_code(c.family, c.m, c.h, c.r, p.F);
    }

    if (doc.contains("scheme")) {
      const json& s = doc.at("scheme");
      cfg.schemes.clear();
      if (s.is_array()) {
        for (const auto& e : s) cfg.schemes.push_back(parse_scheme(e.get<std::string>()));
      } else {
        cfg.schemes.push_back(parse_scheme(s.get<std::string>()));
      }
      if (cfg.schemes.empty()) throw ConfigError("empty scheme list");
    }

    if (doc.contains("grid")) cfg.grid = parse_grid(doc.at("grid"));
    read(doc, "incoming", cfg.incoming);

    const json& sim = section(doc, "sim");
    check_keys(sim, "sim",
               {"horizon", "seed", "request_model", "visibility", "exclude_requester",
                "warmup_intervals", "batches", "trace"});
    read(sim, "horizon", cfg.sim.horizon);
    read(sim, "seed", cfg.sim.seed);
    if (sim.contains("request_model")) {
      cfg.sim.request_model = parse_request_model(sim.at("request_model").get<std::string>());
    }
    if (sim.contains("visibility")) {
      cfg.sim.visibility = parse_visibility(sim.at("visibility").get<std::string>());
    }
    read(sim, "exclude_requester", cfg.sim.exclude_requester);
    read(sim, "warmup_intervals", cfg.sim.warmup_intervals);
    read(sim, "batches", cfg.sim.batches);
    read(sim, "trace", cfg.sim.trace);

    const json& search = section(doc, "search");
    check_keys(search, "search", {"m_max", "gamma"});
    read(search, "m_max", cfg.search.m_max);
    read(search, "gamma", cfg.search.gamma_budget);

    std::string golden = D2D_DEFAULT_GOLDEN;
    read(doc, "golden", golden);
    cfg.golden = golden;
  } catch (const ConstraintError& e) {
    throw ConfigError(std::string("constraint violated: ") + e.what());
  } catch (const json::exception& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

Config load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  json doc = json::object();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
    doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw ConfigError("config '" + path.string() + "' is not valid JSON");
  }
  for (const auto& o : overrides) apply_override(doc, o);
  return parse_config(doc);
}

}  // namespace d2dstore::app
