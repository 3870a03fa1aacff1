#include "d2dstore/app/commands.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "d2dstore/analytic.hpp"
#include "d2dstore/app/acceptance.hpp"
#include "d2dstore/app/figures.hpp"
#include "d2dstore/app/golden.hpp"
#include "d2dstore/incoming.hpp"
#include "d2dstore/search.hpp"
#include "d2dstore/simulator.hpp"
#include "parallel.hpp"

namespace d2dstore::app {

using nlohmann::ordered_json;

namespace {

std::string num(double x) { return format_number(x); }

// Rounds to the printed precision so JSON output matches the CSV files.
ordered_json jnum(double x) {
  if (!std::isfinite(x)) return nullptr;
  return std::stod(format_number(x));
}

ordered_json breakdown_json(const CostBreakdown& b) {
  return {{"repair_bs", jnum(b.repair_bs)},       {"repair_d2d", jnum(b.repair_d2d)},
          {"download_bs", jnum(b.download_bs)},   {"download_d2d", jnum(b.download_d2d)},
          {"total", jnum(b.total)},               {"normalized", jnum(b.normalized)}};
}

std::vector<std::string> code_cells(const CodeSpec& c) {
  return {std::string(family_name(c.family)), std::to_string(c.m), std::to_string(c.h),
          std::to_string(c.r)};
}

void require_codes(const Config& cfg) {
  if (cfg.codes.empty()) throw ConfigError("no codes given (section 'codes')");
}

void require_grid(const Config& cfg) {
  if (cfg.grid.empty()) throw ConfigError("empty delta grid (section 'grid')");
}

SearchSpec search_spec(const Config& cfg, Scheme scheme) {
  SearchSpec s;
  s.params = cfg.network;
  s.scheme = scheme;
  s.m_max = cfg.search.m_max;
  s.gamma_budget = cfg.search.gamma_budget;
  s.delta_grid = cfg.grid;
  s.incoming = cfg.incoming;
  try {
    s.validate();
  } catch (const ConstraintError& e) {
    throw ConfigError(std::string("constraint violated: ") + e.what());
  }
  return s;
}

std::string delta_max_text(const DeltaMax& d) {
  switch (d.kind) {
    case DeltaMax::Kind::None: return "none";
    case DeltaMax::Kind::Infinite: return "inf";
    case DeltaMax::Kind::Finite: return num(d.value);
  }
  return "";
}

Table search_codes_table(const Config& cfg, Scheme scheme) {
  const SearchSpec spec = search_spec(cfg, scheme);
  const auto codes = enumerate_codes(spec);
  Table t;
  t.header = {"family", "m", "h", "r", "scheme", "storage", "delta_max", "delta_opt", "cost_opt",
              "normalized_opt"};
  const auto rows = parallel_map(codes.size(), [&](std::size_t i) {
    const CodeSpec& c = codes[i];
    const DeltaMax dm = delta_max(spec.params, c, scheme, spec.incoming);
    const double opt = delta_opt(spec.params, c, scheme, spec.incoming);
    const CostBreakdown b = evaluate_cost(spec.params, c, scheme, opt, spec.incoming);
    auto row = code_cells(c);
    row.insert(row.end(), {std::string(scheme_name(scheme)), num(to_double(c.storage_frac())),
                           delta_max_text(dm), num(opt), num(b.total), num(b.normalized)});
    return row;
  });
  for (const auto& r : rows) t.add(r);
  return t;
}

std::filesystem::path prepare(const Manifest& m, const std::string& name) {
  std::filesystem::create_directories(m.out_dir);
  const auto p = m.out_dir / name;
  check_writable(p, m.force);
  return p;
}

int cmd_analytic(const Manifest& m, const Config& cfg, std::ostream& out) {
  const auto path = prepare(m, "analytic.csv");
  const Table t = analytic_table(cfg);
  write_csv_file(path, t, m.force);
  out << "wrote " << path.string() << " (" << t.rows.size() << " rows)\n";
  return kOk;
}

int cmd_simulate(const Manifest& m, const Config& cfg, std::ostream& out) {
  const auto jsonl = prepare(m, "simulate.jsonl");
  const auto report = prepare(m, "report.csv");
  const auto records = simulate_all(cfg, m.out_dir);
  std::ofstream js(jsonl, std::ios::binary);
  Table t;
  t.header = simulation_report_header();
  int flagged = 0;
  for (const auto& r : records) {
    js << r.json.dump() << '\n';
    t.add(r.report_row);
    if (r.flagged) {
      ++flagged;
      out << "flag |z| > 3: " << r.json["code"].get<std::string>() << ' '
          << r.json["scheme"].get<std::string>() << " delta=" << r.json["delta"].dump()
          << " z=" << r.json["z"].dump() << '\n';
    }
  }
  write_csv_file(report, t, m.force);
  out << "wrote " << jsonl.string() << " and " << report.string() << " (" << records.size()
      << " runs, " << flagged << " flagged)\n";
  return kOk;
}

int cmd_search(const Manifest& m, const Config& cfg, std::ostream& out) {
  require_grid(cfg);
  int files = 0;
  for (Scheme s : cfg.schemes) {
    const std::string suffix = cfg.schemes.size() > 1 ? "_" + std::string(scheme_name(s)) : "";
    const auto winners = prepare(m, "search" + suffix + ".csv");
    const auto per_code = prepare(m, "search_codes" + suffix + ".csv");
    write_csv_file(winners, search_table(cfg, s), m.force);
    write_csv_file(per_code, search_codes_table(cfg, s), m.force);
    out << "wrote " << winners.string() << " and " << per_code.string() << '\n';
    files += 2;
  }
  return files > 0 ? kOk : kConfigError;
}

int cmd_figures(const Manifest& m, const Config& cfg, std::ostream& out) {
  const auto files = write_figures(cfg, m.out_dir, m.force);
  for (const auto& f : files) out << "wrote " << f.string() << '\n';
  return kOk;
}

int cmd_validate(const Manifest& m, const Config& cfg, std::ostream& out) {
  const auto path = prepare(m, "validate.json");
  AcceptanceOptions opt;
  opt.golden = cfg.golden;
  opt.horizon = cfg.sim.horizon;
  opt.seed = cfg.sim.seed;
  opt.progress = &out;
  const auto results = run_acceptance(opt);
  ordered_json doc = ordered_json::array();
  bool ok = true;
  for (const auto& r : results) {
    doc.push_back({{"id", r.id},
                   {"name", r.name},
                   {"pass", r.pass},
                   {"measured", r.measured},
                   {"seconds", jnum(r.seconds)}});
    ok = ok && r.pass;
  }
  std::ofstream(path, std::ios::binary) << doc.dump(2) << '\n';
  out << (ok ? "all criteria passed" : "some criteria failed") << "; wrote " << path.string() << '\n';
  return ok ? kOk : kValidationFailed;
}

}  // namespace

Table analytic_table(const Config& cfg) {
  require_codes(cfg);
  require_grid(cfg);
  Table t;
  t.header = {"family", "m", "h", "r", "scheme", "delta", "repair_bs", "repair_d2d",
              "download_bs", "download_d2d", "total", "normalized"};
  for (const auto& c : cfg.codes) {
    for (Scheme s : cfg.schemes) {
      for (double d : cfg.grid) {
        const CostBreakdown b = evaluate_cost(cfg.network, c, s, d, cfg.incoming);
        auto row = code_cells(c);
        row.insert(row.end(), {std::string(scheme_name(s)), num(d), num(b.repair_bs),
                               num(b.repair_d2d), num(b.download_bs), num(b.download_d2d),
                               num(b.total), num(b.normalized)});
        t.add(row);
      }
    }
  }
  return t;
}

Table search_table(const Config& cfg, Scheme scheme) {
  const SearchSpec spec = search_spec(cfg, scheme);
  const double bs_only = spec.params.M * spec.params.omega * spec.params.rho_bs;
  Table t;
  t.header = {"delta", "family", "m", "h", "r", "cost", "normalized"};
  for (const auto& p : min_cost_curve(spec)) {
    // Distributed storage is pointless where downloading from the BS is cheaper.
    if (bs_only > 0 && p.cost.total >= bs_only) {
      t.add({num(p.delta), "BS-only", "0", "0", "0", num(bs_only), num(1.0)});
      continue;
    }
    auto row = code_cells(p.code);
    row.insert(row.begin(), num(p.delta));
    row.insert(row.end(), {num(p.cost.total), num(p.cost.normalized)});
    t.add(row);
  }
  return t;
}

std::vector<std::string> simulation_report_header() {
  return {"family", "m", "h", "r", "scheme", "delta", "seed", "analytic", "empirical", "stderr",
          "z", "flag"};
}

std::vector<SimRecord> simulate_all(const Config& cfg, const std::filesystem::path& trace_dir) {
  require_codes(cfg);
  require_grid(cfg);
  struct Job {
    CodeSpec code;
    Scheme scheme;
    double delta;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const auto& c : cfg.codes) {
    for (Scheme s : cfg.schemes) {
      for (double d : cfg.grid) {
        if (d <= 0.0) continue;
        jobs.push_back({c, s, d, cfg.sim.seed + jobs.size()});
      }
    }
  }
  if (jobs.empty()) throw ConfigError("simulation needs at least one positive delta");

  std::vector<SimConfig> sims;
  for (const auto& j : jobs) {
    SimConfig s;
    s.params = cfg.network;
    s.code = j.code;
    s.scheme = j.scheme;
    s.delta = j.delta;
    s.horizon = cfg.sim.horizon;
    s.seed = j.seed;
    s.request_model = cfg.sim.request_model;
    s.incoming = cfg.incoming;
    s.visibility = cfg.sim.visibility;
    s.exclude_requester = cfg.sim.exclude_requester;
    s.warmup_intervals = cfg.sim.warmup_intervals;
    s.batches = cfg.sim.batches;
    try {
      s.validate();
    } catch (const ConstraintError& e) {
      throw ConfigError(std::string("constraint violated: ") + e.what());
    }
    sims.push_back(s);
  }

  return parallel_map(jobs.size(), [&](std::size_t i) {
    SimConfig s = sims[i];
    std::ofstream trace;
    if (cfg.sim.trace && !trace_dir.empty()) {
      trace.open(trace_dir / ("trace_" + std::to_string(i) + ".csv"), std::ios::binary);
      s.trace = &trace;
    }
    const SimResult r = run(s);
    const CostBreakdown a = evaluate_cost(s.params, s.code, s.scheme, s.delta, s.incoming);
    const double err = r.stderr_cost.total;
    const double diff = r.cost.total - a.total;
    const double z = err > 0 ? diff / err : (diff == 0.0 ? 0.0 : (diff > 0 ? INFINITY : -INFINITY));
    SimRecord rec;
    rec.flagged = !(std::abs(z) <= 3.0);
    auto& j = rec.json;
    j["code"] = s.code.label();
    j["family"] = family_name(s.code.family);
    j["m"] = s.code.m;
    j["h"] = s.code.h;
    j["r"] = s.code.r;
    j["scheme"] = scheme_name(s.scheme);
    j["delta"] = jnum(s.delta);
    j["seed"] = s.seed;
    j["horizon"] = jnum(s.horizon);
    j["request_model"] = request_model_name(s.request_model);
    j["incoming"] = s.incoming;
    if (s.incoming) j["visibility"] = visibility_name(s.visibility);
    j["cost"] = breakdown_json(r.cost);
    j["stderr"] = breakdown_json(r.stderr_cost);
    j["analytic"] = breakdown_json(a);
    j["z"] = jnum(z);
    j["counts"] = {{"repair_local", r.counts.repair_local},
                   {"repair_global", r.counts.repair_global},
                   {"repair_d2d", r.counts.repair_d2d},
                   {"repair_partial", r.counts.repair_partial},
                   {"repair_bs", r.counts.repair_bs},
                   {"download_d2d", r.counts.download_d2d},
                   {"download_partial", r.counts.download_partial},
                   {"download_bs", r.counts.download_bs}};
    j["skipped_repairs"] = r.skipped_repairs;
    j["repair_epochs"] = r.repair_epochs;
    j["d2d_available"] = jnum(r.d2d_available);
    j["d2d_available_stderr"] = jnum(r.d2d_available_stderr);
    if (r.mean_population) j["mean_population"] = jnum(*r.mean_population);
    j["batches"] = r.batches;
    j["measured_time"] = jnum(r.measured_time);
    j["events"] = r.events;
    rec.report_row = code_cells(s.code);
    rec.report_row.insert(rec.report_row.end(),
                          {std::string(scheme_name(s.scheme)), num(s.delta), std::to_string(s.seed),
                           num(a.total), num(r.cost.total), num(err), num(z),
                           rec.flagged ? "FLAG" : "ok"});
    return rec;
  });
}

int run_command(const Manifest& m, std::ostream& out, std::ostream& err) {
  try {
    std::vector<std::string> overrides = m.overrides;
    if (m.seed) overrides.push_back("sim.seed=" + std::to_string(*m.seed));
    const Config cfg = load_config(m.config_path, overrides);
    if (m.command == "analytic") return cmd_analytic(m, cfg, out);
    if (m.command == "simulate") return cmd_simulate(m, cfg, out);
    if (m.command == "search") return cmd_search(m, cfg, out);
    if (m.command == "figures") return cmd_figures(m, cfg, out);
    if (m.command == "validate") return cmd_validate(m, cfg, out);
    err << "error: unknown command '" << m.command << "'\n";
    return kConfigError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ConstraintError& e) {
    err << "config error: constraint violated: " << e.what() << '\n';
    return kConfigError;
  } catch (const GoldenMissing& e) {
    err << "error: " << e.what() << '\n';
    return kGoldenMissing;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kValidationFailed;
  }
}

}  // namespace d2dstore::app
