#include "d2dstore/app/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>

#include <unistd.h>

#include <boost/multiprecision/cpp_int.hpp>

#include "d2dstore/analytic.hpp"
#include "d2dstore/app/commands.hpp"
#include "d2dstore/app/golden.hpp"
#include "d2dstore/incoming.hpp"
#include "d2dstore/oracles.hpp"
#include "d2dstore/search.hpp"
#include "d2dstore/simulator.hpp"
#include "parallel.hpp"

namespace d2dstore::app {

namespace {

std::string fmt(double x, int digits = 4) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

std::vector<CodeSpec> reference_codes() {
  return {replication(2), derive_code(CodeFamily::MDS, 9, 3, 3),
          derive_code(CodeFamily::MSR, 9, 3, 8), derive_code(CodeFamily::MBR, 9, 5, 8),
          derive_code(CodeFamily::LRC, 6, 3, 2)};
}

std::vector<double> fine_grid(double stop = 3.0) {
  std::vector<double> g{0.0};
  for (int i = 1; i * 0.01 <= stop + 1e-12; ++i) g.push_back(i * 0.01);
  return g;
}

std::vector<double> log_grid() {
  std::vector<double> g{0.0};
  for (int i = 0; i <= 240; ++i) g.push_back(1e-3 * std::pow(10.0, i / 48.0));
  return g;
}

SearchSpec reference_search(double omega, Scheme scheme) {
  SearchSpec s;
  s.params.omega = omega;
  s.scheme = scheme;
  s.delta_grid = fine_grid();
  return s;
}

struct Outcome {
  bool pass;
  std::string measured;
};

Outcome limits() {
  NetworkParams np;
  double worst_norm = 0.0, worst_rel = 0.0;
  std::string worst_code;
  for (const auto& c : reference_codes()) {
    const double n50 = overall_cost({np, c, Scheme::Conventional, 50.0}).normalized;
    const double near = overall_cost({np, c, Scheme::Conventional, 1e-4}).total;
    const double lim = limit_cost_zero(np, c);
    if (std::abs(n50 - 1.0) > worst_norm) {
      worst_norm = std::abs(n50 - 1.0);
      worst_code = c.label();
    }
    worst_rel = std::max(worst_rel, std::abs(near - lim) / lim);
  }
  return {worst_norm <= 1e-6 && worst_rel <= 1e-3,
          "max |normalized(50) - 1| = " + fmt(worst_norm) + " (" + worst_code +
              "); max rel |C(1e-4) - limit| = " + fmt(worst_rel)};
}

Outcome lemma_instantaneous() {
  SearchSpec s;
  s.delta_grid = {0.0};
  const auto p = min_cost_curve(s).front();
  const double expect = s.params.rho_d2d * (2 * s.params.mu + s.params.M * s.params.omega);
  const bool rep2 = p.code.family == CodeFamily::Replication && p.code.m == 2;
  return {rep2 && p.cost.total == expect,
          "winner " + p.code.label() + " total " + fmt(p.cost.total, 17) + " (expected " +
              fmt(expect, 17) + ")"};
}

Outcome weights_sum() {
  using boost::multiprecision::cpp_rational;
  int bad = 0, checked = 0;
  for (int m = 2; m <= 30; ++m) {
    for (int h = 1; h < m; ++h) {
      cpp_rational sum = 0;
      for (int i = h; i <= m; ++i) sum += partial_fraction_weight_exact(i, h, m);
      ++checked;
      if (sum != 1) ++bad;
    }
  }
  return {bad == 0, std::to_string(checked - bad) + "/" + std::to_string(checked) +
                        " (h, m) pairs sum to exactly 1"};
}

Outcome quadrature_match() {
  double worst = 0.0;
  for (int m = 2; m <= 10; ++m) {
    for (int h = 1; h < m; ++h) {
      for (double d : {0.1, 0.5, 1.0, 2.0, 5.0}) {
        worst = std::max(worst, std::abs(p_d2d(h, m, 1.0, d) - p_d2d_quadrature(h, m, 1.0, d)));
      }
    }
  }
  return {worst <= 1e-8, "max |p_d2d - quadrature| = " + fmt(worst)};
}

Outcome simulation_agreement(double horizon, std::uint64_t seed) {
  struct Job {
    CodeSpec code;
    Scheme scheme;
    double delta;
    double lambda_c;
  };
  std::vector<Job> jobs;
  for (const auto& c : reference_codes()) {
    for (Scheme s : {Scheme::Conventional, Scheme::Hybrid}) {
      for (double d : {0.01, 0.1, 0.5, 1.0, 2.0}) jobs.push_back({c, s, d, 0.0});
    }
  }
  for (double lc : {0.5, 1.0}) {
    for (double d : {0.01, 0.1, 0.5, 1.0, 2.0}) {
      jobs.push_back({derive_code(CodeFamily::MDS, 9, 3, 3), Scheme::Conventional, d, lc});
    }
  }
  struct Row {
    bool pass;
    double z;
    std::string label;
  };
  const auto rows = parallel_map(jobs.size(), [&](std::size_t i) {
    const Job& j = jobs[i];
    SimConfig s;
    s.code = j.code;
    s.scheme = j.scheme;
    s.delta = j.delta;
    s.horizon = horizon;
    s.seed = seed + i;
    s.params.lambda_c = j.lambda_c;
    s.incoming = j.lambda_c > 0.0;
    const SimResult r = run(s);
    const CostBreakdown a = evaluate_cost(s.params, s.code, s.scheme, s.delta, s.incoming);
    const double err = r.stderr_cost.total;
    const double diff = std::abs(r.cost.total - a.total);
    const double allowance = s.incoming ? 0.02 * a.total : 0.0;
    std::string label = j.code.label() + " " + std::string(scheme_name(j.scheme)) + " d=" +
                        fmt(j.delta);
    if (s.incoming) label += " lambda_c=" + fmt(j.lambda_c);
    return Row{diff <= 3 * err + allowance, err > 0 ? diff / err : 0.0, label};
  });
  int ok = 0, ok_inc = 0, n_inc = 0;
  double worst = 0.0;
  std::string worst_label, failures;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const bool inc = jobs[i].lambda_c > 0.0;
    n_inc += inc;
    ok += rows[i].pass;
    ok_inc += inc && rows[i].pass;
    if (!rows[i].pass) failures += (failures.empty() ? "" : ", ") + rows[i].label;
    if (!inc && rows[i].z > worst) {
      worst = rows[i].z;
      worst_label = rows[i].label;
    }
  }
  const int n = static_cast<int>(rows.size());
  std::string m = std::to_string(ok) + "/" + std::to_string(n) + " runs agree (incoming " +
                  std::to_string(ok_inc) + "/" + std::to_string(n_inc) + "); worst |z| without incoming " +
                  fmt(worst, 3) + " (" + worst_label + ")";
  if (!failures.empty()) m += "; failing: " + failures;
  return {ok == n, m};
}

std::string dm_text(const DeltaMax& d) {
  if (d.kind == DeltaMax::Kind::None) return "none";
  if (d.kind == DeltaMax::Kind::Infinite) return "inf";
  return fmt(d.value);
}

Outcome delta_max_anchors() {
  NetworkParams np;
  np.omega = 0.05;
  const auto mds = delta_max(np, derive_code(CodeFamily::MDS, 9, 3, 3), Scheme::Conventional);
  const auto msr = delta_max(np, derive_code(CodeFamily::MSR, 9, 3, 8), Scheme::Conventional);
  const bool mds_ok = mds.kind == DeltaMax::Kind::Finite && std::abs(mds.value - 1.5) <= 0.3 * 1.5;
  const bool msr_ok = msr.kind == DeltaMax::Kind::Finite && std::abs(msr.value - 0.1) <= 0.5 * 0.1;
  np.rho_bs = 2.0;
  SearchSpec s;
  s.params = np;
  s.delta_grid = {0.0};
  int not_none = 0, total = 0;
  auto codes = enumerate_codes(s);
  for (const auto& c : reference_codes()) codes.push_back(c);
  for (const auto& c : codes) {
    ++total;
    if (delta_max(np, c, Scheme::Conventional).kind != DeltaMax::Kind::None) ++not_none;
  }
  const auto best = best_delta_max(reference_search(0.02, Scheme::Conventional));
  const bool best_ok = best.delta_max.kind == DeltaMax::Kind::Finite &&
                       std::abs(best.delta_max.value - 0.8) <= 0.1;
  return {mds_ok && msr_ok && not_none == 0 && best_ok,
          "MDS[9,3,3] " + dm_text(mds) + ", MSR[9,3,8] " + dm_text(msr) + ", rho=2: " +
              std::to_string(total - not_none) + "/" + std::to_string(total) +
              " codes none, best " + dm_text(best.delta_max) +
              (best.code ? " (" + best.code->label() + ")" : "")};
}

Outcome winner_structure() {
  // m-replication is the MBR code [m,1,1]; it wins exact ties by enumeration
  // order, so m > 2 replication counts as low-locality MBR.
  const auto curve = min_cost_curve(reference_search(0.02, Scheme::Conventional));
  std::string sequence;
  std::string last;
  bool lrc = false, mbr_after_mds = false, high_r = false, rep2_after_mbr = false;
  bool seen_mbr = false, seen_mds = false;
  for (const auto& p : curve) {
    if (p.delta == 0.0 || p.cost.normalized >= 1.0) continue;
    const auto& c = p.code;
    if (c.label() != last) {
      sequence += (sequence.empty() ? "" : " > ") + c.label();
      last = c.label();
    }
    lrc = lrc || c.family == CodeFamily::LRC;
    const bool mbr_like = c.family == CodeFamily::MBR || (c.family == CodeFamily::Replication && c.m > 2);
    if (mbr_like) {
      mbr_after_mds = mbr_after_mds || seen_mds;
      high_r = high_r || c.r > c.h + 1;
    }
    if (c.family == CodeFamily::Replication && c.m == 2) rep2_after_mbr = rep2_after_mbr || seen_mbr;
    seen_mbr = seen_mbr || c.family == CodeFamily::MBR;
    seen_mds = seen_mds || c.family == CodeFamily::MDS;
  }
  const bool first_rep = curve.size() > 1 && curve[1].code.family == CodeFamily::Replication;
  const bool conventional_ok =
      first_rep && seen_mbr && seen_mds && !lrc && !mbr_after_mds && !high_r && !rep2_after_mbr;

  const auto hybrid = min_cost_curve(reference_search(1.0, Scheme::Hybrid));
  int min_alpha = 0;
  for (const auto& p : hybrid) {
    if (p.delta > 0.0 && p.cost.normalized < 1.0 &&
        (p.code.family == CodeFamily::MDS || p.code.family == CodeFamily::MSR)) {
      ++min_alpha;
    }
  }
  return {conventional_ok && min_alpha > 0,
          "omega=0.02: " + sequence + "; omega=1 hybrid: MDS/MSR win " + std::to_string(min_alpha) +
              " grid points"};
}

Outcome incoming_benefit() {
  NetworkParams np;
  np.lambda_c = 1.0;
  const auto code = derive_code(CodeFamily::MDS, 9, 3, 3);
  double worst = 0.0, at = 0.0;
  for (double d : log_grid()) {
    const double n = incoming_overall_cost({np, code, Scheme::Conventional, d}).normalized;
    if (n > worst) {
      worst = n;
      at = d;
    }
  }
  return {worst < 1.0, "max normalized " + fmt(worst) + " at delta=" + fmt(at)};
}

Outcome hybrid_dominance() {
  int violations = 0, strict_msr = 0, checked = 0;
  double worst = 0.0;
  for (double omega : {0.02, 1.0}) {
    SearchSpec s = reference_search(omega, Scheme::Conventional);
    auto codes = enumerate_codes(s);
    for (const auto& c : reference_codes()) codes.push_back(c);
    for (const auto& c : codes) {
      for (double d : s.delta_grid) {
        const double conv = overall_cost({s.params, c, Scheme::Conventional, d}).total;
        const double hyb = overall_cost({s.params, c, Scheme::Hybrid, d}).total;
        ++checked;
        const double excess = (hyb - conv) / conv;
        worst = std::max(worst, excess);
        if (excess > 1e-12) ++violations;
        if (c.family == CodeFamily::MSR && hyb < conv * (1 - 1e-9)) ++strict_msr;
      }
    }
  }
  return {violations == 0 && strict_msr > 0,
          std::to_string(violations) + " violations in " + std::to_string(checked) +
              " points (max rel excess " + fmt(worst) + "); " + std::to_string(strict_msr) +
              " strict MSR improvements"};
}

Outcome determinism(std::uint64_t seed) {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("d2dstore_determinism_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  const auto config = dir / "config.json";
  std::ofstream(config) << R"({"codes": [{"family": "MDS", "m": 9, "h": 3, "r": 3},
    {"family": "LRC", "m": 6, "h": 3, "r": 2}], "scheme": ["conventional", "hybrid"],
    "grid": {"delta": [0.1, 0.5]}, "sim": {"horizon": 20000}})";
  std::string bytes[2];
  int codes[2];
  for (int k = 0; k < 2; ++k) {
    Manifest m;
    m.command = "simulate";
    m.config_path = config;
    m.out_dir = dir / ("run" + std::to_string(k));
    m.seed = seed;
    std::ostringstream out, err;
    codes[k] = run_command(m, out, err);
    std::ifstream in(m.out_dir / "simulate.jsonl", std::ios::binary);
    bytes[k] = std::string(std::istreambuf_iterator<char>(in), {});
  }
  std::filesystem::remove_all(dir);
  const bool same = codes[0] == 0 && codes[1] == 0 && !bytes[0].empty() && bytes[0] == bytes[1];
  return {same, std::to_string(bytes[0].size()) + " bytes, " + (same ? "identical" : "different")};
}

Outcome goldens(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = load_goldens(path);
  } catch (const GoldenMissing&) {
    throw;
  } catch (const std::exception& e) {
    return {false, e.what()};
  }
  const auto checks = check_goldens(doc);
  int ok = 0;
  std::string failures;
  for (const auto& c : checks) {
    ok += c.pass;
    if (!c.pass) {
      failures += (failures.empty() ? "" : ", ") + c.name + " " + fmt(c.computed, 8) + " vs " +
                  fmt(c.reference, 8);
    }
  }
  std::string m = std::to_string(ok) + "/" + std::to_string(checks.size()) + " golden values reproduced";
  if (!failures.empty()) m += "; failing: " + failures;
  return {ok == static_cast<int>(checks.size()), m};
}

}  // namespace

std::string format_result(const CriterionResult& r) {
  char secs[32];
  std::snprintf(secs, sizeof secs, "%.2f s", r.seconds);
  return std::string(r.pass ? "PASS" : "FAIL") + "  " + r.id + "  " + r.name + ": " + r.measured +
         "  (" + secs + ")";
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt) {
  if (!std::filesystem::exists(opt.golden)) {
    throw GoldenMissing("golden file '" + opt.golden.string() + "' not found");
  }
  struct Criterion {
    const char* id;
    const char* name;
    double budget;  // seconds; exceeding it fails the criterion
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"1", "limits", 1.0, limits},
      {"2", "instantaneous-repair optimum", 10.0, lemma_instantaneous},
      {"3", "partial-fraction weights", 0.0, weights_sum},
      {"4", "p_d2d vs quadrature", 0.0, quadrature_match},
      {"5", "simulation vs analytic", 600.0, [&] { return simulation_agreement(opt.horizon, opt.seed); }},
      {"6", "delta_max anchors", 0.0, delta_max_anchors},
      {"7", "winner structure", 0.0, winner_structure},
      {"8", "incoming benefit", 0.0, incoming_benefit},
      {"9", "hybrid dominance", 0.0, hybrid_dominance},
      {"10", "determinism", 0.0, [&] { return determinism(opt.seed); }},
      {"G", "golden values", 0.0, [&] { return goldens(opt.golden); }},
  };
  std::vector<CriterionResult> out;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    CriterionResult r;
    r.id = c.id;
    r.name = c.name;
    try {
      const Outcome o = c.run();
      r.pass = o.pass;
      r.measured = o.measured;
    } catch (const GoldenMissing&) {
      throw;
    } catch (const std::exception& e) {
      r.pass = false;
      r.measured = std::string("error: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget > 0 && r.seconds > c.budget) {
      r.pass = false;
      r.measured += "; over the " + fmt(c.budget) + " s budget";
    }
    if (opt.progress) *opt.progress << format_result(r) << std::endl;
    out.push_back(r);
  }
  return out;
}

}  // namespace d2dstore::app
