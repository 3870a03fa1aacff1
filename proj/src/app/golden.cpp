#include "d2dstore/app/golden.hpp"

#include <cmath>
#include <fstream>
#include <functional>

#include "d2dstore/analytic.hpp"
#include "d2dstore/incoming.hpp"
#include "d2dstore/search.hpp"

namespace d2dstore::app {

using nlohmann::json;

json load_goldens(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw GoldenMissing("golden file '" + path.string() + "' not found");
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read golden file '" + path.string() + "'");
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw std::runtime_error("golden file '" + path.string() + "' is not a JSON object");
  }
  return doc;
}

namespace {

struct Entry {
  const char* name;
  std::function<double()> compute;
  double floor;  // tolerance used when the entry has no standard error
};

CostQuery q(const CodeSpec& c, Scheme s, double delta) { return {NetworkParams{}, c, s, delta}; }

StationaryDist chain_lambda1() {
  ChainConfig cfg;
  cfg.lambda_c = 1.0;
  cfg.delta = 1.0;
  return stationary(cfg);
}

GoldenCheck compare(const json& goldens, const std::string& name, double computed, double floor,
                    std::size_t index = SIZE_MAX) {
  GoldenCheck g;
  g.name = index == SIZE_MAX ? name : name + "[" + std::to_string(index) + "]";
  g.computed = computed;
  try {
    const json& e = goldens.at(name);
    const json& v = index == SIZE_MAX ? e.at("value") : e.at("value").at(index);
    g.reference = v.get<double>();
    double err = 0.0;
    if (e.contains("stderr")) {
      err = index == SIZE_MAX ? e.at("stderr").get<double>() : e.at("stderr").at(index).get<double>();
    }
    g.tolerance = std::max(3.0 * err, floor);
    g.pass = std::isfinite(g.reference) && std::abs(g.computed - g.reference) <= g.tolerance;
  } catch (const json::exception&) {
    g.reference = NAN;
    g.pass = false;
  }
  return g;
}

}  // namespace

std::vector<GoldenCheck> check_goldens(const json& goldens) {
  const auto mds933 = derive_code(CodeFamily::MDS, 9, 3, 3);
  const auto msr938 = derive_code(CodeFamily::MSR, 9, 3, 8);
  const auto lrc632 = derive_code(CodeFamily::LRC, 6, 3, 2);

  const std::vector<Entry> entries = {
      {"mds933_repair_delta0.5", [&] { return repair_cost(q(mds933, Scheme::Conventional, 0.5)); },
       0.0},
      {"p_d2d_h3_m9_delta0.5", [] { return p_d2d(3, 9, 1.0, 0.5); }, 1e-8},
      {"msr938_hybrid_repair_rho10_delta0.5",
       [&] {
         auto x = q(msr938, Scheme::Hybrid, 0.5);
         x.params.rho_bs = 10;
         return hybrid_repair_cost(x);
       },
       0.0},
      {"mds933_hybrid_download_rho10_omega0.1_delta1",
       [&] {
         auto x = q(mds933, Scheme::Hybrid, 1.0);
         x.params.rho_bs = 10;
         x.params.omega = 0.1;
         return hybrid_download_cost(x);
       },
       0.0},
      {"lrc632_repair_rho20_delta0.5",
       [&] {
         auto x = q(lrc632, Scheme::Conventional, 0.5);
         x.params.rho_bs = 20;
         return lrc_repair_cost(x);
       },
       0.0},
      {"incoming_mu_eff_lambda1_delta1", [] { return effective_rate(chain_lambda1(), 1.0); }, 0.0},
      {"incoming_mds933_repair_lambda1_delta1",
       [&] {
         auto x = q(mds933, Scheme::Conventional, 1.0);
         x.params.lambda_c = 1.0;
         return incoming_repair_cost(x, chain_lambda1());
       },
       0.0},
      {"enumeration_count_gamma3_m10",
       [] {
         SearchSpec s;
         s.delta_grid = {0.0};
         return static_cast<double>(enumerate_codes(s).size());
       },
       0.0},
  };

  std::vector<GoldenCheck> out;
  for (const auto& e : entries) out.push_back(compare(goldens, e.name, e.compute(), e.floor));
  const auto dist = chain_lambda1();
  for (std::size_t i = 0; i < 6; ++i) {
    out.push_back(compare(goldens, "incoming_q_lambda1_delta1", dist.q[i], 0.0, i));
  }
  return out;
}

}  // namespace d2dstore::app
