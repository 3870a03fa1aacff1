#include "d2dstore/app/figures.hpp"

#include "d2dstore/analytic.hpp"
#include "d2dstore/app/commands.hpp"
#include "d2dstore/app/csv.hpp"
#include "d2dstore/search.hpp"

namespace d2dstore::app {

namespace {

std::vector<double> linear_grid(double step, double stop) {
  std::vector<double> g;
  for (int i = 0; i * step <= stop + 1e-12; ++i) g.push_back(i * step);
  return g;
}

std::vector<CodeSpec> reference_codes() {
  return {replication(2),
          replication(3),
          derive_code(CodeFamily::MDS, 9, 3, 3),
          derive_code(CodeFamily::MSR, 9, 3, 8),
          derive_code(CodeFamily::MBR, 9, 5, 8),
          derive_code(CodeFamily::LRC, 6, 3, 2)};
}

Config with(const Config& base, double omega, double rho_bs, double lambda_c = 0.0) {
  Config c = base;
  c.network.omega = omega;
  c.network.rho_bs = rho_bs;
  c.network.lambda_c = lambda_c;
  c.incoming = lambda_c > 0.0;
  c.schemes = {Scheme::Conventional};
  c.grid = linear_grid(0.01, 3.0);
  return c;
}

// Prepends a labelled parameter column to every row.
void append(Table& dst, const Table& src, const std::string& column, const std::string& value) {
  if (dst.header.empty()) {
    dst.header = src.header;
    dst.header.insert(dst.header.begin(), column);
  }
  for (auto row : src.rows) {
    row.insert(row.begin(), value);
    dst.add(row);
  }
}

}  // namespace

std::vector<std::filesystem::path> write_figures(const Config& base, const std::filesystem::path& dir,
                                                 bool force) {
  std::vector<std::pair<std::string, Table>> out;

  {
    Config c = with(base, 0.02, 40.0);
    c.codes = reference_codes();
    out.emplace_back("cost_vs_delta.csv", analytic_table(c));
  }
  {
    Table t;
    t.header = {"family", "m", "h", "r", "rho", "delta_max"};
    NetworkParams np = base.network;
    np.omega = 0.05;
    np.lambda_c = 0.0;
    for (const auto& code : reference_codes()) {
      for (int rho = 1; rho <= 100; ++rho) {
        np.rho_bs = rho;
        const DeltaMax d = delta_max(np, code, Scheme::Conventional);
        const std::string v = d.kind == DeltaMax::Kind::Finite   ? format_number(d.value)
                              : d.kind == DeltaMax::Kind::Infinite ? "inf"
                                                                   : "none";
        t.add({std::string(family_name(code.family)), std::to_string(code.m), std::to_string(code.h),
               std::to_string(code.r), std::to_string(rho), v});
      }
    }
    out.emplace_back("delta_max_vs_rho.csv", t);
  }
  {
    Table t;
    for (double omega : {0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 1.0}) {
      Config c = with(base, omega, 20.0);
      c.codes = {derive_code(CodeFamily::LRC, 6, 3, 2)};
      append(t, analytic_table(c), "omega", format_number(omega));
    }
    out.emplace_back("lrc_cost_vs_omega.csv", t);
  }
  {
    Config c = with(base, 0.02, 40.0);
    for (int r = 4; r <= 8; ++r) c.codes.push_back(derive_code(CodeFamily::MSR, 9, 3, r));
    out.emplace_back("msr_cost_vs_r.csv", analytic_table(c));
  }
  {
    Config c = with(base, 0.02, 40.0);
    c.codes = reference_codes();
    c.schemes = {Scheme::Conventional, Scheme::Hybrid};
    out.emplace_back("hybrid_vs_conventional.csv", analytic_table(c));
  }
  {
    Config c = with(base, 0.02, 40.0);
    out.emplace_back("winners_conventional.csv", search_table(c, Scheme::Conventional));
  }
  {
    Config c = with(base, 1.0, 40.0);
    out.emplace_back("winners_hybrid.csv", search_table(c, Scheme::Hybrid));
  }
  {
    Table t;
    for (double lc : {0.0, 0.25, 0.5, 0.75, 1.0}) {
      Config c = with(base, 0.02, 40.0, lc);
      c.codes = {derive_code(CodeFamily::MDS, 9, 3, 3)};
      c.grid = linear_grid(0.05, 3.0);
      append(t, analytic_table(c), "lambda_c", format_number(lc));
    }
    out.emplace_back("incoming_cost_vs_lambda_c.csv", t);
  }
  {
    Config c = with(base, 0.02, 40.0, 1.0);
    c.grid = linear_grid(0.05, 3.0);
    out.emplace_back("winners_incoming.csv", search_table(c, Scheme::Conventional));
  }

  std::vector<std::filesystem::path> files;
  for (const auto& [name, table] : out) check_writable(dir / name, force);
  for (const auto& [name, table] : out) {
    write_csv_file(dir / name, table, force);
    files.push_back(dir / name);
  }
  return files;
}

}  // namespace d2dstore::app
