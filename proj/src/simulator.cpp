#include "d2dstore/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>
#include <vector>

namespace d2dstore {

namespace {

std::uint64_t splitmix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Counter-based generator: output n depends only on (seed, category, n), so
// draws in one category never shift the draws of another.
class Stream {
 public:
  using result_type = std::uint64_t;
  Stream(std::uint64_t seed, std::uint64_t category)
      : key_(splitmix(seed ^ splitmix(category * 0x9E3779B97F4A7C15ULL + 0x632BE59BD9B4E019ULL))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return splitmix(key_ + 0x9E3779B97F4A7C15ULL * ++counter_); }

  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }
  std::int64_t below(std::int64_t n) {
    return std::min<std::int64_t>(n - 1, static_cast<std::int64_t>(uniform() * static_cast<double>(n)));
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

enum Category : std::uint64_t { kLifetimes = 1, kRequests, kClassArrivals, kPool, kInit, kRequester };

// Kinds are ordered so that simultaneous events resolve deterministically.
enum class Kind : std::uint8_t { Epoch = 0, Request, Departure, ClassArrival, PoolChange };

struct Event {
  double time;
  Kind kind;
  std::uint64_t seq;
  std::int64_t payload;
  std::uint64_t version;
};

struct Later {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    if (a.kind != b.kind) return a.kind > b.kind;
    return a.seq > b.seq;
  }
};

struct Node {
  int cls = -1;
  std::int64_t visible_from = 0;  // first epoch index at which the node is listed
  bool alive = false;
};

struct BatchSums {
  double repair_bs = 0, repair_d2d = 0, download_bs = 0, download_d2d = 0;
  std::uint64_t requests = 0, available = 0;
};

struct MeanErr {
  double mean = 0.0;
  double err = 0.0;
};

MeanErr batch_stats(const std::vector<double>& v) {
  MeanErr out;
  if (v.empty()) return out;
  double s = 0.0;
  for (double x : v) s += x;
  out.mean = s / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.err = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  }
  return out;
}

class Simulation {
 public:
  explicit Simulation(const SimConfig& cfg)
      : cfg_(cfg),
        np_(cfg.params),
        code_(cfg.code),
        lifetimes_(cfg.seed, kLifetimes),
        requests_(cfg.seed, kRequests),
        arrivals_(cfg.seed, kClassArrivals),
        pool_rng_(cfg.seed, kPool),
        init_(cfg.seed, kInit),
        requester_(cfg.seed, kRequester) {
    const std::int64_t intervals = static_cast<std::int64_t>(std::floor(cfg.horizon / cfg.delta));
    per_batch_ = (intervals - cfg.warmup_intervals) / cfg.batches;
    first_epoch_ = cfg.warmup_intervals;
    t_start_ = static_cast<double>(first_epoch_) * cfg.delta;
    last_epoch_ = first_epoch_ + per_batch_ * cfg.batches;
    t_end_ = static_cast<double>(last_epoch_) * cfg.delta;
    batch_len_ = static_cast<double>(per_batch_) * cfg.delta;
    sums_.assign(cfg.batches, {});
    explicit_pool_ = cfg.request_model == RequestModel::PopulationProportional;
    pool_arrival_rate_ = np_.M * np_.lambda - (cfg.incoming ? code_.m * np_.lambda_c : 0.0);
  }

  SimResult run() {
    init();
    while (!queue_.empty()) {
      const Event ev = queue_.top();
      if (ev.time > t_end_) break;
      queue_.pop();
      ++events_;
      switch (ev.kind) {
        case Kind::Epoch: on_epoch(ev); break;
        case Kind::Request: on_request(ev); break;
        case Kind::Departure: on_departure(ev); break;
        case Kind::ClassArrival: on_class_arrival(ev); break;
        case Kind::PoolChange: on_pool_change(ev); break;
      }
    }
    advance_population_area(t_end_);
    return finish();
  }

 private:
  // ---- setup -------------------------------------------------------------

  void init() {
    const int m = code_.m;
    present_.assign(m, 1);
    alive_classes_ = m;
    members_.assign(m, {});
    const double mean_pop = np_.mu > 0 ? np_.M * np_.lambda / np_.mu : np_.M;
    std::poisson_distribution<std::int64_t> pop0(mean_pop);
    pool_ = std::max<std::int64_t>(0, pop0(init_) - m);
    pool_time_ = 0.0;
    for (int i = 0; i < m; ++i) add_node(i, 0, 0.0);
    if (np_.omega > 0) schedule_request(0.0);
    if (cfg_.incoming && np_.lambda_c > 0) {
      push(arrivals_.exponential(m * np_.lambda_c), Kind::ClassArrival, 0);
    }
    if (explicit_pool_) schedule_pool_change(0.0);
  }

  void push(double t, Kind kind, std::int64_t payload, std::uint64_t version = 0) {
    queue_.push(Event{t, kind, seq_++, payload, version});
  }

  std::int64_t epoch_index(double t) const {
    return static_cast<std::int64_t>(std::floor(t / cfg_.delta));
  }

  // ---- population --------------------------------------------------------

  std::int64_t storage_nodes() const { return storage_nodes_; }
  std::int64_t population() const { return pool_ + storage_nodes_; }

  // Brings the lazily tracked pool of nodes without a symbol up to time t:
  // survivors are binomial and newcomers Poisson.
  void advance_pool(double t) {
    if (explicit_pool_ || t <= pool_time_) return;
    const double tau = t - pool_time_;
    pool_time_ = t;
    double keep = 1.0, mean_new = pool_arrival_rate_ * tau;
    if (np_.mu > 0) {
      keep = std::exp(-np_.mu * tau);
      mean_new = pool_arrival_rate_ * -std::expm1(-np_.mu * tau) / np_.mu;
    }
    if (pool_ > 0 && keep < 1.0) {
      std::binomial_distribution<std::int64_t> survive(pool_, keep);
      pool_ = survive(pool_rng_);
    }
    if (mean_new > 0) {
      std::poisson_distribution<std::int64_t> born(mean_new);
      pool_ += born(pool_rng_);
    }
  }

  void advance_population_area(double t) {
    if (!explicit_pool_) return;
    const double lo = std::max(area_time_, t_start_);
    const double hi = std::min(t, t_end_);
    if (hi > lo) pop_area_ += static_cast<double>(population()) * (hi - lo);
    area_time_ = std::max(area_time_, t);
  }

  void schedule_pool_change(double now) {
    const double rate = pool_arrival_rate_ + np_.mu * static_cast<double>(pool_);
    ++pool_version_;
    if (rate > 0) push(now + pool_rng_.exponential(rate), Kind::PoolChange, 0, pool_version_);
  }

  void on_pool_change(const Event& ev) {
    if (ev.version != pool_version_) return;
    advance_population_area(ev.time);
    const double up = pool_arrival_rate_;
    const double down = np_.mu * static_cast<double>(pool_);
    if (pool_rng_.uniform() * (up + down) < up) {
      ++pool_;
    } else {
      --pool_;
    }
    schedule_pool_change(ev.time);
    schedule_request(ev.time);
  }

  // ---- storage nodes -----------------------------------------------------

  void add_node(int cls, std::int64_t visible_from, double now) {
    std::int64_t id;
    if (!free_.empty()) {
      id = free_.back();
      free_.pop_back();
    } else {
      id = static_cast<std::int64_t>(nodes_.size());
      nodes_.emplace_back();
    }
    nodes_[id] = Node{cls, visible_from, true};
    members_[cls].push_back(id);
    ++storage_nodes_;
    if (!present_[cls]) {
      present_[cls] = 1;
      ++alive_classes_;
    }
    if (np_.mu > 0) push(now + lifetimes_.exponential(np_.mu), Kind::Departure, id);
  }

  void on_departure(const Event& ev) {
    advance_population_area(ev.time);
    Node& node = nodes_[ev.payload];
    node.alive = false;
    auto& mem = members_[node.cls];
    mem.erase(std::find(mem.begin(), mem.end(), ev.payload));
    --storage_nodes_;
    free_.push_back(ev.payload);
    if (mem.empty()) {
      present_[node.cls] = 0;
      --alive_classes_;
      ensure_epoch(ev.time);
    }
    trace(ev.time, "departure", node.cls, {});
    if (explicit_pool_) schedule_request(ev.time);
  }

  void on_class_arrival(const Event& ev) {
    advance_population_area(ev.time);
    const int cls = static_cast<int>(arrivals_.below(code_.m));
    add_node(cls, epoch_index(ev.time) + 1, ev.time);
    push(ev.time + arrivals_.exponential(code_.m * np_.lambda_c), Kind::ClassArrival, 0);
    trace(ev.time, "class_arrival", cls, {});
    if (explicit_pool_) schedule_request(ev.time);
  }

  // ---- repair ------------------------------------------------------------

  // Schedules the first epoch strictly after t.
  void ensure_epoch(double t) {
    std::int64_t k = epoch_index(t) + 1;
    if (static_cast<double>(k) * cfg_.delta <= t) ++k;
    schedule_epoch(k);
  }

  void schedule_epoch(std::int64_t k) {
    if (epoch_pending_) return;
    epoch_pending_ = true;
    push(static_cast<double>(k) * cfg_.delta, Kind::Epoch, k);
  }

  void on_epoch(const Event& ev) {
    epoch_pending_ = false;
    const std::int64_t k = ev.payload;
    const int lost = code_.m - alive_classes_;
    if (lost == 0) return;
    const bool counted = k > first_epoch_ && k <= last_epoch_;
    advance_pool(ev.time);
    advance_population_area(ev.time);
    if (population() < code_.m || pool_ < lost) {
      if (counted) ++skipped_;
      trace(ev.time, "repair_skipped", lost, {});
      schedule_epoch(k + 1);
      return;
    }
    BranchCounts scratch;
    const CostIncrement inc =
        repair_epoch(present_, np_, code_, cfg_.scheme, counted ? counts_ : scratch);
    if (counted) {
      auto& b = sums_[static_cast<std::size_t>((k - first_epoch_ - 1) / per_batch_)];
      b.repair_bs += inc.bs;
      b.repair_d2d += inc.d2d;
      ++repair_epochs_;
    }
    for (int cls = 0; cls < code_.m; ++cls) {
      if (present_[cls]) continue;
      --pool_;
      add_node(cls, k, ev.time);
    }
    trace(ev.time, "repair", lost, inc);
    if (explicit_pool_) schedule_pool_change(ev.time);
  }

  // ---- requests ----------------------------------------------------------

  void schedule_request(double now) {
    if (np_.omega <= 0) return;
    double rate = np_.M * np_.omega;
    if (explicit_pool_) {
      rate = np_.omega * static_cast<double>(population());
      ++request_version_;
      if (rate <= 0) return;
    }
    push(now + requests_.exponential(rate), Kind::Request, 0, request_version_);
  }

  bool reachable(std::int64_t id, std::int64_t epoch) const {
    return cfg_.visibility == Visibility::Oracle || !cfg_.incoming ||
           nodes_[id].visible_from <= epoch;
  }

  int available_classes(double t) {
    std::int64_t self = -1;
    if (cfg_.exclude_requester) {
      advance_pool(t);
      const auto pop = population();
      if (pop > 0 && requester_.below(pop) < storage_nodes_) {
        // The requester is a storage node; pick which one uniformly.
        std::int64_t pick = requester_.below(storage_nodes_);
        for (const auto& mem : members_) {
          if (pick < static_cast<std::int64_t>(mem.size())) {
            self = mem[pick];
            break;
          }
          pick -= static_cast<std::int64_t>(mem.size());
        }
      }
    }
    if (!cfg_.incoming && self < 0) return alive_classes_;
    const std::int64_t epoch = epoch_index(t);
    int count = 0;
    for (const auto& mem : members_) {
      for (std::int64_t id : mem) {
        if (id != self && reachable(id, epoch)) {
          ++count;
          break;
        }
      }
    }
    return count;
  }

  void on_request(const Event& ev) {
    if (explicit_pool_ && ev.version != request_version_) return;
    advance_population_area(ev.time);
    schedule_request(ev.time);
    const int available = available_classes(ev.time);
    const bool counted = ev.time > t_start_;
    BranchCounts scratch;
    const CostIncrement inc =
        request_event(available, np_, code_, cfg_.scheme, counted ? counts_ : scratch);
    if (counted) {
      const auto b = std::min<std::size_t>(
          sums_.size() - 1, static_cast<std::size_t>((ev.time - t_start_) / batch_len_));
      sums_[b].download_bs += inc.bs;
      sums_[b].download_d2d += inc.d2d;
      ++sums_[b].requests;
      if (available >= code_.h) ++sums_[b].available;
    }
    trace(ev.time, "request", available, inc);
  }

  void trace(double t, const char* what, int value, CostIncrement inc) {
    if (cfg_.trace == nullptr) return;
    *cfg_.trace << t << ',' << what << ',' << value << ',' << inc.bs << ',' << inc.d2d << '\n';
  }

  // ---- results -----------------------------------------------------------

  SimResult finish() const {
    const std::size_t B = sums_.size();
    const double F = np_.F;
    std::vector<double> rbs(B), rd(B), dbs(B), dd(B), tot(B), avail;
    std::uint64_t req = 0, ok = 0;
    for (std::size_t b = 0; b < B; ++b) {
      const auto& s = sums_[b];
      rbs[b] = s.repair_bs / (F * batch_len_);
      rd[b] = s.repair_d2d / (F * batch_len_);
      dbs[b] = s.download_bs / (F * batch_len_);
      dd[b] = s.download_d2d / (F * batch_len_);
      tot[b] = rbs[b] + rd[b] + dbs[b] + dd[b];
      req += s.requests;
      ok += s.available;
      if (s.requests > 0) {
        avail.push_back(static_cast<double>(s.available) / static_cast<double>(s.requests));
      }
    }
    SimResult r;
    const MeanErr a = batch_stats(rbs), b = batch_stats(rd), c = batch_stats(dbs),
                  d = batch_stats(dd), t = batch_stats(tot);
    r.cost = make_breakdown(a.mean, b.mean, c.mean, d.mean, np_);
    r.stderr_cost = make_breakdown(a.err, b.err, c.err, d.err, np_);
    r.stderr_cost.total = t.err;
    const double ref = np_.M * np_.omega * np_.rho_bs;
    if (ref > 0) r.stderr_cost.normalized = t.err / ref;
    r.counts = counts_;
    r.skipped_repairs = skipped_;
    r.repair_epochs = repair_epochs_;
    if (req > 0) r.d2d_available = static_cast<double>(ok) / static_cast<double>(req);
    r.d2d_available_stderr = batch_stats(avail).err;
    if (explicit_pool_) r.mean_population = pop_area_ / (t_end_ - t_start_);
    r.batches = static_cast<int>(B);
    r.measured_time = t_end_ - t_start_;
    r.events = events_;
    return r;
  }

  const SimConfig& cfg_;
  const NetworkParams& np_;
  const CodeSpec& code_;
  Stream lifetimes_, requests_, arrivals_, pool_rng_, init_, requester_;

  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::uint64_t seq_ = 0;
  std::uint64_t events_ = 0;

  std::vector<Node> nodes_;
  std::vector<std::int64_t> free_;
  std::vector<std::vector<std::int64_t>> members_;
  std::vector<std::uint8_t> present_;
  int alive_classes_ = 0;
  std::int64_t storage_nodes_ = 0;

  bool explicit_pool_ = false;
  double pool_arrival_rate_ = 0.0;
  std::int64_t pool_ = 0;
  double pool_time_ = 0.0;
  std::uint64_t pool_version_ = 0;
  std::uint64_t request_version_ = 0;
  double pop_area_ = 0.0;
  double area_time_ = 0.0;

  bool epoch_pending_ = false;
  std::int64_t per_batch_ = 0, first_epoch_ = 0, last_epoch_ = 0;
  double t_start_ = 0, t_end_ = 0, batch_len_ = 0;

  std::vector<BatchSums> sums_;
  BranchCounts counts_;
  std::uint64_t skipped_ = 0;
  std::uint64_t repair_epochs_ = 0;
};

}  // namespace

std::string_view request_model_name(RequestModel m) {
  return m == RequestModel::FixedAggregate ? "fixed-aggregate" : "population-proportional";
}

RequestModel parse_request_model(std::string_view name) {
  if (name == "fixed-aggregate") return RequestModel::FixedAggregate;
  if (name == "population-proportional") return RequestModel::PopulationProportional;
  throw ConstraintError("known request model", "unknown request model '" + std::string(name) + "'");
}

std::string_view visibility_name(Visibility v) {
  return v == Visibility::ListRefresh ? "list-refresh" : "oracle";
}

Visibility parse_visibility(std::string_view name) {
  if (name == "list-refresh") return Visibility::ListRefresh;
  if (name == "oracle") return Visibility::Oracle;
  throw ConstraintError("known visibility", "unknown visibility '" + std::string(name) + "'");
}

void SimConfig::validate() const {
  params.validate();
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw ConstraintError("delta > 0", "simulation needs a positive repair interval");
  }
  if (batches < 30) {
    throw ConstraintError("batches >= 30", "batches = " + std::to_string(batches));
  }
  if (warmup_intervals < 0) {
    throw ConstraintError("warmup_intervals >= 0", std::to_string(warmup_intervals));
  }
  const double scale = params.mu > 0 ? std::max(delta, 1.0 / params.mu) : delta;
  if (!(horizon >= 100.0 * scale)) {
    throw ConstraintError("horizon >= 100*max(delta, 1/mu)",
                          "horizon = " + std::to_string(horizon));
  }
  const double intervals = std::floor(horizon / delta) - warmup_intervals;
  if (intervals < static_cast<double>(batches)) {
    throw ConstraintError("horizon covers warm-up plus one interval per batch",
                          "horizon = " + std::to_string(horizon));
  }
  if (incoming && params.M * params.lambda < code.m * params.lambda_c) {
    throw ConstraintError("M*lambda >= m*lambda_c", "class arrivals exceed total arrivals");
  }
}

CostIncrement repair_epoch(std::span<const std::uint8_t> present, const NetworkParams& np,
                           const CodeSpec& c, Scheme scheme, BranchCounts& counts) {
  const int m = c.m;
  int survivors = 0;
  for (int i = 0; i < m; ++i) survivors += present[i] ? 1 : 0;
  const int lost = m - survivors;
  CostIncrement inc;
  if (lost == 0) return inc;

  const double alpha = c.alpha(), beta = c.beta(), gamma_d2d = c.gamma_d2d();
  const double bs_node = np.rho_bs * alpha;

  if (np.rho_bs * alpha < np.rho_d2d * gamma_d2d) {
    inc.bs = lost * bs_node;
    counts.repair_bs += lost;
    return inc;
  }

  if (c.family == CodeFamily::LRC) {
    const int size = c.r + 1;
    const bool global_ok = survivors >= c.h;
    for (int g = 0; g < c.G; ++g) {
      int group_lost = 0;
      for (int j = g * size; j < (g + 1) * size; ++j) group_lost += present[j] ? 0 : 1;
      if (group_lost == 1) {
        inc.d2d += np.rho_d2d * gamma_d2d;
        ++counts.repair_local;
      } else if (group_lost > 1 && global_ok) {
        inc.d2d += group_lost * np.rho_d2d * c.h * alpha;
        counts.repair_global += group_lost;
      } else if (group_lost > 1) {
        inc.bs += group_lost * bs_node;
        counts.repair_bs += group_lost;
      }
    }
    return inc;
  }

  if (survivors >= c.r) {
    inc.d2d = lost * np.rho_d2d * gamma_d2d;
    counts.repair_d2d += lost;
    return inc;
  }
  const double partial_bs = np.rho_bs * (c.r - survivors) * beta;
  const double partial_d2d = np.rho_d2d * survivors * beta;
  if (scheme == Scheme::Hybrid && survivors > 0 && partial_bs + partial_d2d < bs_node) {
    inc.bs = lost * partial_bs;
    inc.d2d = lost * partial_d2d;
    counts.repair_partial += lost;
    return inc;
  }
  inc.bs = lost * bs_node;
  counts.repair_bs += lost;
  return inc;
}

CostIncrement request_event(int available, const NetworkParams& np, const CodeSpec& c,
                            Scheme scheme, BranchCounts& counts) {
  CostIncrement inc;
  const double alpha = c.alpha();
  const double bs_cost = np.rho_bs * c.F;
  if (bs_cost < np.rho_d2d * c.h * alpha) {
    inc.bs = bs_cost;
    ++counts.download_bs;
    return inc;
  }
  if (available >= c.h) {
    inc.d2d = np.rho_d2d * c.h * alpha;
    ++counts.download_d2d;
    return inc;
  }
  const double partial_bs = np.rho_bs * (c.h - available) * alpha;
  const double partial_d2d = np.rho_d2d * available * alpha;
  if (scheme == Scheme::Hybrid && available > 0 && partial_bs + partial_d2d < bs_cost) {
    inc.bs = partial_bs;
    inc.d2d = partial_d2d;
    ++counts.download_partial;
    return inc;
  }
  inc.bs = bs_cost;
  ++counts.download_bs;
  return inc;
}

SimResult run(const SimConfig& config) {
  config.validate();
  if (config.trace != nullptr) {
    config.trace->precision(12);
    *config.trace << "time,event,value,cost_bs,cost_d2d\n";
  }
  Simulation sim(config);
  return sim.run();
}

}  // namespace d2dstore
