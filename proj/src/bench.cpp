#include "hidegl/bench.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>

#include "hidegl/baselines.hpp"
#include "hidegl/error.hpp"
#include "hidegl/graph.hpp"
#include "hidegl/hdp.hpp"
#include "hidegl/infer.hpp"

namespace hidegl {
namespace {

struct MethodInfo {
  Method method;
  const char* id;
};

constexpr std::array<MethodInfo, 7> kMethods{{
    {Method::hidegl_l_accurate, "hidegl-l-accurate"},
    {Method::hidegl_l_approx, "hidegl-l-approx"},
    {Method::hidegl_a_accurate, "hidegl-a-accurate"},
    {Method::hidegl_a_approx, "hidegl-a-approx"},
    {Method::lgc, "lgc"},
    {Method::agr_gauss, "agr-gauss"},
    {Method::agr_lae, "agr-lae"},
}};

struct HyperField {
  const char* key;
  bool integral;
  std::function<double(const Hyperparameters&)> get;
  std::function<void(Hyperparameters&, double)> set;
};

#define HIDEGL_REAL(name) \
  HyperField { #name, false, [](const Hyperparameters& h) { return h.name; }, [](Hyperparameters& h, double v) { h.name = v; } }
#define HIDEGL_INT(name)                                                                    \
  HyperField {                                                                              \
    #name, true, [](const Hyperparameters& h) { return static_cast<double>(h.name); },      \
        [](Hyperparameters& h, double v) { h.name = static_cast<decltype(h.name)>(v); } \
  }

const std::vector<HyperField>& fields() {
  static const std::vector<HyperField> f{
      HIDEGL_INT(k),           HIDEGL_REAL(sigma),        HIDEGL_REAL(lambda1),   HIDEGL_REAL(lambda2),
      HIDEGL_REAL(eta),        HIDEGL_REAL(alpha),        HIDEGL_INT(hdp_iters),  HIDEGL_REAL(hdp_tol),
      HIDEGL_INT(kmeans_iters), HIDEGL_INT(kmeans_restarts), HIDEGL_REAL(cg_tol), HIDEGL_INT(cg_max_iters),
      HIDEGL_INT(s_hat),       HIDEGL_REAL(h),            HIDEGL_REAL(gamma),     HIDEGL_INT(lae_iters),
      HIDEGL_REAL(lae_tol),    HIDEGL_INT(knn),           HIDEGL_REAL(mu),
  };
  return f;
}

#undef HIDEGL_REAL
#undef HIDEGL_INT

const HyperField& field(const std::string& key) {
  for (const auto& f : fields())
    if (key == f.key) return f;
  throw UsageError("unknown hyperparameter '" + key + "'");
}

bool uses_cg(Method m) { return m == Method::hidegl_l_accurate || m == Method::hidegl_l_approx; }

GraphVariant variant_of(Method m) {
  return m == Method::hidegl_l_accurate || m == Method::hidegl_a_accurate ? GraphVariant::exact
                                                                          : GraphVariant::approx;
}

std::string key_of(std::initializer_list<double> parts) {
  std::string out;
  char buf[32];
  for (double p : parts) {
    std::snprintf(buf, sizeof buf, "%.17g|", p);
    out += buf;
  }
  return out;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void mean_sd(const std::vector<double>& v, double& mean, double& sd) {
  mean = v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  sd = 0.0;
  if (v.size() < 2) return;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
}

constexpr std::size_t kModelCacheCap = 64;

template <class Map>
void bound_cache(Map& m) {
  if (m.size() >= kModelCacheCap) m.clear();
}

}  // namespace

const char* method_id(Method m) noexcept {
  for (const auto& info : kMethods)
    if (info.method == m) return info.id;
  return "?";
}

Method parse_method(const std::string& id) {
  for (const auto& info : kMethods)
    if (id == info.id) return info.method;
  throw UsageError("unknown method '" + id + "'");
}

bool is_hidegl(Method m) noexcept {
  return m == Method::hidegl_l_accurate || m == Method::hidegl_l_approx || m == Method::hidegl_a_accurate ||
         m == Method::hidegl_a_approx;
}

const std::vector<std::string>& hyperparameter_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> out;
    for (const auto& f : fields()) out.emplace_back(f.key);
    return out;
  }();
  return keys;
}

std::vector<std::string> method_keys(Method m) {
  if (is_hidegl(m)) {
    std::vector<std::string> keys{"k", "sigma", "lambda1", "lambda2", "eta", "alpha",
                                  "hdp_iters", "hdp_tol", "kmeans_iters", "kmeans_restarts"};
    if (uses_cg(m)) keys.insert(keys.end(), {"cg_tol", "cg_max_iters"});
    return keys;
  }
  switch (m) {
    case Method::lgc:
      return {"sigma", "knn", "mu"};
    case Method::agr_gauss:
      return {"k", "s_hat", "h", "gamma", "kmeans_iters", "kmeans_restarts"};
    case Method::agr_lae:
      return {"k", "s_hat", "gamma", "lae_iters", "lae_tol", "kmeans_iters", "kmeans_restarts"};
    default:
      return {};
  }
}

double get_hyper(const Hyperparameters& hp, const std::string& key) { return field(key).get(hp); }

void set_hyper(Hyperparameters& hp, const std::string& key, double value) {
  const HyperField& f = field(key);
  if (f.integral && (value != std::floor(value) || std::abs(value) > 1e9))
    throw InvalidArgument("hyperparameter '" + key + "' must be an integer");
  f.set(hp, value);
}

Dataset load_run_dataset(const DatasetSpec& spec) {
  return spec.path.empty() ? gen_three_moon(spec.threemoon) : load_dataset(spec.path);
}

void validate(const RunConfig& cfg, Index n, int c) {
  const auto keys = method_keys(cfg.method);
  for (const auto& key : cfg.set_keys) {
    field(key);
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw UsageError("hyperparameter '" + key + "' is not used by method " + method_id(cfg.method));
  }
  if (cfg.repeats < 1) throw InvalidArgument("repeats must be >= 1");
  if (cfg.label_counts.empty()) throw InvalidArgument("at least one label count is required");

  const Hyperparameters& hp = cfg.hp;
  auto require = [&](const char* key, bool ok, const char* domain) {
    if (std::find(keys.begin(), keys.end(), key) != keys.end() && !ok)
      throw InvalidArgument(std::string("hyperparameter '") + key + "' must be " + domain);
  };
  require("k", hp.k >= 2 && (n == 0 || hp.k <= n), "in [2, n]");
  require("sigma", hp.sigma > 0.0, "> 0");
  require("lambda1", hp.lambda1 >= 0.0, ">= 0");
  require("lambda2", hp.lambda2 > 0.0, "> 0");
  require("eta", hp.eta >= 0.0, ">= 0");
  require("alpha", hp.alpha > 0.0 && hp.alpha < 1.0, "in (0, 1)");
  require("hdp_iters", hp.hdp_iters >= 0, ">= 0");
  require("hdp_tol", hp.hdp_tol > 0.0, "> 0");
  require("kmeans_iters", hp.kmeans_iters >= 1, ">= 1");
  require("kmeans_restarts", hp.kmeans_restarts >= 1, ">= 1");
  require("cg_tol", hp.cg_tol > 0.0, "> 0");
  require("cg_max_iters", hp.cg_max_iters >= 1, ">= 1");
  require("s_hat", hp.s_hat >= 1 && hp.s_hat <= hp.k, "in [1, k]");
  require("h", hp.h > 0.0, "> 0");
  require("gamma", hp.gamma > 0.0, "> 0");
  require("lae_iters", hp.lae_iters >= 1, ">= 1");
  require("lae_tol", hp.lae_tol > 0.0, "> 0");
  require("knn", hp.knn >= 1 && (n == 0 || hp.knn < n), "in [1, n)");
  require("mu", hp.mu > 0.0, "> 0");

  if (n > 0) {
    for (Index l : cfg.label_counts)
      if (l < std::max(c, 1) || l >= n)
        throw InvalidArgument("label count " + std::to_string(l) + " must lie in [c, n)");
  }
}

RunConfig run_config_from(const KeyValueConfig& kv, ParamGrid* grid) {
  static const std::vector<std::string> run_keys{"dataset", "n_per_class", "ambient_dim", "noise_sd", "data_seed",
                                                 "method",  "labels",      "repeats",     "seed",     "out",
                                                 "timing"};
  const auto& hkeys = hyperparameter_keys();
  for (const auto& [key, value] : kv.entries()) {
    (void)value;
    if (std::find(run_keys.begin(), run_keys.end(), key) == run_keys.end() &&
        std::find(hkeys.begin(), hkeys.end(), key) == hkeys.end())
      throw UsageError("unknown config key '" + key + "'");
  }

  RunConfig cfg;
  const std::string dataset = kv.get_string("dataset", "threemoon");
  if (dataset != "threemoon") cfg.data.path = dataset;
  cfg.data.threemoon.n_per_class = kv.get_int("n_per_class", cfg.data.threemoon.n_per_class);
  cfg.data.threemoon.ambient_dim = kv.get_int("ambient_dim", cfg.data.threemoon.ambient_dim);
  cfg.data.threemoon.noise_sd = kv.get_double("noise_sd", cfg.data.threemoon.noise_sd);
  cfg.data.threemoon.seed = kv.get_uint("data_seed", cfg.data.threemoon.seed);
  cfg.method = parse_method(kv.get_string("method", method_id(cfg.method)));
  cfg.label_counts.clear();
  for (auto l : kv.get_ints("labels", {3})) cfg.label_counts.push_back(static_cast<Index>(l));
  cfg.repeats = static_cast<int>(kv.get_int("repeats", cfg.repeats));
  cfg.master_seed = kv.get_uint("seed", cfg.master_seed);
  cfg.out = kv.get_string("out", "");
  cfg.record_timing = kv.get_bool("timing", true);

  if (grid) grid->clear();
  for (const auto& key : hkeys) {
    if (!kv.has(key)) continue;
    const auto values = kv.get_doubles(key, {});
    if (values.empty()) throw UsageError("hyperparameter '" + key + "' has no value");
    cfg.set_keys.push_back(key);
    set_hyper(cfg.hp, key, values.front());
    if (values.size() > 1) {
      if (!grid) throw UsageError("hyperparameter '" + key + "' lists several values; use the grid command");
      grid->push_back({key, values});
    }
  }
  return cfg;
}

std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> parts) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t h = mix(master);
  for (std::uint64_t p : parts) h = mix(h ^ mix(p));
  return h;
}

std::uint64_t label_seed(std::uint64_t master, Index l, int r) {
  return derive_seed(master, {0x6c6162656cULL, static_cast<std::uint64_t>(l), static_cast<std::uint64_t>(r)});
}

std::uint64_t init_seed(std::uint64_t master) { return derive_seed(master, {0x696e6974ULL}); }

double BenchReport::mean_accuracy() const {
  if (entries.empty()) return 0.0;
  double s = 0.0;
  for (const auto& e : entries) s += e.mean;
  return s / static_cast<double>(entries.size());
}

struct BenchSession::Cache {
  std::map<std::string, Eigen::MatrixXd> kmeans;
  std::map<std::string, std::shared_ptr<const HdpModel>> hdp;
  struct FactorEntry {
    std::shared_ptr<const GraphFactor> factor;
    double seconds = 0.0;
  };
  std::string factor_key;
  FactorEntry factor;
  struct ZEntry {
    std::shared_ptr<const Eigen::MatrixXd> Z;
    double seconds = 0.0;
  };
  std::map<std::string, ZEntry> anchor_z;
  struct LgcEntry {
    std::shared_ptr<const LgcDense> model;
    double seconds = 0.0;
  };
  std::map<std::string, LgcEntry> lgc;
};

BenchSession::BenchSession(Dataset ds, std::string name)
    : ds_(std::move(ds)), name_(std::move(name)), cache_(std::make_unique<Cache>()) {
  validate(ds_);
  if (!ds_.has_labels()) throw InvalidArgument("benchmarking requires a labeled dataset");
}

BenchSession::~BenchSession() = default;

BenchReport BenchSession::run(const RunConfig& cfg) {
  validate(cfg, ds_.n(), ds_.c());
  const Hyperparameters& hp = cfg.hp;
  Cache& cache = *cache_;

  BenchReport report;
  report.method = method_id(cfg.method);
  report.dataset = name_;
  report.n = ds_.n();
  report.c = ds_.c();
  report.master_seed = cfg.master_seed;
  report.repeats = cfg.repeats;
  for (const auto& key : method_keys(cfg.method)) report.hyperparameters[key] = get_hyper(hp, key);

  const std::uint64_t kseed = init_seed(cfg.master_seed);
  const std::string kmeans_key = key_of({static_cast<double>(hp.k), static_cast<double>(hp.kmeans_iters),
                                         static_cast<double>(hp.kmeans_restarts), static_cast<double>(kseed)});
  auto centers = [&]() -> const Eigen::MatrixXd& {
    auto it = cache.kmeans.find(kmeans_key);
    if (it == cache.kmeans.end()) {
      bound_cache(cache.kmeans);
      KMeansOptions opts{hp.kmeans_iters, hp.kmeans_restarts, kseed};
      it = cache.kmeans.emplace(kmeans_key, kmeans(ds_.features, hp.k, opts).centers).first;
    }
    return it->second;
  };

  std::function<Prediction(const LabelState&)> predict;
  double graph_seconds = 0.0;

  if (is_hidegl(cfg.method)) {
    const std::string hdp_key = kmeans_key + key_of({hp.sigma, hp.lambda1, static_cast<double>(hp.hdp_iters), hp.hdp_tol});
    auto it = cache.hdp.find(hdp_key);
    if (it == cache.hdp.end()) {
      HdpConfig hcfg;
      hcfg.k = hp.k;
      hcfg.sigma = hp.sigma;
      hcfg.lambda1 = hp.lambda1;
      hcfg.max_outer_iters = hp.hdp_iters;
      hcfg.tol = hp.hdp_tol;
      hcfg.kmeans = {hp.kmeans_iters, hp.kmeans_restarts, kseed};
      const Eigen::MatrixXd& C0 = centers();
      bound_cache(cache.hdp);
      it = cache.hdp.emplace(hdp_key, std::make_shared<const HdpModel>(fit_hdp_from(ds_, hcfg, C0))).first;
    }
    const std::shared_ptr<const HdpModel> model = it->second;
    const GraphVariant variant = variant_of(cfg.method);
    const std::string fkey = hdp_key + key_of({hp.alpha, hp.eta, static_cast<double>(variant)});
    if (cache.factor_key != fkey) {
      const auto t0 = Clock::now();
      auto factor = std::make_shared<const GraphFactor>(build_factor(model->Z, model->tree, hp.alpha, hp.eta, variant));
      cache.factor = {std::move(factor), seconds_since(t0)};
      cache.factor_key = fkey;
    }
    const auto factor = cache.factor.factor;
    graph_seconds = model->fit_seconds + cache.factor.seconds;
    InferConfig icfg;
    icfg.lambda2 = hp.lambda2;
    icfg.cg = {hp.cg_tol, hp.cg_max_iters};
    icfg.method = uses_cg(cfg.method) ? InferMethod::lgc_cg : InferMethod::agr_closed_form;
    predict = [factor, icfg](const LabelState& labels) { return infer_labels(*factor, labels, icfg); };
  } else if (cfg.method == Method::lgc) {
    const std::string key = key_of({static_cast<double>(hp.knn), hp.sigma, hp.mu});
    auto it = cache.lgc.find(key);
    if (it == cache.lgc.end()) {
      bound_cache(cache.lgc);
      const auto t0 = Clock::now();
      auto model = std::make_shared<const LgcDense>(ds_.features, hp.knn, hp.sigma, hp.mu);
      it = cache.lgc.emplace(key, Cache::LgcEntry{std::move(model), seconds_since(t0)}).first;
    }
    const auto model = it->second.model;
    graph_seconds = it->second.seconds;
    predict = [model](const LabelState& labels) { return model->predict(labels); };
  } else {
    const bool lae = cfg.method == Method::agr_lae;
    const std::string key =
        kmeans_key + key_of({static_cast<double>(lae), static_cast<double>(hp.s_hat), lae ? 0.0 : hp.h,
                             lae ? static_cast<double>(hp.lae_iters) : 0.0, lae ? hp.lae_tol : 0.0});
    auto it = cache.anchor_z.find(key);
    if (it == cache.anchor_z.end()) {
      AnchorSet anchors{centers(), hp.s_hat, hp.h};
      const auto t0 = Clock::now();
      auto Z = std::make_shared<const Eigen::MatrixXd>(
          lae ? agr_lae_z(ds_.features, anchors, PgOptions{hp.lae_iters, hp.lae_tol})
              : agr_gauss_z(ds_.features, anchors));
      bound_cache(cache.anchor_z);
      it = cache.anchor_z.emplace(key, Cache::ZEntry{std::move(Z), seconds_since(t0)}).first;
    }
    const auto Z = it->second.Z;
    graph_seconds = it->second.seconds;
    const double gamma = hp.gamma;
    predict = [Z, gamma](const LabelState& labels) { return agr_predict(Z, labels, gamma); };
  }

  report.graph_seconds = cfg.record_timing ? graph_seconds : 0.0;
  for (Index l : cfg.label_counts) {
    BenchEntry entry;
    entry.l = l;
    for (int r = 0; r < cfg.repeats; ++r) {
      const std::uint64_t seed = label_seed(cfg.master_seed, l, r);
      const LabelState labels = draw_label_set(ds_, l, seed);
      const auto t0 = Clock::now();
      const Prediction pred = predict(labels);
      const double dt = seconds_since(t0);
      entry.seeds.push_back(seed);
      entry.accuracies.push_back(accuracy(pred, ds_));
      entry.seconds.push_back(cfg.record_timing ? graph_seconds + dt : 0.0);
    }
    mean_sd(entry.accuracies, entry.mean, entry.sd);
    mean_sd(entry.seconds, entry.time_mean, entry.time_sd);
    report.entries.push_back(std::move(entry));
  }
  return report;
}

namespace {

std::string dataset_name(const DatasetSpec& spec) {
  if (!spec.path.empty()) return spec.path;
  const auto& t = spec.threemoon;
  char buf[160];
  std::snprintf(buf, sizeof buf, "three-moon(n_per_class=%lld,ambient_dim=%lld,noise_sd=%g,seed=%llu)",
                static_cast<long long>(t.n_per_class), static_cast<long long>(t.ambient_dim), t.noise_sd,
                static_cast<unsigned long long>(t.seed));
  return buf;
}

}  // namespace

BenchReport run_bench(const RunConfig& cfg) {
  validate(cfg);
  BenchSession session(load_run_dataset(cfg.data), dataset_name(cfg.data));
  return session.run(cfg);
}

GridResult grid_search(BenchSession& session, const RunConfig& base, const ParamGrid& grid) {
  std::size_t cells = 1;
  for (const auto& axis : grid) {
    field(axis.key);
    if (axis.values.empty()) throw UsageError("grid axis '" + axis.key + "' is empty");
    cells *= axis.values.size();
  }

  auto cell_config = [&](const std::vector<std::size_t>& idx) {
    RunConfig cfg = base;
    for (std::size_t a = 0; a < grid.size(); ++a) {
      set_hyper(cfg.hp, grid[a].key, grid[a].values[idx[a]]);
      if (std::find(cfg.set_keys.begin(), cfg.set_keys.end(), grid[a].key) == cfg.set_keys.end())
        cfg.set_keys.push_back(grid[a].key);
    }
    return cfg;
  };
  auto advance = [&](std::vector<std::size_t>& idx) {
    for (std::size_t a = grid.size(); a-- > 0;) {
      if (++idx[a] < grid[a].values.size()) return;
      idx[a] = 0;
    }
  };

  // Every cell is checked before any compute.
  std::vector<std::size_t> idx(grid.size(), 0);
  for (std::size_t c = 0; c < cells; ++c, advance(idx)) validate(cell_config(idx), session.dataset().n(), session.dataset().c());

  GridResult result;
  double best = -1.0;
  std::fill(idx.begin(), idx.end(), 0);
  for (std::size_t c = 0; c < cells; ++c, advance(idx)) {
    RunConfig cfg = cell_config(idx);
    BenchReport report = session.run(cfg);
    GridCell cell;
    for (std::size_t a = 0; a < grid.size(); ++a) cell.values.push_back(grid[a].values[idx[a]]);
    cell.mean_accuracy = report.mean_accuracy();
    result.cells.push_back(cell);
    if (cell.mean_accuracy > best) {
      best = cell.mean_accuracy;
      result.best = std::move(cfg);
      result.report = std::move(report);
    }
  }
  return result;
}

GridResult grid_search(const RunConfig& base, const ParamGrid& grid) {
  validate(base);
  BenchSession session(load_run_dataset(base.data), dataset_name(base.data));
  return grid_search(session, base, grid);
}

}  // namespace hidegl
