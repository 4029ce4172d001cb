#pragma once

// Benchmark harness: repeated random label draws over one dataset, with fits shared across draws
// and across grid cells that agree on the label-independent stages.

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "hidegl/config.hpp"
#include "hidegl/dataset.hpp"

namespace hidegl {

enum class Method {
  hidegl_l_accurate,  // exact W, CG solve
  hidegl_l_approx,    // approximate W, CG solve
  hidegl_a_accurate,  // exact W, reduced closed form
  hidegl_a_approx,    // approximate W, reduced closed form
  lgc,
  agr_gauss,
  agr_lae,
};

const char* method_id(Method m) noexcept;
Method parse_method(const std::string& id);
bool is_hidegl(Method m) noexcept;

struct Hyperparameters {
  // HiDeGL
  Index k = 200;
  double sigma = 0.1;  // also the LGC affinity bandwidth
  double lambda1 = 1.0;
  double lambda2 = 0.01;
  double eta = 0.1;
  double alpha = 0.5;
  int hdp_iters = 50;
  double hdp_tol = 1e-4;
  int kmeans_iters = 100;
  int kmeans_restarts = 3;
  double cg_tol = 1e-8;
  int cg_max_iters = 1000;
  // AGR
  int s_hat = 3;
  double h = 0.5;
  double gamma = 0.01;  // takes the lambda2 slot of the reduced solver
  int lae_iters = 2000;
  double lae_tol = 1e-12;
  // LGC
  int knn = 10;
  double mu = 0.01;
};

/// Hyperparameter keys in canonical (grid) order.
const std::vector<std::string>& hyperparameter_keys();
/// Keys that method reads.
std::vector<std::string> method_keys(Method m);
double get_hyper(const Hyperparameters& hp, const std::string& key);
/// Integer keys must receive integral values. Throws UsageError for unknown keys.
void set_hyper(Hyperparameters& hp, const std::string& key, double value);

struct DatasetSpec {
  std::string path;  // empty: generate three-moon
  ThreeMoonSpec threemoon;
};

Dataset load_run_dataset(const DatasetSpec& spec);

struct RunConfig {
  DatasetSpec data;
  Method method = Method::hidegl_l_approx;
  Hyperparameters hp;
  std::vector<std::string> set_keys;  // hyperparameters given explicitly
  std::vector<Index> label_counts{3};
  int repeats = 10;
  std::uint64_t master_seed = 0;
  std::string out;
  bool record_timing = true;
};

/// Throws UsageError when an explicitly set key is not read by the method, and
/// InvalidArgument when a value is outside its domain. n, c: dataset size and class count
/// (0 skips the data-dependent checks).
void validate(const RunConfig& cfg, Index n = 0, int c = 0);

struct GridAxis {
  std::string key;
  std::vector<double> values;
};
using ParamGrid = std::vector<GridAxis>;

/// Reads a RunConfig from a flat config. Hyperparameter keys holding a comma list become grid
/// axes (returned through grid when given, a UsageError otherwise).
RunConfig run_config_from(const KeyValueConfig& kv, ParamGrid* grid = nullptr);

/// splitmix64 finalizer folded over the parts; stable across platforms and builds.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> parts);
/// Seed for the label draw of repeat r at label count l.
std::uint64_t label_seed(std::uint64_t master, Index l, int r);
/// Seed for label-independent initialization (k-means).
std::uint64_t init_seed(std::uint64_t master);

struct BenchEntry {
  Index l = 0;
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation, 0 for one repeat
  double time_mean = 0.0;
  double time_sd = 0.0;
  std::vector<double> accuracies;
  std::vector<double> seconds;  // graph build + inference per repeat
  std::vector<std::uint64_t> seeds;

  bool operator==(const BenchEntry&) const = default;
};

struct BenchReport {
  std::string method;
  std::string dataset;
  Index n = 0;
  int c = 0;
  std::uint64_t master_seed = 0;
  int repeats = 0;
  std::map<std::string, double> hyperparameters;  // keys read by the method
  double graph_seconds = 0.0;                     // shared label-independent stages, excl. k-means
  std::vector<BenchEntry> entries;

  /// Mean of the entry means; the grid-search objective.
  double mean_accuracy() const;
  bool operator==(const BenchReport&) const = default;
};

/// Holds one dataset and caches the label-independent fits (k-means, HDP models, anchor sets,
/// Z matrices, LGC factorizations) across runs.
class BenchSession {
 public:
  explicit BenchSession(Dataset ds, std::string name = "dataset");
  ~BenchSession();
  BenchSession(const BenchSession&) = delete;
  BenchSession& operator=(const BenchSession&) = delete;

  const Dataset& dataset() const noexcept { return ds_; }
  BenchReport run(const RunConfig& cfg);

 private:
  struct Cache;
  Dataset ds_;
  std::string name_;
  std::unique_ptr<Cache> cache_;
};

BenchReport run_bench(const RunConfig& cfg);

struct GridCell {
  std::vector<double> values;  // one per axis
  double mean_accuracy = 0.0;
};

struct GridResult {
  RunConfig best;
  BenchReport report;
  std::vector<GridCell> cells;  // in evaluation (lexicographic) order
};

/// Exhaustive search; the first axis varies slowest. Ties keep the earlier cell.
GridResult grid_search(BenchSession& session, const RunConfig& base, const ParamGrid& grid);
GridResult grid_search(const RunConfig& base, const ParamGrid& grid);

}  // namespace hidegl
