#include "hidegl/serialize.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "hidegl/error.hpp"

namespace hidegl {
namespace {

static_assert(std::endian::native == std::endian::little, "binary bundles assume a little-endian host");

constexpr char kModelMagic[8] = {'H', 'D', 'G', 'L', 'M', 'D', 'L', '1'};
constexpr char kFactorMagic[8] = {'H', 'D', 'G', 'L', 'F', 'A', 'C', '1'};

template <class T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T take(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw ParseError("truncated bundle", 0);
  return v;
}

void put_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  put<std::int64_t>(out, m.rows());
  put<std::int64_t>(out, m.cols());
  out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(sizeof(double) * m.size()));
}

Eigen::MatrixXd take_matrix(std::istream& in) {
  const auto rows = take<std::int64_t>(in);
  const auto cols = take<std::int64_t>(in);
  if (rows < 0 || cols < 0 || (rows > 0 && cols > (std::int64_t{1} << 40) / rows))
    throw ParseError("bundle matrix has an invalid shape", 0);
  Eigen::MatrixXd m(rows, cols);
  in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(sizeof(double) * m.size()));
  if (!in) throw ParseError("truncated bundle", 0);
  return m;
}

void expect_magic(std::istream& in, const char (&magic)[8]) {
  char buf[8];
  in.read(buf, 8);
  if (!in || std::memcmp(buf, magic, 8) != 0) throw ParseError("not a model bundle (bad magic)", 0);
}

void write_model_body(const HdpModel& m, std::ostream& out) {
  const HdpConfig& c = m.config;
  put<std::int64_t>(out, c.k);
  put<double>(out, c.sigma);
  put<double>(out, c.lambda1);
  put<std::int32_t>(out, c.max_outer_iters);
  put<double>(out, c.tol);
  put<std::int32_t>(out, c.kmeans.max_iters);
  put<std::int32_t>(out, c.kmeans.n_restarts);
  put<std::uint64_t>(out, c.kmeans.seed);
  put<std::int32_t>(out, m.iterations);
  put<std::uint8_t>(out, m.converged ? 1 : 0);
  put<double>(out, m.init_seconds);
  put<double>(out, m.fit_seconds);
  put_matrix(out, m.C);
  put_matrix(out, m.Z ? *m.Z : Eigen::MatrixXd());
  put<std::int64_t>(out, m.tree.k);
  put<std::int64_t>(out, static_cast<std::int64_t>(m.tree.edges.size()));
  for (const auto& [r, s] : m.tree.edges) {
    put<std::int64_t>(out, r);
    put<std::int64_t>(out, s);
  }
  put<std::int64_t>(out, static_cast<std::int64_t>(m.objective_trace.size()));
  for (double v : m.objective_trace) put<double>(out, v);
}

HdpModel read_model_body(std::istream& in) {
  HdpModel m;
  HdpConfig& c = m.config;
  c.k = take<std::int64_t>(in);
  c.sigma = take<double>(in);
  c.lambda1 = take<double>(in);
  c.max_outer_iters = take<std::int32_t>(in);
  c.tol = take<double>(in);
  c.kmeans.max_iters = take<std::int32_t>(in);
  c.kmeans.n_restarts = take<std::int32_t>(in);
  c.kmeans.seed = take<std::uint64_t>(in);
  m.iterations = take<std::int32_t>(in);
  m.converged = take<std::uint8_t>(in) != 0;
  m.init_seconds = take<double>(in);
  m.fit_seconds = take<double>(in);
  m.C = take_matrix(in);
  m.Z = std::make_shared<const Eigen::MatrixXd>(take_matrix(in));
  m.tree.k = take<std::int64_t>(in);
  const auto edges = take<std::int64_t>(in);
  if (edges < 0 || edges > m.tree.k) throw ParseError("bundle tree has an invalid edge count", 0);
  for (std::int64_t e = 0; e < edges; ++e) {
    const auto r = take<std::int64_t>(in);
    const auto s = take<std::int64_t>(in);
    if (r < 0 || s < 0 || r >= m.tree.k || s >= m.tree.k) throw ParseError("bundle tree edge out of range", 0);
    m.tree.edges.emplace_back(r, s);
  }
  const auto trace = take<std::int64_t>(in);
  if (trace < 0 || trace > (1 << 24)) throw ParseError("bundle objective trace has an invalid length", 0);
  for (std::int64_t t = 0; t < trace; ++t) m.objective_trace.push_back(take<double>(in));
  if (m.C.cols() != m.tree.k || m.Z->cols() != m.tree.k) throw ParseError("bundle shapes disagree", 0);
  return m;
}

nlohmann::json solver_stats_json(const SolverStats& s) {
  return {{"iterations", s.iterations}, {"residuals", s.residuals}, {"pseudo_inverse", s.pseudo_inverse}};
}

}  // namespace

void write_model(const HdpModel& model, std::ostream& out) {
  out.write(kModelMagic, 8);
  write_model_body(model, out);
}

HdpModel read_model(std::istream& in) {
  expect_magic(in, kModelMagic);
  return read_model_body(in);
}

void save_model(const HdpModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  write_model(model, out);
}

HdpModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path.string());
  return read_model(in);
}

GraphFactor FactorBundle::build() const { return build_factor(model.Z, model.tree, alpha, eta, variant); }

void write_factor_bundle(const FactorBundle& b, std::ostream& out) {
  out.write(kFactorMagic, 8);
  put<double>(out, b.alpha);
  put<double>(out, b.eta);
  put<std::int32_t>(out, static_cast<std::int32_t>(b.variant));
  write_model_body(b.model, out);
}

FactorBundle read_factor_bundle(std::istream& in) {
  expect_magic(in, kFactorMagic);
  FactorBundle b;
  b.alpha = take<double>(in);
  b.eta = take<double>(in);
  const auto v = take<std::int32_t>(in);
  if (v < 0 || v > 2) throw ParseError("bundle has an unknown graph variant", 0);
  b.variant = static_cast<GraphVariant>(v);
  b.model = read_model_body(in);
  return b;
}

void write_prediction_csv(const Prediction& pred, std::ostream& out) {
  out << "index,predicted_class,max_score\n";
  const auto old = out.precision(17);
  for (std::size_t i = 0; i < pred.indices.size(); ++i) {
    const auto row = static_cast<Index>(i);
    out << pred.indices[i] << ',' << pred.labels_u[i] << ',' << pred.F_u(row, pred.labels_u[i]) << '\n';
  }
  out.precision(old);
}

std::string prediction_to_json(const Prediction& pred) {
  nlohmann::json j;
  j["indices"] = pred.indices;
  j["predicted_class"] = pred.labels_u;
  std::vector<double> scores;
  for (std::size_t i = 0; i < pred.indices.size(); ++i)
    scores.push_back(pred.F_u(static_cast<Index>(i), pred.labels_u[i]));
  j["max_score"] = scores;
  j["solver_stats"] = solver_stats_json(pred.stats);
  return j.dump(2);
}

std::string spectral_report_to_json(const SpectralReport& r) {
  nlohmann::json j{
      {"n", r.n},
      {"k", r.k},
      {"alpha", r.alpha},
      {"eta", r.eta},
      {"variant", variant_name(r.variant)},
      {"P", {{"max_imag", r.p_max_imag}, {"min_eig", r.p_min_eig}, {"max_eig", r.p_max_eig},
             {"row_sum_residual", r.p_row_sum_residual}, {"ok", r.p_ok}}},
      {"P_tilde", {{"max_imag", r.ptilde_max_imag}, {"min_eig", r.ptilde_min_eig}, {"max_eig", r.ptilde_max_eig},
                   {"margin", r.ptilde_margin}, {"ok", r.ptilde_ok}}},
      {"commutation", {{"residual", r.commutation_residual}, {"ok", r.commutation_ok}}},
      {"W", {{"asymmetry", r.w_asymmetry}, {"min_entry", r.w_min_entry}, {"row_sum_min", r.row_sum_min},
             {"row_sum_max", r.row_sum_max}, {"row_sum_bound", r.row_sum_bound},
             {"laplacian_min_eig", r.laplacian_min_eig}, {"laplacian_max_eig", r.laplacian_max_eig},
             {"laplacian_bound", r.laplacian_bound}, {"ok", r.w_ok}}},
      {"all_ok", r.all_ok()},
  };
  return j.dump(2);
}

std::string report_to_json(const BenchReport& r) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"l", e.l},
                       {"mean", e.mean},
                       {"sd", e.sd},
                       {"time_mean", e.time_mean},
                       {"time_sd", e.time_sd},
                       {"accuracies", e.accuracies},
                       {"seconds", e.seconds},
                       {"seeds", e.seeds}});
  }
  nlohmann::json j{{"method", r.method},
                   {"dataset", r.dataset},
                   {"n", r.n},
                   {"c", r.c},
                   {"master_seed", r.master_seed},
                   {"repeats", r.repeats},
                   {"hyperparameters", r.hyperparameters},
                   {"graph_seconds", r.graph_seconds},
                   {"entries", entries}};
  return j.dump(2);
}

BenchReport report_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("report JSON: ") + e.what(), 0);
  }
  try {
    BenchReport r;
    r.method = j.at("method").get<std::string>();
    r.dataset = j.at("dataset").get<std::string>();
    r.n = j.at("n").get<Index>();
    r.c = j.at("c").get<int>();
    r.master_seed = j.at("master_seed").get<std::uint64_t>();
    r.repeats = j.at("repeats").get<int>();
    r.hyperparameters = j.at("hyperparameters").get<std::map<std::string, double>>();
    r.graph_seconds = j.at("graph_seconds").get<double>();
    for (const auto& e : j.at("entries")) {
      BenchEntry b;
      b.l = e.at("l").get<Index>();
      b.mean = e.at("mean").get<double>();
      b.sd = e.at("sd").get<double>();
      b.time_mean = e.at("time_mean").get<double>();
      b.time_sd = e.at("time_sd").get<double>();
      b.accuracies = e.at("accuracies").get<std::vector<double>>();
      b.seconds = e.at("seconds").get<std::vector<double>>();
      b.seeds = e.at("seeds").get<std::vector<std::uint64_t>>();
      r.entries.push_back(std::move(b));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("report JSON: ") + e.what(), 0);
  }
}

void write_report_csv(const BenchReport& r, std::ostream& out, bool header) {
  if (header) out << "method,l,mean,sd,time_mean,time_sd\n";
  const auto old = out.precision(17);
  for (const auto& e : r.entries)
    out << r.method << ',' << e.l << ',' << e.mean << ',' << e.sd << ',' << e.time_mean << ',' << e.time_sd << '\n';
  out.precision(old);
}

std::string grid_result_to_json(const GridResult& result, const ParamGrid& grid) {
  nlohmann::json axes = nlohmann::json::array();
  for (const auto& a : grid) axes.push_back({{"key", a.key}, {"values", a.values}});
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& c : result.cells) cells.push_back({{"values", c.values}, {"mean_accuracy", c.mean_accuracy}});
  nlohmann::json j{{"axes", axes},
                   {"cells", cells},
                   {"best", nlohmann::json::parse(report_to_json(result.report))}};
  return j.dump(2);
}

}  // namespace hidegl
