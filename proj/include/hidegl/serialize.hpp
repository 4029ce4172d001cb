#pragma once

// Model bundles for the CLI cache and text reports (JSON, CSV).

#include <filesystem>
#include <iosfwd>
#include <string>

#include "hidegl/bench.hpp"
#include "hidegl/graph.hpp"
#include "hidegl/hdp.hpp"
#include "hidegl/infer.hpp"

namespace hidegl {

/// Little-endian binary bundle: magic, config, C, Z, tree edges, objective trace.
void write_model(const HdpModel& model, std::ostream& out);
HdpModel read_model(std::istream& in);
void save_model(const HdpModel& model, const std::filesystem::path& path);
HdpModel load_model(const std::filesystem::path& path);

/// A model plus the graph parameters; the factor itself is rebuilt on load (k x k work).
struct FactorBundle {
  HdpModel model;
  double alpha = 0.5;
  double eta = 0.1;
  GraphVariant variant = GraphVariant::exact;

  GraphFactor build() const;
};

void write_factor_bundle(const FactorBundle& bundle, std::ostream& out);
FactorBundle read_factor_bundle(std::istream& in);

/// `index,predicted_class,max_score`, one row per unlabeled point.
void write_prediction_csv(const Prediction& pred, std::ostream& out);
std::string prediction_to_json(const Prediction& pred);

std::string spectral_report_to_json(const SpectralReport& report);

std::string report_to_json(const BenchReport& report);
BenchReport report_from_json(const std::string& text);
/// `method,l,mean,sd,time_mean,time_sd`, one row per label count.
void write_report_csv(const BenchReport& report, std::ostream& out, bool header = true);

std::string grid_result_to_json(const GridResult& result, const ParamGrid& grid);

}  // namespace hidegl
