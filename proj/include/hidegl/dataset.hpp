#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace hidegl {

using Index = Eigen::Index;

/// Column-oriented samples: features is d x n, one point per column.
struct Dataset {
  Eigen::MatrixXd features;
  /// Class id per column in [0, c); empty for unlabeled data.
  std::vector<int> labels;
  /// Original label token for each class id (e.g. "7" in a LIBSVM file).
  std::vector<std::string> class_names;

  Index n() const noexcept { return features.cols(); }
  Index d() const noexcept { return features.rows(); }
  int c() const noexcept { return static_cast<int>(class_names.size()); }
  bool has_labels() const noexcept { return !labels.empty(); }
};

/// Throws InvalidArgument if shapes, label ids or feature values are out of contract.
void validate(const Dataset& ds);

/// `label idx:val ...` lines with 1-based ascending indices; d is the largest index seen.
/// Labels are remapped to [0, c) in ascending order (numeric when every label is numeric).
Dataset parse_libsvm(std::istream& in);
Dataset load_libsvm(const std::filesystem::path& path);
void write_libsvm(const Dataset& ds, std::ostream& out);

/// `label,f1,...,fd` rows; an optional header line is skipped when it does not parse.
Dataset parse_csv(std::istream& in);
Dataset load_csv(const std::filesystem::path& path);
void write_csv(const Dataset& ds, std::ostream& out, bool header = false);

/// Dispatches on extension: .csv is CSV, anything else LIBSVM.
Dataset load_dataset(const std::filesystem::path& path);

struct ThreeMoonSpec {
  Index n_per_class = 500;
  Index ambient_dim = 100;
  double noise_sd = 0.14;
  std::uint64_t seed = 0;
};

/// Class 0 on the upper half circle centered (1.5, 0.4) with radius 1.5, classes 1 and 2 on
/// lower half unit circles centered (0, 0) and (3, 0). Angles are uniform over each half circle;
/// the 2-D points are zero-padded to ambient_dim and every coordinate receives N(0, noise_sd^2).
Dataset gen_three_moon(const ThreeMoonSpec& spec);

/// Labeled/unlabeled partition with the one-hot target matrix.
struct LabelState {
  int c = 0;
  std::vector<Index> labeled_idx;    // ascending
  std::vector<Index> unlabeled_idx;  // ascending complement
  Eigen::MatrixXd Y;                 // n x c; zero rows for unlabeled points

  Index n() const noexcept { return Y.rows(); }
  Index l() const noexcept { return static_cast<Index>(labeled_idx.size()); }
};

/// Builds a LabelState from explicit indices using the dataset's ground truth.
LabelState make_label_state(const Dataset& ds, std::vector<Index> labeled);

/// Uniformly samples l labeled points without replacement, resampling until every class has at
/// least one labeled point. Deterministic in (ds, l, seed).
LabelState draw_label_set(const Dataset& ds, Index l, std::uint64_t seed);

}  // namespace hidegl
