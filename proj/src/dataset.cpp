#include "hidegl/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string_view>

#include "hidegl/error.hpp"

namespace hidegl {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_double(std::string_view tok, double& out) {
  tok = trim(tok);
  if (tok.empty()) return false;
  if (tok.front() == '+') tok.remove_prefix(1);
  const auto* end = tok.data() + tok.size();
  const auto res = std::from_chars(tok.data(), end, out);
  return res.ec == std::errc{} && res.ptr == end;
}

struct RawSample {
  std::string label;
  std::vector<std::pair<Index, double>> entries;  // 0-based index
};

// Maps label tokens to contiguous ids, ascending numerically when every token is a number.
void assign_labels(Dataset& ds, const std::vector<std::string>& tokens) {
  std::vector<std::string> uniq(tokens);
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  const bool numeric = std::all_of(uniq.begin(), uniq.end(), [](const std::string& s) {
    double v;
    return parse_double(s, v);
  });
  if (numeric) {
    std::sort(uniq.begin(), uniq.end(), [](const std::string& a, const std::string& b) {
      double x = 0, y = 0;
      parse_double(a, x);
      parse_double(b, y);
      return x < y;
    });
  }
  std::map<std::string, int> id;
  for (std::size_t i = 0; i < uniq.size(); ++i) id[uniq[i]] = static_cast<int>(i);
  ds.class_names = uniq;
  ds.labels.resize(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) ds.labels[i] = id[tokens[i]];
}

std::string label_token(const Dataset& ds, Index i) {
  const int y = ds.labels[static_cast<std::size_t>(i)];
  if (static_cast<std::size_t>(y) < ds.class_names.size()) return ds.class_names[y];
  return std::to_string(y);
}

}  // namespace

void validate(const Dataset& ds) {
  if (ds.n() < 1 || ds.d() < 1) throw InvalidArgument("dataset must have n >= 1 and d >= 1");
  if (!ds.features.allFinite()) throw InvalidArgument("dataset features contain NaN or Inf");
  if (ds.has_labels()) {
    if (static_cast<Index>(ds.labels.size()) != ds.n())
      throw InvalidArgument("label vector length does not match n");
    for (int y : ds.labels)
      if (y < 0 || y >= ds.c()) throw InvalidArgument("label id out of range [0, c)");
  }
}

Dataset parse_libsvm(std::istream& in) {
  std::vector<RawSample> samples;
  Index d = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = trim(line);
    if (const auto hash = sv.find('#'); hash != std::string_view::npos) sv = trim(sv.substr(0, hash));
    if (sv.empty()) continue;

    std::istringstream fields{std::string(sv)};
    RawSample s;
    fields >> s.label;
    double tmp;
    if (!parse_double(s.label, tmp)) {
      // Non-numeric class names are allowed as long as they are not feature pairs.
      if (s.label.find(':') != std::string::npos) throw ParseError("missing label", lineno);
    }
    Index last = 0;
    std::string tok;
    while (fields >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos) throw ParseError("expected idx:val, got '" + tok + "'", lineno);
      long long idx = 0;
      const auto ir = std::from_chars(tok.data(), tok.data() + colon, idx);
      if (ir.ec != std::errc{} || ir.ptr != tok.data() + colon || idx < 1)
        throw ParseError("invalid feature index in '" + tok + "'", lineno);
      if (idx <= last) throw ParseError("feature indices must be ascending", lineno);
      double val = 0;
      if (!parse_double(std::string_view(tok).substr(colon + 1), val))
        throw ParseError("invalid feature value in '" + tok + "'", lineno);
      if (!std::isfinite(val)) throw ParseError("non-finite feature value", lineno);
      last = static_cast<Index>(idx);
      s.entries.emplace_back(last - 1, val);
    }
    d = std::max(d, last);
    samples.push_back(std::move(s));
  }
  if (samples.empty()) throw ParseError("no samples", 0);
  if (d == 0) throw ParseError("no features", 0);

  Dataset ds;
  ds.features = Eigen::MatrixXd::Zero(d, static_cast<Index>(samples.size()));
  std::vector<std::string> tokens;
  tokens.reserve(samples.size());
  for (std::size_t j = 0; j < samples.size(); ++j) {
    for (const auto& [i, v] : samples[j].entries) ds.features(i, static_cast<Index>(j)) = v;
    tokens.push_back(samples[j].label);
  }
  assign_labels(ds, tokens);
  return ds;
}

Dataset load_libsvm(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return parse_libsvm(in);
}

void write_libsvm(const Dataset& ds, std::ostream& out) {
  out << std::setprecision(17);
  for (Index j = 0; j < ds.n(); ++j) {
    out << (ds.has_labels() ? label_token(ds, j) : std::string("0"));
    for (Index i = 0; i < ds.d(); ++i) {
      const double v = ds.features(i, j);
      if (v != 0.0) out << ' ' << (i + 1) << ':' << v;
    }
    // Keep d recoverable when trailing features are zero.
    if (ds.features(ds.d() - 1, j) == 0.0) out << ' ' << ds.d() << ":0";
    out << '\n';
  }
}

Dataset parse_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::vector<std::string> tokens;
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view sv = trim(line);
    if (sv.empty()) continue;
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
      const auto comma = sv.find(',', start);
      cells.push_back(trim(sv.substr(start, comma == std::string_view::npos ? sv.npos : comma - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (cells.size() < 2) throw ParseError("expected label and at least one feature", lineno);
    std::vector<double> vals(cells.size() - 1);
    bool ok = true;
    for (std::size_t c = 1; c < cells.size(); ++c) ok = ok && parse_double(cells[c], vals[c - 1]);
    if (!ok) {
      if (rows.empty() && tokens.empty()) continue;  // header
      throw ParseError("invalid numeric field", lineno);
    }
    for (double v : vals)
      if (!std::isfinite(v)) throw ParseError("non-finite feature value", lineno);
    if (width == 0) width = vals.size();
    if (vals.size() != width) throw ParseError("inconsistent column count", lineno);
    rows.push_back(std::move(vals));
    tokens.emplace_back(cells[0]);
  }
  if (rows.empty()) throw ParseError("no samples", 0);
  Dataset ds;
  ds.features.resize(static_cast<Index>(width), static_cast<Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j)
    for (std::size_t i = 0; i < width; ++i) ds.features(static_cast<Index>(i), static_cast<Index>(j)) = rows[j][i];
  assign_labels(ds, tokens);
  return ds;
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return parse_csv(in);
}

void write_csv(const Dataset& ds, std::ostream& out, bool header) {
  out << std::setprecision(17);
  if (header) {
    out << "label";
    for (Index i = 0; i < ds.d(); ++i) out << ",f" << (i + 1);
    out << '\n';
  }
  for (Index j = 0; j < ds.n(); ++j) {
    out << (ds.has_labels() ? label_token(ds, j) : std::string("0"));
    for (Index i = 0; i < ds.d(); ++i) out << ',' << ds.features(i, j);
    out << '\n';
  }
}

Dataset load_dataset(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? load_csv(path) : load_libsvm(path);
}

Dataset gen_three_moon(const ThreeMoonSpec& spec) {
  if (spec.ambient_dim < 2) throw InvalidArgument("ambient_dim must be >= 2");
  if (!(spec.noise_sd >= 0.0)) throw InvalidArgument("noise_sd must be >= 0");
  if (spec.n_per_class < 1) throw InvalidArgument("n_per_class must be >= 1");

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
  std::normal_distribution<double> noise(0.0, spec.noise_sd);

  struct Arc {
    double cx, cy, r;
    bool upper;
  };
  constexpr Arc arcs[3] = {{1.5, 0.4, 1.5, true}, {0.0, 0.0, 1.0, false}, {3.0, 0.0, 1.0, false}};

  const Index n = 3 * spec.n_per_class;
  Dataset ds;
  ds.features = Eigen::MatrixXd::Zero(spec.ambient_dim, n);
  ds.labels.resize(static_cast<std::size_t>(n));
  ds.class_names = {"0", "1", "2"};
  Index j = 0;
  for (int cls = 0; cls < 3; ++cls) {
    const Arc& a = arcs[cls];
    for (Index p = 0; p < spec.n_per_class; ++p, ++j) {
      const double t = angle(rng) + (a.upper ? 0.0 : std::numbers::pi);
      ds.features(0, j) = a.cx + a.r * std::cos(t);
      ds.features(1, j) = a.cy + a.r * std::sin(t);
      ds.labels[static_cast<std::size_t>(j)] = cls;
    }
  }
  if (spec.noise_sd > 0.0) {
    for (Index col = 0; col < n; ++col)
      for (Index i = 0; i < spec.ambient_dim; ++i) ds.features(i, col) += noise(rng);
  }
  return ds;
}

LabelState make_label_state(const Dataset& ds, std::vector<Index> labeled) {
  if (!ds.has_labels()) throw InvalidArgument("dataset has no labels");
  const Index n = ds.n();
  std::sort(labeled.begin(), labeled.end());
  if (std::adjacent_find(labeled.begin(), labeled.end()) != labeled.end())
    throw InvalidArgument("labeled indices must be distinct");
  if (!labeled.empty() && (labeled.front() < 0 || labeled.back() >= n))
    throw InvalidArgument("labeled index out of range");

  LabelState ls;
  ls.c = ds.c();
  ls.Y = Eigen::MatrixXd::Zero(n, ls.c);
  std::vector<char> is_labeled(static_cast<std::size_t>(n), 0);
  for (Index i : labeled) {
    is_labeled[static_cast<std::size_t>(i)] = 1;
    ls.Y(i, ds.labels[static_cast<std::size_t>(i)]) = 1.0;
  }
  ls.labeled_idx = std::move(labeled);
  for (Index i = 0; i < n; ++i)
    if (!is_labeled[static_cast<std::size_t>(i)]) ls.unlabeled_idx.push_back(i);
  return ls;
}

LabelState draw_label_set(const Dataset& ds, Index l, std::uint64_t seed) {
  if (!ds.has_labels()) throw InvalidArgument("dataset has no labels");
  const Index n = ds.n();
  const int c = ds.c();
  if (l < c) throw InvalidArgument("l must be at least the number of classes");
  if (l > n) throw InvalidArgument("l must not exceed n");

  std::mt19937_64 rng(seed);
  std::vector<Index> perm(static_cast<std::size_t>(n));
  constexpr int kMaxAttempts = 100000;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    for (Index i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    // Partial Fisher-Yates: the first l slots are a uniform l-subset.
    for (Index i = 0; i < l; ++i) {
      std::uniform_int_distribution<Index> pick(i, n - 1);
      std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(pick(rng))]);
    }
    std::vector<char> seen(static_cast<std::size_t>(c), 0);
    int covered = 0;
    for (Index i = 0; i < l; ++i) {
      const int y = ds.labels[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])];
      if (!seen[y]) {
        seen[y] = 1;
        ++covered;
      }
    }
    if (covered == c) return make_label_state(ds, std::vector<Index>(perm.begin(), perm.begin() + l));
  }
  throw InvalidArgument("could not draw a labeled set covering every class");
}

}  // namespace hidegl
