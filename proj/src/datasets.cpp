#include "desketch/datasets.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "desketch/errors.hpp"
#include "desketch/problem.hpp"
#include "desketch/rng.hpp"

namespace desketch {

Preprocessing preprocessing_from_string(const std::string& s) {
  if (s == "none") return Preprocessing::none;
  if (s == "standardize" || s == "standardize_columns") return Preprocessing::standardize_columns;
  if (s == "intercept" || s == "add_intercept") return Preprocessing::add_intercept;
  throw InputError("unknown preprocessing: " + s);
}

const char* to_string(Preprocessing p) {
  switch (p) {
    case Preprocessing::none: return "none";
    case Preprocessing::standardize_columns: return "standardize_columns";
    case Preprocessing::add_intercept: return "add_intercept";
  }
  return "?";
}

void standardize_columns(Eigen::MatrixXd& X) {
  const double n = static_cast<double>(X.rows());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double mean = X.col(j).mean();
    X.col(j).array() -= mean;
    const double var = X.col(j).squaredNorm() / n;
    if (var > 1e-24) {
      X.col(j) /= std::sqrt(var);
    } else {
      X.col(j).setZero();
    }
  }
}

namespace {

void apply_preprocessing(Dataset& ds) {
  switch (ds.preprocessing) {
    case Preprocessing::none:
      break;
    case Preprocessing::standardize_columns:
      standardize_columns(ds.X);
      break;
    case Preprocessing::add_intercept: {
      Eigen::MatrixXd augmented(ds.X.rows(), ds.X.cols() + 1);
      augmented << ds.X, Eigen::VectorXd::Ones(ds.X.rows());
      ds.X = std::move(augmented);
      break;
    }
  }
}

double parse_number(const std::string& token, const std::string& path, std::size_t line_no) {
  std::size_t consumed = 0;
  double value = 0.0;
  try {
    value = std::stod(token, &consumed);
  } catch (const std::exception&) {
    throw ParseError(path, line_no, "non-numeric field '" + token + "'");
  }
  if (consumed != token.size()) {
    throw ParseError(path, line_no, "non-numeric field '" + token + "'");
  }
  return value;
}

Dataset load_csv(const std::string& path, std::ifstream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string token;
    while (std::getline(ss, token, ',')) {
      row.push_back(parse_number(token, path, line_no));
    }
    if (row.size() < 2) throw ParseError(path, line_no, "need at least one feature and a target");
    if (width == 0) width = row.size();
    if (row.size() != width) throw ParseError(path, line_no, "ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(path, 0, "empty file");
  Dataset ds;
  ds.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width - 1));
  ds.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j + 1 < width; ++j) {
      ds.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    ds.y[static_cast<Eigen::Index>(i)] = rows[i][width - 1];
  }
  return ds;
}

Dataset load_libsvm(const std::string& path, std::ifstream& in) {
  struct Row {
    double label;
    std::vector<std::pair<Eigen::Index, double>> features;  // 0-based
  };
  std::vector<Row> rows;
  Eigen::Index max_index = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string token;
    if (!(ss >> token)) continue;
    Row row;
    row.label = parse_number(token, path, line_no);
    while (ss >> token) {
      const auto colon = token.find(':');
      if (colon == std::string::npos) throw ParseError(path, line_no, "expected index:value");
      const double idx_val = parse_number(token.substr(0, colon), path, line_no);
      const auto idx = static_cast<Eigen::Index>(idx_val);
      if (idx < 1 || static_cast<double>(idx) != idx_val) {
        throw ParseError(path, line_no, "indices must be positive integers");
      }
      row.features.emplace_back(idx - 1, parse_number(token.substr(colon + 1), path, line_no));
      max_index = std::max(max_index, idx);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(path, 0, "empty file");
  Dataset ds;
  ds.X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows.size()), max_index);
  ds.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    ds.y[static_cast<Eigen::Index>(i)] = rows[i].label;
    for (const auto& [j, v] : rows[i].features) ds.X(static_cast<Eigen::Index>(i), j) = v;
  }
  return ds;
}

}  // namespace

Dataset load_dataset(const std::string& path, DataFormat format,
                     Preprocessing preprocessing) {
  std::ifstream in(path);
  if (!in) throw IoError(path, "cannot open");
  Dataset ds = format == DataFormat::csv ? load_csv(path, in) : load_libsvm(path, in);
  ds.name = path;
  ds.preprocessing = preprocessing;
  apply_preprocessing(ds);
  return ds;
}

Dataset make_synthetic_regression(Eigen::Index n, Eigen::Index d, double noise,
                                  std::uint64_t seed) {
  RngStream rng = RngStream::derive(seed, {0xda7a, 1});
  Dataset ds;
  ds.name = "synthetic-reg";
  ds.X.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) ds.X(i, j) = rng.gaussian();
  // Mildly anisotropic columns so leverage scores are not all equal.
  for (Eigen::Index j = 0; j < d; ++j) {
    ds.X.col(j) *= 1.0 + 2.0 * static_cast<double>(j) / std::max<Eigen::Index>(1, d - 1);
  }
  Eigen::VectorXd planted(d);
  for (Eigen::Index j = 0; j < d; ++j) planted[j] = rng.gaussian();
  ds.y = ds.X * planted;
  for (Eigen::Index i = 0; i < n; ++i) ds.y[i] += noise * rng.gaussian();
  return ds;
}

Dataset make_boston_like() {
  const Eigen::Index n = 506, d = 40;
  RngStream rng = RngStream::derive(0xb057, {static_cast<std::uint64_t>(n),
                                             static_cast<std::uint64_t>(d)});
  Dataset ds;
  ds.name = "boston-like";
  ds.X.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) ds.X(i, j) = rng.gaussian();
  // Decaying column scales give a spread-out spectrum before calibration.
  for (Eigen::Index j = 0; j < d; ++j) {
    ds.X.col(j) *= std::pow(0.85, static_cast<double>(j));
  }
  standardize_columns(ds.X);
  ds.preprocessing = Preprocessing::standardize_columns;

  // Bisection on a global scale: d_lambda(c X, 10) is monotone in c.
  const double lambda = 10.0;
  const double target = 29.7;
  double lo = 1e-3, hi = 1e3;
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (effective_dimension(mid * ds.X, lambda) < target) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi / lo < 1.0 + 1e-14) break;
  }
  ds.X *= std::sqrt(lo * hi);

  Eigen::VectorXd planted(d);
  for (Eigen::Index j = 0; j < d; ++j) planted[j] = rng.gaussian();
  ds.y = ds.X * planted;
  for (Eigen::Index i = 0; i < n; ++i) ds.y[i] += 0.5 * rng.gaussian();
  return ds;
}

Dataset make_binary_classification(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  RngStream rng = RngStream::derive(seed, {0xda7a, 2});
  Dataset ds;
  ds.name = "synthetic-logistic";
  ds.X.resize(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) ds.X(i, j) = rng.gaussian();
  for (Eigen::Index j = 0; j < d; ++j) {
    ds.X.col(j) *= 1.0 + static_cast<double>(j) / std::max<Eigen::Index>(1, d - 1);
  }
  Eigen::VectorXd planted(d);
  for (Eigen::Index j = 0; j < d; ++j) planted[j] = rng.gaussian() / std::sqrt(double(d));
  ds.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double z = ds.X.row(i).dot(planted);
    const double p = 1.0 / (1.0 + std::exp(-z));
    ds.y[i] = rng.bernoulli(p) ? 1.0 : 0.0;
  }
  return ds;
}

namespace {

std::map<std::string, std::string> parse_kv(const std::string& s) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw InputError("dataset spec: expected key=value in " + s);
    kv[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return kv;
}

std::uint64_t kv_u64(const std::map<std::string, std::string>& kv, const std::string& key,
                     std::uint64_t fallback) {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : std::stoull(it->second);
}

double kv_double(const std::map<std::string, std::string>& kv, const std::string& key,
                 double fallback) {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : std::stod(it->second);
}

}  // namespace

Dataset resolve_dataset(const std::string& spec, Preprocessing preprocessing) {
  const auto colon = spec.find(':');
  const std::string head = colon == std::string::npos ? spec : spec.substr(0, colon);
  const std::string tail = colon == std::string::npos ? "" : spec.substr(colon + 1);

  if (head == "csv") return load_dataset(tail, DataFormat::csv, preprocessing);
  if (head == "libsvm") return load_dataset(tail, DataFormat::libsvm, preprocessing);

  Dataset ds;
  if (head == "boston-like") {
    ds = make_boston_like();  // calibrated; ignores the preprocessing knob
    return ds;
  }
  if (head == "statlog-like") {
    ds = make_binary_classification(690, 14, 0x57a7);
  } else if (head == "synthetic-reg") {
    const auto kv = parse_kv(tail.empty() ? "n=500,d=10" : tail);
    ds = make_synthetic_regression(static_cast<Eigen::Index>(kv_u64(kv, "n", 500)),
                                   static_cast<Eigen::Index>(kv_u64(kv, "d", 10)),
                                   kv_double(kv, "noise", 1.0), kv_u64(kv, "seed", 1));
  } else if (head == "synthetic-logistic") {
    const auto kv = parse_kv(tail.empty() ? "n=690,d=14" : tail);
    ds = make_binary_classification(static_cast<Eigen::Index>(kv_u64(kv, "n", 690)),
                                    static_cast<Eigen::Index>(kv_u64(kv, "d", 14)),
                                    kv_u64(kv, "seed", 0x57a7));
  } else {
    throw InputError("unknown dataset spec: " + spec);
  }
  ds.preprocessing = preprocessing;
  apply_preprocessing(ds);
  return ds;
}

}  // namespace desketch
