#include "thor/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <string>

#include "thor/net.hpp"

namespace thor {

void SyntheticSpec::validate() const {
  check_class_count(k);
  if (per_class < 1) throw InvalidArgument("per_class must be >= 1");
  if (d < 1) throw InvalidArgument("feature dimension must be >= 1");
  if (!(noise >= 0.0) || !std::isfinite(noise)) throw InvalidArgument("noise must be finite and >= 0");
  if (!(label_noise >= 0.0 && label_noise <= 0.5)) throw InvalidArgument("label_noise must lie in [0, 0.5]");
}

OrdinalDataset generate_synthetic(const SyntheticSpec& spec, std::vector<double>* latents) {
  spec.validate();
  std::mt19937_64 rng(spec.transform_seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Eigen::MatrixXd gauss(spec.d, spec.d);
  for (Eigen::Index r = 0; r < gauss.rows(); ++r) {
    for (Eigen::Index c = 0; c < gauss.cols(); ++c) gauss(r, c) = normal(rng);
  }
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(gauss).householderQ();

  const Eigen::Index n = static_cast<Eigen::Index>(spec.k) * spec.per_class;
  Eigen::MatrixXd features(n, spec.d);
  std::vector<RankLabel> labels;
  labels.reserve(static_cast<size_t>(n));
  if (latents != nullptr) latents->assign(static_cast<size_t>(n), 0.0);

  Eigen::VectorXd z(spec.d);
  Eigen::Index row = 0;
  for (int cls = 1; cls <= spec.k; ++cls) {
    for (int e = 0; e < spec.per_class; ++e, ++row) {
      const double latent = (cls - 1.5) + spec.noise * normal(rng);
      z(0) = latent;
      for (Eigen::Index j = 1; j < spec.d; ++j) z(j) = normal(rng);
      features.row(row) = (q * z).transpose();
      if (latents != nullptr) (*latents)[static_cast<size_t>(row)] = latent;

      int y = cls;
      if (unit(rng) < spec.label_noise) y = std::clamp(y + (unit(rng) < 0.5 ? -1 : 1), 1, spec.k);
      labels.emplace_back(y);
    }
  }
  return OrdinalDataset(std::move(features), std::move(labels), spec.k);
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    const size_t pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

}  // namespace

OrdinalDataset load_csv(const std::filesystem::path& path, int k, bool has_header) {
  check_class_count(k);
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path.string() + "'");

  std::vector<double> values;
  std::vector<RankLabel> labels;
  long dim = -1;
  long line_no = 0;
  bool header_pending = has_header;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (blank(line)) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    const auto fields = split_commas(line);
    const long d = static_cast<long>(fields.size()) - 1;
    if (d < 1) throw ParseError("line " + std::to_string(line_no) + ": need at least one feature and a label", line_no);
    if (dim < 0) dim = d;
    if (d != dim) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(dim + 1) +
                           " fields, got " + std::to_string(d + 1),
                       line_no);
    }
    for (long j = 0; j < d; ++j) {
      try {
        values.push_back(parse_double(fields[static_cast<size_t>(j)]));
      } catch (const InvalidArgument&) {
        throw ParseError("line " + std::to_string(line_no) + ", column " + std::to_string(j + 1) +
                             ": non-numeric feature '" + std::string(fields[static_cast<size_t>(j)]) + "'",
                         line_no);
      }
    }
    std::string_view lab = fields.back();
    while (!lab.empty() && (lab.back() == '\r' || lab.back() == ' ')) lab.remove_suffix(1);
    while (!lab.empty() && lab.front() == ' ') lab.remove_prefix(1);
    int y = 0;
    auto [ptr, ec] = std::from_chars(lab.data(), lab.data() + lab.size(), y);
    if (lab.empty() || ec != std::errc() || ptr != lab.data() + lab.size()) {
      throw ParseError("line " + std::to_string(line_no) + ": label '" + std::string(lab) + "' is not an integer",
                       line_no);
    }
    if (y < 1 || y > k) {
      throw ParseError("line " + std::to_string(line_no) + ": label " + std::to_string(y) + " outside 1.." +
                           std::to_string(k),
                       line_no);
    }
    labels.emplace_back(y);
  }
  if (labels.empty()) throw ParseError("'" + path.string() + "' contains no data rows", line_no);

  const auto n = static_cast<Eigen::Index>(labels.size());
  Eigen::MatrixXd features(n, dim);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < dim; ++c) features(r, c) = values[static_cast<size_t>(r * dim + c)];
  }
  return OrdinalDataset(std::move(features), std::move(labels), k);
}

void write_csv(const std::filesystem::path& path, const OrdinalDataset& ds, bool header) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write '" + path.string() + "'");
  if (header) {
    for (Eigen::Index j = 0; j < ds.dim(); ++j) out << 'f' << (j + 1) << ',';
    out << "label\n";
  }
  for (Eigen::Index r = 0; r < ds.size(); ++r) {
    for (Eigen::Index j = 0; j < ds.dim(); ++j) out << format_double(ds.features()(r, j)) << ',';
    out << ds.label(r).value << '\n';
  }
  if (!out) throw InvalidArgument("failed writing '" + path.string() + "'");
}

std::array<Eigen::Index, 3> split_sizes(Eigen::Index n, const SplitRatios& r) {
  const std::array<double, 3> ratio{r.train, r.val, r.test};
  std::array<Eigen::Index, 3> sizes{};
  std::array<double, 3> frac{};
  Eigen::Index assigned = 0;
  for (size_t s = 0; s < 3; ++s) {
    const double exact = ratio[s] * static_cast<double>(n);
    sizes[s] = static_cast<Eigen::Index>(std::floor(exact + 1e-9));
    frac[s] = exact - static_cast<double>(sizes[s]);
    assigned += sizes[s];
  }
  std::array<size_t, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) { return frac[a] > frac[b] + 1e-12; });
  for (size_t o = 0; assigned < n; ++o, ++assigned) ++sizes[order[o % 3]];
  return sizes;
}

DatasetSplits split(const OrdinalDataset& ds, const SplitRatios& ratios, std::uint64_t seed) {
  if (!(ratios.train > 0.0 && ratios.val > 0.0 && ratios.test > 0.0)) {
    throw InvalidArgument("split ratios must be positive");
  }
  if (std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9) {
    throw InvalidArgument("split ratios must sum to 1");
  }
  std::mt19937_64 rng(seed);
  std::array<std::vector<Eigen::Index>, 3> rows;
  auto by_class = ds.indices_by_class();
  for (size_t c = 0; c < by_class.size(); ++c) {
    auto& idx = by_class[c];
    const auto sizes = split_sizes(static_cast<Eigen::Index>(idx.size()), ratios);
    if (sizes[0] < 1) {
      const int label = static_cast<int>(c) + 1;
      throw UncoverableClass("class " + std::to_string(label) + " has too few examples (" +
                                 std::to_string(idx.size()) + ") to appear in the training split",
                             label);
    }
    std::shuffle(idx.begin(), idx.end(), rng);
    auto it = idx.begin();
    for (size_t s = 0; s < 3; ++s) {
      rows[s].insert(rows[s].end(), it, it + sizes[s]);
      it += sizes[s];
    }
  }
  return DatasetSplits{ds.subset(rows[0]), ds.subset(rows[1]), ds.subset(rows[2])};
}

}  // namespace thor
