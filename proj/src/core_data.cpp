#include "mcc/core_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string_view>

#include "mcc/error.hpp"
#include "format.hpp"

namespace mcc {

namespace {

void write_joined(std::ostream& os, const std::vector<int>& values, char sep) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) os << sep;
    os << values[i];
  }
}

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(ws);
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_on(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

bool parse_int(std::string_view text, long long& out) {
  if (text.empty()) return false;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

bool parse_real(std::string_view text, double& out) {
  if (text.empty()) return false;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && ptr == end && std::isfinite(out);
}

// Header: L=<int>;K=<int>,...;D=<int>
struct Header {
  std::vector<int> class_counts;
  std::size_t dim = 0;
};

Header parse_header(std::string_view line, std::size_t line_no) {
  const auto fields = split_on(line, ';');
  if (fields.size() != 3 || !fields[0].starts_with("L=") || !fields[1].starts_with("K=") ||
      !fields[2].starts_with("D=")) {
    throw ParseError(line_no, "malformed header, expected L=<int>;K=<int>,...;D=<int>");
  }
  long long num_labels = 0;
  long long dim = 0;
  if (!parse_int(fields[0].substr(2), num_labels) || num_labels < 1) {
    throw ParseError(line_no, "malformed header: L must be a positive integer");
  }
  if (!parse_int(fields[2].substr(2), dim) || dim < 0) {
    throw ParseError(line_no, "malformed header: D must be a non-negative integer");
  }
  Header header;
  header.dim = static_cast<std::size_t>(dim);
  for (auto k : split_on(fields[1].substr(2), ',')) {
    long long value = 0;
    if (!parse_int(k, value) || value < 2 || value > std::numeric_limits<int>::max()) {
      throw ParseError(line_no, "malformed header: every K must be an integer >= 2");
    }
    header.class_counts.push_back(static_cast<int>(value));
  }
  if (header.class_counts.size() != static_cast<std::size_t>(num_labels)) {
    throw ParseError(line_no, "malformed header: L=" + std::to_string(num_labels) + " but " +
                                  std::to_string(header.class_counts.size()) + " K values");
  }
  return header;
}

}  // namespace

std::ostream& operator<<(std::ostream& os, const LabelVector& y) {
  os << '[';
  write_joined(os, y.values(), ',');
  return os << ']';
}

std::ostream& operator<<(std::ostream& os, const LabelOrder& s) {
  os << '[';
  write_joined(os, s.perm(), ',');
  return os << ']';
}

LabelSpace::LabelSpace(std::vector<int> class_counts) : class_counts_(std::move(class_counts)) {
  if (class_counts_.empty()) throw ArgumentError("label space needs at least one label");
  for (int k : class_counts_) {
    if (k < 2) throw ArgumentError("every label needs at least 2 classes, got " + std::to_string(k));
  }
}

std::optional<std::uint64_t> LabelSpace::total_paths(std::uint64_t cap) const {
  std::uint64_t total = 1;
  for (int k : class_counts_) {
    const auto kk = static_cast<std::uint64_t>(k);
    if (total > cap / kk) return std::nullopt;
    total *= kk;
  }
  if (total > cap) return std::nullopt;
  return total;
}

bool LabelSpace::contains(const LabelVector& y) const {
  if (y.size() != class_counts_.size()) return false;
  for (std::size_t l = 0; l < y.size(); ++l) {
    if (y[l] < 1 || y[l] > class_counts_[l]) return false;
  }
  return true;
}

void LabelSpace::validate(const LabelVector& y) const {
  if (y.size() != class_counts_.size()) {
    throw StructuralError("label vector has " + std::to_string(y.size()) + " entries, expected " +
                          std::to_string(class_counts_.size()));
  }
  for (std::size_t l = 0; l < y.size(); ++l) {
    if (y[l] < 1 || y[l] > class_counts_[l]) {
      throw ArgumentError("label " + std::to_string(l + 1) + " value " + std::to_string(y[l]) +
                          " outside 1.." + std::to_string(class_counts_[l]));
    }
  }
}

LabelOrder::LabelOrder(std::vector<int> perm) : perm_(std::move(perm)) {
  std::vector<bool> seen(perm_.size(), false);
  for (int v : perm_) {
    if (v < 1 || static_cast<std::size_t>(v) > perm_.size() || seen[v - 1]) {
      throw ArgumentError("label order is not a permutation of 1.." + std::to_string(perm_.size()));
    }
    seen[v - 1] = true;
  }
}

LabelOrder LabelOrder::identity(std::size_t num_labels) {
  std::vector<int> perm(num_labels);
  std::iota(perm.begin(), perm.end(), 1);
  return LabelOrder(std::move(perm));
}

LabelOrder LabelOrder::random(std::size_t num_labels, Rng& rng) {
  std::vector<int> perm(num_labels);
  std::iota(perm.begin(), perm.end(), 1);
  for (std::size_t i = num_labels; i > 1; --i) {
    std::swap(perm[i - 1], perm[uniform_index(rng, i)]);
  }
  return LabelOrder(std::move(perm));
}

LabelOrder LabelOrder::inverse() const {
  std::vector<int> inv(perm_.size());
  for (std::size_t i = 0; i < perm_.size(); ++i) inv[perm_[i] - 1] = static_cast<int>(i) + 1;
  return LabelOrder(std::move(inv));
}

LabelOrder LabelOrder::swapped(std::size_t i, std::size_t j) const {
  auto perm = perm_;
  std::swap(perm.at(i), perm.at(j));
  return LabelOrder(std::move(perm));
}

LabelVector permute_labels(const LabelVector& y, const LabelOrder& s) {
  if (y.size() != s.size()) {
    throw StructuralError("cannot permute a label vector of length " + std::to_string(y.size()) +
                          " by an order of length " + std::to_string(s.size()));
  }
  std::vector<int> out(y.size());
  for (std::size_t l = 0; l < y.size(); ++l) out[l] = y[s[l] - 1];
  return LabelVector(std::move(out));
}

Dataset::Dataset(LabelSpace space, std::size_t dim, std::vector<Instance> instances)
    : space_(std::move(space)), dim_(dim), instances_(std::move(instances)) {
  for (std::size_t n = 0; n < instances_.size(); ++n) {
    const auto& inst = instances_[n];
    if (inst.features.size() != dim_) {
      throw StructuralError("instance " + std::to_string(n) + " has " +
                            std::to_string(inst.features.size()) + " features, expected " +
                            std::to_string(dim_));
    }
    space_.validate(inst.labels);
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  std::vector<Instance> picked;
  picked.reserve(indices.size());
  for (auto i : indices) picked.push_back(instances_.at(i));
  return Dataset(space_, dim_, std::move(picked));
}

Dataset parse_dataset(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::optional<Header> header;
  std::vector<Instance> instances;

  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    if (!header) {
      header = parse_header(text, line_no);
      continue;
    }
    const auto fields = split_on(text, ',');
    const auto num_labels = header->class_counts.size();
    if (fields.size() != num_labels + header->dim) {
      throw ParseError(line_no, "expected " + std::to_string(num_labels + header->dim) +
                                    " fields, found " + std::to_string(fields.size()));
    }
    Instance inst;
    std::vector<int> labels(num_labels);
    for (std::size_t l = 0; l < num_labels; ++l) {
      long long v = 0;
      if (!parse_int(fields[l], v)) {
        throw ParseError(line_no, "label " + std::to_string(l + 1) + " is not an integer");
      }
      if (v < 1 || v > header->class_counts[l]) {
        throw ParseError(line_no, "label " + std::to_string(l + 1) + " value " +
                                      std::to_string(v) + " outside 1.." +
                                      std::to_string(header->class_counts[l]));
      }
      labels[l] = static_cast<int>(v);
    }
    inst.labels = LabelVector(std::move(labels));
    inst.features.resize(header->dim);
    for (std::size_t d = 0; d < header->dim; ++d) {
      if (!parse_real(fields[num_labels + d], inst.features[d])) {
        throw ParseError(line_no, "feature " + std::to_string(d + 1) + " is not a finite real");
      }
    }
    instances.push_back(std::move(inst));
  }
  if (!header) throw ParseError(0, "missing header");
  if (instances.empty()) throw ParseError(0, "no instances");
  return Dataset(LabelSpace(header->class_counts), header->dim, std::move(instances));
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file " + path.string());
  return parse_dataset(in);
}

void write_dataset(std::ostream& out, const Dataset& data) {
  const auto& ks = data.space().class_counts();
  out << "L=" << ks.size() << ";K=";
  write_joined(out, ks, ',');
  out << ";D=" << data.dim() << '\n';
  for (const auto& inst : data.instances()) {
    write_joined(out, inst.labels.values(), ',');
    for (double v : inst.features) out << ',' << detail::format_real(v);
    out << '\n';
  }
}

void save_dataset(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write dataset file " + path.string());
  write_dataset(out, data);
}

std::pair<Dataset, Dataset> split(const Dataset& data, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw ArgumentError("split fraction must lie in (0, 1)");
  }
  if (data.size() < 2) throw ArgumentError("split needs at least 2 instances");
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[uniform_index(rng, i)]);
  const auto first = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(data.size())));
  const std::span<const std::size_t> all(idx);
  return {data.subset(all.first(first)), data.subset(all.subspan(first))};
}

}  // namespace mcc
