#pragma once

// Domain types for multi-dimensional classification.
//
// Indexing convention: C++ containers are 0-based, domain values are 1-based.
// A LabelVector y stores y_l at y[l-1] with y_l in {1..K_l}; a LabelOrder s
// stores s_l at s[l-1] with s_l in {1..L}.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mcc/random.hpp"

namespace mcc {

class LabelVector {
 public:
  LabelVector() = default;
  explicit LabelVector(std::vector<int> values) : values_(std::move(values)) {}
  LabelVector(std::initializer_list<int> values) : values_(values) {}

  std::size_t size() const noexcept { return values_.size(); }
  int operator[](std::size_t i) const { return values_[i]; }
  int& operator[](std::size_t i) { return values_[i]; }
  const std::vector<int>& values() const noexcept { return values_; }

  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  friend bool operator==(const LabelVector&, const LabelVector&) = default;
  friend auto operator<=>(const LabelVector&, const LabelVector&) = default;

 private:
  std::vector<int> values_;
};

std::ostream& operator<<(std::ostream& os, const LabelVector& y);

class LabelSpace {
 public:
  // Default cap used by total_paths() when the caller does not supply one.
  static constexpr std::uint64_t kDefaultPathCap = std::uint64_t{1} << 40;

  explicit LabelSpace(std::vector<int> class_counts);

  std::size_t num_labels() const noexcept { return class_counts_.size(); }
  int classes(std::size_t label_index) const { return class_counts_[label_index]; }
  const std::vector<int>& class_counts() const noexcept { return class_counts_; }

  // Product of class counts, or nullopt when it exceeds cap (or overflows).
  std::optional<std::uint64_t> total_paths(std::uint64_t cap = kDefaultPathCap) const;

  bool contains(const LabelVector& y) const;
  // Throws StructuralError (length) or ArgumentError (class range).
  void validate(const LabelVector& y) const;

  friend bool operator==(const LabelSpace&, const LabelSpace&) = default;

 private:
  std::vector<int> class_counts_;
};

class LabelOrder {
 public:
  // Throws ArgumentError unless perm is a bijection on {1..L}.
  explicit LabelOrder(std::vector<int> perm);
  LabelOrder(std::initializer_list<int> perm) : LabelOrder(std::vector<int>(perm)) {}

  static LabelOrder identity(std::size_t num_labels);
  static LabelOrder random(std::size_t num_labels, Rng& rng);

  std::size_t size() const noexcept { return perm_.size(); }
  // Label (1-based) placed at chain position i (0-based).
  int operator[](std::size_t i) const { return perm_[i]; }
  const std::vector<int>& perm() const noexcept { return perm_; }

  LabelOrder inverse() const;
  // Returns a copy with the contents of positions i and j (0-based) swapped.
  LabelOrder swapped(std::size_t i, std::size_t j) const;

  friend bool operator==(const LabelOrder&, const LabelOrder&) = default;
  friend auto operator<=>(const LabelOrder&, const LabelOrder&) = default;

 private:
  std::vector<int> perm_;
};

std::ostream& operator<<(std::ostream& os, const LabelOrder& s);

// y_s[l] = y[s_l].
LabelVector permute_labels(const LabelVector& y, const LabelOrder& s);

struct Instance {
  std::vector<double> features;
  LabelVector labels;
};

class Dataset {
 public:
  // Validates every instance against space and dim. An empty instance list is
  // allowed in memory (a split may produce one); files must hold at least one.
  Dataset(LabelSpace space, std::size_t dim, std::vector<Instance> instances);

  const LabelSpace& space() const noexcept { return space_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return instances_.size(); }
  bool empty() const noexcept { return instances_.empty(); }
  const Instance& operator[](std::size_t n) const { return instances_[n]; }
  const std::vector<Instance>& instances() const noexcept { return instances_; }

  Dataset subset(std::span<const std::size_t> indices) const;

 private:
  LabelSpace space_;
  std::size_t dim_;
  std::vector<Instance> instances_;
};

Dataset parse_dataset(std::istream& in);
Dataset load_dataset(const std::filesystem::path& path);
void write_dataset(std::ostream& out, const Dataset& data);
void save_dataset(const std::filesystem::path& path, const Dataset& data);

// Seeded shuffle, then the first round(fraction * N) shuffled instances form
// the first part and the rest the second.
std::pair<Dataset, Dataset> split(const Dataset& data, double fraction, std::uint64_t seed);

}  // namespace mcc
