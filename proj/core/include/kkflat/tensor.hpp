#pragma once

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "kkflat/errors.hpp"

namespace kkflat {

// Row-major dense component array of arbitrary rank. Rank 0 = scalar.
template <typename T>
class MultiArray {
 public:
  MultiArray() = default;
  explicit MultiArray(std::vector<int> dims, T init = T{})
      : dims_(std::move(dims)) {
    std::size_t n = 1;
    for (int d : dims_) {
      if (d < 0) throw DimensionError("MultiArray dims must be non-negative");
      n *= static_cast<std::size_t>(d);
    }
    data_.assign(n, init);
  }

  int rank() const { return static_cast<int>(dims_.size()); }
  const std::vector<int>& dims() const { return dims_; }
  int dim(int slot) const { return dims_[slot]; }
  std::size_t size() const { return data_.size(); }

  std::span<T> flat() { return data_; }
  std::span<const T> flat() const { return data_; }
  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::size_t offset(std::span<const int> idx) const {
    std::size_t off = 0;
    for (int s = 0; s < rank(); ++s) off = off * dims_[s] + idx[s];
    return off;
  }

  template <typename... I>
  T& at(I... idx) {
    const int ix[] = {static_cast<int>(idx)...};
    return data_[offset(std::span<const int>(ix, sizeof...(idx)))];
  }
  template <typename... I>
  const T& at(I... idx) const {
    const int ix[] = {static_cast<int>(idx)...};
    return data_[offset(std::span<const int>(ix, sizeof...(idx)))];
  }

  void fill(const T& v) { data_.assign(data_.size(), v); }

 private:
  std::vector<int> dims_;
  std::vector<T> data_;
};

// Walks all multi-indices of a MultiArray shape in row-major order.
class IndexIter {
 public:
  explicit IndexIter(std::span<const int> dims)
      : dims_(dims.begin(), dims.end()), idx_(dims.size(), 0) {
    for (int d : dims_) done_ |= (d == 0);
  }
  bool done() const { return done_; }
  std::span<const int> operator*() const { return idx_; }
  void next() {
    for (int s = static_cast<int>(idx_.size()) - 1; s >= 0; --s) {
      if (++idx_[s] < dims_[s]) return;
      idx_[s] = 0;
    }
    done_ = true;
  }

 private:
  std::vector<int> dims_;
  std::vector<int> idx_;
  bool done_ = false;
};

enum class Variance : std::uint8_t { Up, Down };
enum class Block : std::uint8_t { Total, External, Internal, Algebra };

std::string to_string(Variance v);
std::string to_string(Block b);

// A multi-index component array at a point, tagged per slot with index
// variance and the coordinate block the slot ranges over.
class DenseTensor {
 public:
  DenseTensor() = default;
  DenseTensor(std::vector<int> dims, std::vector<Variance> variance,
              std::vector<Block> blocks);
  // All slots share one dimension/variance/block.
  static DenseTensor uniform(int rank, int dim, Variance v,
                             Block b = Block::Total);

  int rank() const { return comps_.rank(); }
  int dim(int slot) const { return comps_.dim(slot); }
  Variance variance(int slot) const { return variance_[slot]; }
  Block block(int slot) const { return blocks_[slot]; }
  const std::vector<Variance>& variances() const { return variance_; }
  const std::vector<Block>& blocks() const { return blocks_; }

  MultiArray<double>& comps() { return comps_; }
  const MultiArray<double>& comps() const { return comps_; }

  template <typename... I>
  double& at(I... idx) { return comps_.at(idx...); }
  template <typename... I>
  double at(I... idx) const { return comps_.at(idx...); }

  double max_abs() const;

  DenseTensor& operator+=(const DenseTensor& o);
  DenseTensor& operator-=(const DenseTensor& o);
  DenseTensor& operator*=(double s);
  friend DenseTensor operator+(DenseTensor a, const DenseTensor& b) {
    a += b;
    return a;
  }
  friend DenseTensor operator-(DenseTensor a, const DenseTensor& b) {
    a -= b;
    return a;
  }
  friend DenseTensor operator*(DenseTensor a, double s) {
    a *= s;
    return a;
  }
  friend DenseTensor operator*(double s, DenseTensor a) {
    a *= s;
    return a;
  }

 private:
  void check_compatible(const DenseTensor& o) const;

  MultiArray<double> comps_;
  std::vector<Variance> variance_;
  std::vector<Block> blocks_;
};

// Trace over one up and one down slot of equal dimension and equal block.
DenseTensor contract(const DenseTensor& t, int slot_up, int slot_down);

// Flip the variance of one slot using the metric (to lower) or its inverse
// (to raise). Both directions are supplied so that round trips stay exact to
// the same factorization.
DenseTensor raise_lower(const DenseTensor& t, int slot,
                        const DenseTensor& metric,
                        const DenseTensor& inverse_metric);

enum class BracketKind { Antisym, Sym };

// t_{[IJ]} = (t_{IJ} - t_{JI})/2 or t_{(IJ)} = (t_{IJ} + t_{JI})/2 on the
// named slot pair.
DenseTensor brackets(const DenseTensor& t, int slot_a, int slot_b,
                     BracketKind kind);

}  // namespace kkflat
