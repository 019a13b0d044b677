#include "kkflat/tensor.hpp"

#include <algorithm>
#include <cmath>

#include "kkflat/linalg.hpp"

namespace kkflat {

std::string to_string(Variance v) { return v == Variance::Up ? "up" : "down"; }

std::string to_string(Block b) {
  switch (b) {
    case Block::Total: return "total";
    case Block::External: return "external";
    case Block::Internal: return "internal";
    case Block::Algebra: return "algebra";
  }
  return "?";
}

DenseTensor::DenseTensor(std::vector<int> dims, std::vector<Variance> variance,
                         std::vector<Block> blocks)
    : comps_(dims), variance_(std::move(variance)), blocks_(std::move(blocks)) {
  if (variance_.size() != dims.size() || blocks_.size() != dims.size())
    throw DimensionError("DenseTensor: metadata length must match rank");
}

DenseTensor DenseTensor::uniform(int rank, int dim, Variance v, Block b) {
  return DenseTensor(std::vector<int>(rank, dim),
                     std::vector<Variance>(rank, v),
                     std::vector<Block>(rank, b));
}

double DenseTensor::max_abs() const {
  double m = 0.0;
  for (double x : comps_.flat()) m = std::max(m, std::fabs(x));
  return m;
}

void DenseTensor::check_compatible(const DenseTensor& o) const {
  if (comps_.dims() != o.comps_.dims() || variance_ != o.variance_ ||
      blocks_ != o.blocks_)
    throw DimensionError("DenseTensor: incompatible operands");
}

DenseTensor& DenseTensor::operator+=(const DenseTensor& o) {
  check_compatible(o);
  for (std::size_t i = 0; i < comps_.size(); ++i) comps_[i] += o.comps_[i];
  return *this;
}

DenseTensor& DenseTensor::operator-=(const DenseTensor& o) {
  check_compatible(o);
  for (std::size_t i = 0; i < comps_.size(); ++i) comps_[i] -= o.comps_[i];
  return *this;
}

DenseTensor& DenseTensor::operator*=(double s) {
  for (std::size_t i = 0; i < comps_.size(); ++i) comps_[i] *= s;
  return *this;
}

DenseTensor contract(const DenseTensor& t, int slot_up, int slot_down) {
  const int r = t.rank();
  if (slot_up < 0 || slot_up >= r || slot_down < 0 || slot_down >= r ||
      slot_up == slot_down)
    throw DimensionError("contract: bad slot pair");
  if (t.variance(slot_up) != Variance::Up ||
      t.variance(slot_down) != Variance::Down)
    throw DimensionError("contract: need one up and one down slot");
  if (t.dim(slot_up) != t.dim(slot_down))
    throw DimensionError("contract: slot dimensions differ");
  if (t.block(slot_up) != t.block(slot_down))
    throw DimensionError("contract: slot blocks differ (" +
                         to_string(t.block(slot_up)) + " vs " +
                         to_string(t.block(slot_down)) + ")");

  std::vector<int> out_dims;
  std::vector<Variance> out_var;
  std::vector<Block> out_blk;
  for (int s = 0; s < r; ++s) {
    if (s == slot_up || s == slot_down) continue;
    out_dims.push_back(t.dim(s));
    out_var.push_back(t.variance(s));
    out_blk.push_back(t.block(s));
  }
  DenseTensor out(out_dims, out_var, out_blk);

  const int n = t.dim(slot_up);
  std::vector<int> idx(r, 0);
  for (IndexIter it(out.comps().dims()); !it.done(); it.next()) {
    auto oidx = *it;
    int k = 0;
    for (int s = 0; s < r; ++s) {
      if (s == slot_up || s == slot_down) continue;
      idx[s] = oidx[k++];
    }
    double sum = 0.0;
    for (int m = 0; m < n; ++m) {
      idx[slot_up] = m;
      idx[slot_down] = m;
      sum += t.comps().flat()[t.comps().offset(idx)];
    }
    out.comps().flat()[out.comps().offset(oidx)] = sum;
  }
  return out;
}

DenseTensor raise_lower(const DenseTensor& t, int slot,
                        const DenseTensor& metric,
                        const DenseTensor& inverse_metric) {
  const int r = t.rank();
  if (slot < 0 || slot >= r) throw DimensionError("raise_lower: bad slot");
  const bool lowering = t.variance(slot) == Variance::Up;
  const DenseTensor& m = lowering ? metric : inverse_metric;
  if (m.rank() != 2 || m.dim(0) != m.dim(1) || m.dim(0) != t.dim(slot))
    throw DimensionError("raise_lower: metric shape mismatch");

  DenseTensor out = t;
  std::vector<Variance> var = t.variances();
  var[slot] = lowering ? Variance::Down : Variance::Up;
  out = DenseTensor(t.comps().dims(), var, t.blocks());

  const int n = t.dim(slot);
  std::vector<int> idx(r, 0);
  for (IndexIter it(t.comps().dims()); !it.done(); it.next()) {
    auto oidx = *it;
    for (int s = 0; s < r; ++s) idx[s] = oidx[s];
    double sum = 0.0;
    for (int mm = 0; mm < n; ++mm) {
      idx[slot] = mm;
      sum += m.at(oidx[slot], mm) * t.comps().flat()[t.comps().offset(idx)];
    }
    out.comps().flat()[out.comps().offset(oidx)] = sum;
  }
  return out;
}

DenseTensor brackets(const DenseTensor& t, int slot_a, int slot_b,
                     BracketKind kind) {
  const int r = t.rank();
  if (slot_a < 0 || slot_a >= r || slot_b < 0 || slot_b >= r ||
      slot_a == slot_b)
    throw DimensionError("brackets: bad slot pair");
  if (t.dim(slot_a) != t.dim(slot_b) ||
      t.variance(slot_a) != t.variance(slot_b))
    throw DimensionError("brackets: slots must share dimension and variance");

  const double sign = kind == BracketKind::Antisym ? -1.0 : 1.0;
  DenseTensor out = t;
  std::vector<int> idx(r, 0);
  for (IndexIter it(t.comps().dims()); !it.done(); it.next()) {
    auto oidx = *it;
    for (int s = 0; s < r; ++s) idx[s] = oidx[s];
    std::swap(idx[slot_a], idx[slot_b]);
    double a = t.comps().flat()[t.comps().offset(oidx)];
    double b = t.comps().flat()[t.comps().offset(idx)];
    out.comps().flat()[out.comps().offset(oidx)] = 0.5 * (a + sign * b);
  }
  return out;
}

bool is_positive_definite(const MultiArray<double>& m) {
  if (m.rank() != 2 || m.dim(0) != m.dim(1)) return false;
  const int n = m.dim(0);
  MultiArray<double> L(std::vector<int>{n, n}, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = m.at(i, j);
      for (int k = 0; k < j; ++k) s -= L.at(i, k) * L.at(j, k);
      if (i == j) {
        if (s <= 0.0) return false;
        L.at(i, i) = std::sqrt(s);
      } else {
        L.at(i, j) = s / L.at(j, j);
      }
    }
  }
  return true;
}

}  // namespace kkflat
