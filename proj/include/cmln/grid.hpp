#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cmln/error.hpp"
#include "cmln/logic.hpp"

namespace cmln {

using CountVector = std::vector<std::uint64_t>;

// Index set J = {0..N_1-1} x ... x {0..N_d-1}, row-major (last axis fastest).
class GridShape {
 public:
  GridShape() : GridShape(std::vector<std::uint64_t>{}) {}
  explicit GridShape(std::vector<std::uint64_t> moduli) : moduli_(std::move(moduli)) {
    size_ = 1;
    for (auto m : moduli_) {
      if (m == 0) throw PreconditionError("grid modulus must be positive");
      if (size_ > UINT64_MAX / m) throw SizeLimitError("grid too large");
      size_ *= m;
    }
  }

  const std::vector<std::uint64_t>& moduli() const noexcept { return moduli_; }
  std::size_t rank() const noexcept { return moduli_.size(); }
  std::uint64_t size() const noexcept { return size_; }

  std::uint64_t index(std::span<const std::uint64_t> k) const {
    if (k.size() != moduli_.size()) throw PreconditionError("grid point has wrong dimension");
    std::uint64_t idx = 0;
    for (std::size_t i = 0; i < k.size(); ++i) {
      if (k[i] >= moduli_[i]) throw PreconditionError("grid point outside the grid");
      idx = idx * moduli_[i] + k[i];
    }
    return idx;
  }

  CountVector point(std::uint64_t idx) const {
    CountVector k(moduli_.size());
    for (std::size_t i = moduli_.size(); i-- > 0;) {
      k[i] = idx % moduli_[i];
      idx /= moduli_[i];
    }
    return k;
  }

  friend bool operator==(const GridShape&, const GridShape&) = default;

 private:
  std::vector<std::uint64_t> moduli_;
  std::uint64_t size_ = 1;
};

template <class V>
struct CountGrid {
  GridShape shape;
  std::vector<V> values;

  CountGrid() = default;
  CountGrid(GridShape s, V fill) : shape(std::move(s)), values(shape.size(), fill) {}
  CountGrid(GridShape s, std::vector<V> v) : shape(std::move(s)), values(std::move(v)) {
    if (values.size() != shape.size()) throw PreconditionError("grid value count differs from shape size");
  }

  V& at(std::span<const std::uint64_t> k) { return values[shape.index(k)]; }
  const V& at(std::span<const std::uint64_t> k) const { return values[shape.index(k)]; }
  V& at(std::initializer_list<std::uint64_t> k) { return values[shape.index(std::vector<std::uint64_t>(k))]; }
  const V& at(std::initializer_list<std::uint64_t> k) const {
    return values[shape.index(std::vector<std::uint64_t>(k))];
  }
  std::uint64_t size() const noexcept { return values.size(); }
};

// Count-vector grid of a formula list: M_i = |Delta|^{|vars(alpha_i)|} + 1.
inline GridShape count_grid_shape(const std::vector<Formula>& formulas, const Domain& domain) {
  std::vector<std::uint64_t> m;
  for (const auto& f : formulas) m.push_back(grounding_count(f, domain) + 1);
  return GridShape(std::move(m));
}

}  // namespace cmln
