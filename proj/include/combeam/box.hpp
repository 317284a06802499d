// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "combeam/types.hpp"

namespace combeam {

// Axis-aligned box [lo, hi] over s = (x, z).  The first num_bool coordinates
// are Boolean-valued at the vertices (each endpoint 0 or 1); the remaining
// ones are the continuous per-user rates z.
struct Box {
  VecX lo;
  VecX hi;
  int num_bool = 0;

  int dim() const { return static_cast<int>(lo.size()); }
  int num_cont() const { return dim() - num_bool; }

  auto bool_lo() const { return lo.head(num_bool); }
  auto bool_hi() const { return hi.head(num_bool); }
  auto cont_lo() const { return lo.tail(num_cont()); }
  auto cont_hi() const { return hi.tail(num_cont()); }

  // Sum of the continuous upper coordinates: f(q), the vertex bound.
  Real vertex_upper() const { return cont_hi().sum(); }
  Real vertex_lower() const { return cont_lo().sum(); }

  bool valid() const {
    if (lo.size() != hi.size() || num_bool < 0 || num_bool > dim()) return false;
    for (int i = 0; i < dim(); ++i) {
      if (!(lo[i] <= hi[i])) return false;
      if (i < num_bool &&
          ((lo[i] != 0.0 && lo[i] != 1.0) || (hi[i] != 0.0 && hi[i] != 1.0)))
        return false;
    }
    return true;
  }

  bool contains(const VecX& s) const {
    return s.size() == lo.size() && (s.array() >= lo.array() - 1e-12).all() &&
           (s.array() <= hi.array() + 1e-12).all();
  }
};

}  // namespace combeam
