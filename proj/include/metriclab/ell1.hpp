#pragma once

#include <array>
#include <string>

#include "metriclab/metric.hpp"

namespace metriclab {

enum class L1Method { ClosedForm, SignSearch };
const char* l1_method_name(L1Method m);

/// Four points in (R^3, l1). points[i] is the image of source point i.
struct L1Embedding4 {
  std::array<RationalVector, 4> points;
  std::array<std::size_t, 4> permutation{0, 1, 2, 3};  // coordinate slot k holds source point permutation[k]
  L1Method method = L1Method::ClosedForm;
};

/// Permutation maximizing d(p0,p2) + d(p1,p3); the first in lexicographic order wins ties.
std::array<std::size_t, 4> four_point_permutation(const FiniteMetric& m);

/// d(p0,p1), d(p0,p2), d(p1,p2), d(p0,p3), d(p1,p3), d(p2,p3) -> x1, x2, y2, x3, y3, z3.
std::array<Rational, 6> four_point_closed_form(const std::array<Rational, 6>& d);

/// Throws InputError if m is not a 4-point metric (semimetric if allow_semimetric).
L1Embedding4 embed_four_point(const FiniteMetric& m, bool allow_semimetric = false);

/// Exact check of all six l1 distances.
bool verify_four_point(const L1Embedding4& e, const FiniteMetric& m);

}  // namespace metriclab
