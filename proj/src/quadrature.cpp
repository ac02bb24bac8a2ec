#include <algorithm>
#include <array>
#include <vector>

#include "ellfem/reference.hpp"

namespace ellfem {

namespace {

// A symmetric orbit: weight and the barycentric generator. All distinct
// permutations of the generator are quadrature points with the same weight.
struct Orbit {
  double weight;
  std::array<double, 4> bary;
};

QuadratureRule expand(int dim, int degree, const std::vector<Orbit>& orbits) {
  std::vector<std::array<double, 4>> pts;
  std::vector<double> wts;
  for (const auto& orbit : orbits) {
    std::array<double, 4> b = orbit.bary;
    std::sort(b.begin(), b.begin() + dim + 1);
    do {
      pts.push_back(b);
      wts.push_back(orbit.weight);
    } while (std::next_permutation(b.begin(), b.begin() + dim + 1));
  }
  QuadratureRule rule;
  rule.dim = dim;
  rule.degree = degree;
  rule.points.resize(dim, static_cast<Eigen::Index>(pts.size()));
  rule.weights.resize(static_cast<Eigen::Index>(wts.size()));
  for (std::size_t q = 0; q < pts.size(); ++q) {
    // reference coordinates are barycentric components 1..dim
    for (int i = 0; i < dim; ++i) rule.points(i, q) = pts[q][i + 1];
    rule.weights(q) = wts[q];
  }
  return rule;
}

QuadratureRule gauss_legendre_6() {
  static constexpr std::array<std::array<double, 2>, 6> table{{
      {3.376524289842398609384922e-2, 8.566224618958517252014807e-2},
      {1.693953067668677431693002e-1, 1.803807865240693037849168e-1},
      {3.806904069584015456847491e-1, 2.339569672863455236949352e-1},
      {6.193095930415984543152509e-1, 2.339569672863455236949352e-1},
      {8.306046932331322568306998e-1, 1.803807865240693037849168e-1},
      {9.662347571015760139061508e-1, 8.566224618958517252014807e-2},
  }};
  QuadratureRule rule;
  rule.dim = 1;
  rule.degree = 11;
  rule.points.resize(1, 6);
  rule.weights.resize(6);
  for (int q = 0; q < 6; ++q) {
    rule.points(0, q) = table[q][0];
    rule.weights(q) = table[q][1];
  }
  return rule;
}

QuadratureRule dunavant_8() {
  constexpr double a1 = 4.592925882927231560288155e-1;
  constexpr double a2 = 1.705693077517602066222935e-1;
  constexpr double a3 = 5.054722831703097545842355e-2;
  constexpr double a4 = 8.394777409957605337213835e-3;
  constexpr double b4 = 2.631128296346381134217858e-1;
  return expand(2, 8,
                {
                    {7.215780383889358412554556e-2, {1.0 / 3, 1.0 / 3, 1.0 / 3, 0}},
                    {4.754581713364231239694805e-2, {a1, a1, 1 - 2 * a1, 0}},
                    {5.160868526735912514089578e-2, {a2, a2, 1 - 2 * a2, 0}},
                    {1.622924881159904015546296e-2, {a3, a3, 1 - 2 * a3, 0}},
                    {1.361515708721749713242235e-2, {a4, b4, 1 - a4 - b4, 0}},
                });
}

// 35 points: orbits S4 + S31 + S22 + 2 x S211, all weights positive, all
// points interior.
QuadratureRule tetrahedron_7() {
  constexpr double a1 = 3.1570114977820279942343e-1;
  constexpr double a2 = 4.495101774016036312369462e-1;
  constexpr double a3 = 2.12654725414832459888361e-2;
  constexpr double b3 = 1.466388138184849469042224e-1;
  constexpr double a4 = 1.888338310260010477364311e-1;
  constexpr double b4 = 4.716070036099788104389622e-2;
  return expand(3, 7,
                {
                    {1.591421491068847481009641e-2, {0.25, 0.25, 0.25, 0.25}},
                    {7.054930201661171512714362e-3, {a1, a1, a1, 1 - 3 * a1}},
                    {5.316154638809596655712471e-3, {a2, a2, 0.5 - a2, 0.5 - a2}},
                    {1.351795138317223594350572e-3, {a3, a3, b3, 1 - 2 * a3 - b3}},
                    {6.201188454722436894935927e-3, {a4, a4, b4, 1 - 2 * a4 - b4}},
                });
}

}  // namespace

const QuadratureRule& quadrature_rule(int dim) {
  static const QuadratureRule line = gauss_legendre_6();
  static const QuadratureRule triangle = dunavant_8();
  static const QuadratureRule tetrahedron = tetrahedron_7();
  switch (dim) {
    case 1: return line;
    case 2: return triangle;
    case 3: return tetrahedron;
    default: throw UnsupportedElement(dim, 0);
  }
}

}  // namespace ellfem
