#pragma once

#include <initializer_list>

#include "hadeq/geometry.hpp"

namespace hadeq::test {

inline Eigen::VectorXd vec(std::initializer_list<double> vals) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(vals.size()));
    Eigen::Index i = 0;
    for (double x : vals) v[i++] = x;
    return v;
}

inline ManifoldDescriptor e1() { return ManifoldDescriptor::euclidean(1); }
inline ManifoldDescriptor e2() { return ManifoldDescriptor::euclidean(2); }
inline ManifoldDescriptor e3() { return ManifoldDescriptor::euclidean(3); }
inline ManifoldDescriptor h1() { return ManifoldDescriptor::hyperbolic(1); }
inline ManifoldDescriptor h2() { return ManifoldDescriptor::hyperbolic(2); }
inline ManifoldDescriptor r_x_h1() {
    return ManifoldDescriptor::product({e1(), h1()});
}

inline ManifoldPoint pt(const ManifoldDescriptor& m, std::initializer_list<double> coords) {
    return make_point(m, vec(coords));
}

}  // namespace hadeq::test
