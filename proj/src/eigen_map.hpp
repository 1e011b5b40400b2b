#ifndef CAUSALRT_EIGEN_MAP_HPP
#define CAUSALRT_EIGEN_MAP_HPP

#include <Eigen/Dense>

#include "causalrt/matrix.hpp"

namespace causalrt {

using EMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using EMap = Eigen::Map<EMatrix>;
using ECMap = Eigen::Map<const EMatrix>;

inline EMap emap(RealMatrix& m) { return EMap(m.v.data(), m.rows, m.cols); }
inline ECMap emap(const RealMatrix& m) { return ECMap(m.v.data(), m.rows, m.cols); }

// Raw buffer map, used for weight slices inside a flat parameter vector.
inline EMap emap(double* p, std::int64_t r, std::int64_t c) { return EMap(p, r, c); }
inline ECMap emap(const double* p, std::int64_t r, std::int64_t c) { return ECMap(p, r, c); }

}  // namespace causalrt

#endif  // CAUSALRT_EIGEN_MAP_HPP
