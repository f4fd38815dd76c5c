#ifndef TWISTGAS_TYPES_HPP
#define TWISTGAS_TYPES_HPP

#include <Eigen/Dense>

#include <stdexcept>

namespace twistgas {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;

/// One row per disk, columns (x, y) or (u, v).
template <typename Scalar>
using Points = Eigen::Matrix<Scalar, Eigen::Dynamic, 2>;

class SamplingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Input for which the requested quantity does not exist (e.g. a wall hit
/// with zero normal velocity).
class DegenerateInput : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace twistgas

#endif  // TWISTGAS_TYPES_HPP
