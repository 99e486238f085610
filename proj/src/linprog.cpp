#include "robust_fusion/linprog.hpp"

namespace robust_fusion::lp {

template class DenseSimplex<double>;

}  // namespace robust_fusion::lp
