#include "dlneb/instance.hpp"

namespace dlneb {

Instance Instance::make(std::vector<int> dims, std::vector<double> lambdas, Matrix Y, double grouping_tol) {
    Instance inst{DimChain::make(std::move(dims)), RegParams::make(std::move(lambdas)), std::move(Y), {}};
    if (inst.reg.L() != inst.dims.L()) throw ShapeError("need one regularization weight per layer");
    if (inst.Y.rows() != inst.dims.d(inst.L()) || inst.Y.cols() != inst.dims.d(0))
        throw ShapeError("target shape must be d_L x d_0");
    inst.spec = analyze_target(inst.Y, grouping_tol);
    return inst;
}

} // namespace dlneb
