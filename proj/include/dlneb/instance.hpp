#pragma once

#include "dlneb/network.hpp"
#include "dlneb/spectrum.hpp"

namespace dlneb {

// One problem instance: dimension chain, regularization and target with its SVD.
struct Instance {
    DimChain dims;
    RegParams reg;
    Matrix Y;
    TargetSpectrum spec;

    static Instance make(std::vector<int> dims, std::vector<double> lambdas, Matrix Y, double grouping_tol = 1e-8);

    int L() const { return dims.L(); }
    double lambda() const { return reg.lambda_prod; }
};

} // namespace dlneb
