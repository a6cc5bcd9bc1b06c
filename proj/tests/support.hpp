#pragma once

#include "sbmrobust/blockmodel.hpp"
#include "sbmrobust/variation.hpp"

#include <algorithm>

namespace testing {

using sbmrobust::BlockModel;
using sbmrobust::Rng;

inline BlockModel model2(double n0, double n1, double e00, double e01, double e11)
{
    Eigen::MatrixXd e(2, 2);
    e << e00, e01, e01, e11;
    return BlockModel(Eigen::Vector2d(n0, n1), e);
}

/*
 * Random valid model with B blocks. Edge weights are drawn uniformly, some
 * set to zero, and the whole matrix is scaled so that the block degrees lie
 * in [min_degree, max_degree] when the spread allows it.
 */
inline BlockModel random_model(int B, Rng& rng, double min_degree = 1.2, double max_degree = 10.0)
{
    Eigen::VectorXd n(B);
    for (int r = 0; r < B; ++r) n(r) = 0.05 + rng.uniform();
    n /= n.sum();
    Eigen::MatrixXd e(B, B);
    for (int r = 0; r < B; ++r)
        for (int s = r; s < B; ++s) {
            const double w = rng.uniform() < 0.2 && B > 1 ? 0.0 : 0.05 + rng.uniform();
            e(r, s) = w;
            e(s, r) = w;
        }
    for (int r = 0; r < B; ++r)
        if (e.row(r).sum() == 0.0) e(r, r) = 1.0;
    const Eigen::VectorXd kappa = e.rowwise().sum().cwiseQuotient(n);
    double scale = min_degree / kappa.minCoeff();
    if (kappa.maxCoeff() * scale < max_degree)
        scale *= 1.0 + rng.uniform() * (max_degree / (kappa.maxCoeff() * scale) - 1.0);
    e *= scale;
    // sizes may drift from 1 by an ulp after normalization; fix the last one
    n(B - 1) = 1.0 - (n.sum() - n(B - 1));
    return BlockModel(n, e);
}

}  // namespace testing
