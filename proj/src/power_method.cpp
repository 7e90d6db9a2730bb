#include "svtv/power_method.hpp"

#include <cmath>
#include <vector>

#include "svtv/rng.hpp"
#include "svtv/types.hpp"

namespace svtv {

NormEstimate power_method_norm(const SparseOperator& op, std::size_t max_iter, double tol, std::uint64_t seed) {
    require(op.cols() > 0 && op.rows() > 0, "power method: empty operator");
    Rng rng(seed);
    std::vector<double> v(op.cols());
    for (auto& x : v) x = rng.normal();
    double nv = norm2(v);
    for (auto& x : v) x /= nv;

    std::vector<double> av(op.rows());
    std::vector<double> atav(op.cols());
    NormEstimate est;
    double previous = 0.0;
    for (std::size_t k = 1; k <= max_iter; ++k) {
        op.apply_into(v, av, ApplyMode::forward);
        op.apply_into(av, atav, ApplyMode::adjoint);
        // Rayleigh quotient of op^T op at the unit vector v.
        const double lambda = dot(v, atav);
        est.value = std::sqrt(std::max(lambda, 0.0));
        est.iterations = k;
        const double n = norm2(atav);
        if (n == 0.0) {
            est.converged = true;  // v lies in the kernel; op is zero on this start
            return est;
        }
        if (k > 1 && std::abs(est.value - previous) <= tol * est.value) {
            est.converged = true;
            return est;
        }
        previous = est.value;
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = atav[i] / n;
    }
    return est;
}

}  // namespace svtv
