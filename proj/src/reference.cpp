#include "hypvar/reference.hpp"

#include "hypvar/numerics.hpp"
#include "hypvar/spectral.hpp"

#include <stdexcept>

namespace hypvar::reference {

VarianceDecomposition phi_brute_force(const MarkSet& set, const WeightFunction& wf, double T) {
    if (!(T > 0.0)) {
        throw std::invalid_argument("phi_brute_force: T must be > 0");
    }
    CompensatedSum total;
    CompensatedSum diag11;
    CompensatedSum diag_tail;
    CompensatedSum offdiag;
    VarianceDecomposition out;
    for (const Mark& a : set.marks) {
        for (const Mark& b : set.marks) {
            const double term = a.weight * b.weight * kernel_UT(a.m, b.m, wf, T);
            ++out.pairs_evaluated;
            total += term;
            if (a.point_id != b.point_id) {
                offdiag += term;
            } else if (a.k == 1 && b.k == 1) {
                diag11 += term;
            } else {
                diag_tail += term;
            }
        }
    }
    out.total = total.value();
    out.diag11 = diag11.value();
    out.diag_tail = diag_tail.value();
    out.offdiag = offdiag.value();
    return out;
}

} // namespace hypvar::reference
