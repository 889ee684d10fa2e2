#pragma once

#include "mlen/types.hpp"

namespace mlen {

struct CanonicalOptions {
    double tolerance = 1e-12;   // on successive differences of the gauge matrix
    int max_iterations = 10000;
};

/// Mixed canonical form of a uniform tensor A^s (any physical dimension),
/// treating sum_s A^s (x) A^s as the norm transfer matrix. Both gauges are
/// rotated to the Schmidt basis, so A_L^s C = C A_R^s with C diagonal.
struct CanonicalForm {
    PhysTensor left;          // sum_s A_L^sT A_L^s = 1
    PhysTensor right;         // sum_s A_R^s A_R^sT = 1
    Vector singular_values;   // nonincreasing, unit 2-norm
    /// Scale removed by the gauge: L A^s = lambda A_L^s L.
    double lambda = 1.0;
    int iterations = 0;
};

/// Left orthonormalization by iterated positive QR, accelerated by an Arnoldi
/// solve for the gauge fixed point. Returns A_L, L and lambda.
struct LeftGauge {
    PhysTensor tensor;
    Matrix gauge;
    double lambda = 1.0;
    int iterations = 0;
};
LeftGauge left_orthonormalize(const PhysTensor& a, const CanonicalOptions& options = {});

CanonicalForm canonicalize(const PhysTensor& a, const CanonicalOptions& options = {});

inline PhysTensor to_phys(const SiteTensor& x) { return {x[0], x[1]}; }

} // namespace mlen
