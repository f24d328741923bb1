#pragma once

#include <vector>

#include "cocycle/family.hpp"
#include "cocycle/rotation.hpp"

namespace cocycle {

struct TorusTerm {
    int m1 = 0;
    int m2 = 0;
    double c = 0;  // coefficient of cos 2 pi (m1 t1 + m2 t2)
    double s = 0;  // coefficient of sin 2 pi (m1 t1 + m2 t2)
};

struct TorusPotential {
    std::vector<TorusTerm> terms;
    RotationNumber omega;

    double value(double t1, double t2) const;
    // F along the line (x + omega s, s) and its s-derivative
    double along(double x, double s) const;
    double along_d1(double x, double s) const;
    double scale() const;       // sum of |coefficients|
    double frequency() const;   // max |m1 omega + m2|
};

struct Component {
    double s0 = 0;
    double s1 = 0;
    int sign = 1;
};

// Components of the line from the first -/+ root s* at or after 0 to the
// corresponding root of the next fiber (s* of x + omega, shifted by 1).  The
// return map over that stretch is conjugate to the one over [0,1) by the
// partial transfer up to s*, and it starts with a positive component.
struct SegmentDecomposition {
    double x = 0;
    std::vector<Component> components;
    std::size_t K = 0;         // number of (positive, negative) pairs
    bool degenerate = false;   // sign-definite along the line
    int definite_sign = 0;
};

SegmentDecomposition decompose_segment(const TorusPotential& potential, double x,
                                       double root_tolerance = 1e-14);

struct LineSample {
    double phi_hat = 0;
    double lambda_hat = 0;
    double phi_error = 0;
    double lambda_error = 0;
    bool has_phi = true;
};

std::vector<LineSample> line_integrals(const SegmentDecomposition& decomp, const TorusPotential& potential,
                                       double tolerance = 1e-12);

}  // namespace cocycle
