#pragma once

// The octonion algebra built from the calibration 3-form on R^7, the global
// frame of the unit sphere S^7 it induces, and the assembly of the non-flat
// S^7 gauge-theory data in a stereographic chart.

#include "cymh/gauge.hpp"

#include <array>

namespace cymh {

/// Octonion x^0 e_0 + x, with x in the imaginary part R^7.
struct Oct {
    Vec c;  // 8 coefficients, c[0] the real part, c[1+j] the e_{j+1} part

    Oct() : c(Vec::Zero(8)) {}
    explicit Oct(Vec coeffs) : c(std::move(coeffs)) {}
    static Oct unit(int A);  // basis octonion e_A, A in 0..7
};

/// The calibration 3-form on R^7; index i stands for the imaginary unit
/// e_{i+1}, so at(0,1,2) is the coefficient on e_1, e_2, e_3.
class Phi3Form {
public:
    Phi3Form();
    double at(int i, int j, int k) const { return v_[(i * 7 + j) * 7 + k]; }

private:
    std::array<double, 343> v_;
};

const Phi3Form& phi();

/// Cross-product map on the imaginary part: P(x,y)^k = phi_{ijk} x^i y^j.
Vec pmap(const Vec& x, const Vec& y);

Oct oct_mul(const Oct& z, const Oct& w);
Oct oct_conj(const Oct& z);
double oct_norm(const Oct& z);

/// Global frame vector Y_j|_z = e_j . z of the unit sphere, j in 1..7.
/// Throws UsageError unless | ||z|| - 1 | <= 1e-10.
Vec frame_Y(const Oct& z, int j);

/// Stereographic chart of S^7 from the antipode of e_0:
/// sigma(u) = ((1 - |u|^2) e_0 + 2u) / (1 + |u|^2).
Oct s7_chart(const Vec& u);
/// Its 8 x 7 Jacobian at u.
Mat s7_chart_jac(const Vec& u);

/// The tangent algebroid of S^7 in the stereographic chart with the global
/// Y-frame, the connection with vanishing basic connection coefficients in
/// that frame, zeta equal to the connection torsion, the unit metric on the
/// frame and the round metric on the chart.
GaugeData s7_gauge_data();

}  // namespace cymh
