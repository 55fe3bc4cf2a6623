// measure.hpp — the LQG-type vertex measures eta_n and pi_n with their
// analytic / empirical normalizations.
#pragma once

#include <vector>

#include "gffnet/field.hpp"
#include "gffnet/network.hpp"

namespace gffnet {

// Neumaier compensated summation; exact enough for sums of exponentials
// spanning many orders of magnitude.
struct NeumaierSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double x) {
        const double t = sum + x;
        if (std::abs(sum) >= std::abs(x)) {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    double value() const { return sum + comp; }
};

struct MeasureReport {
    double raw = 0.0;         // eta_n(B) or pi_n(B)
    double normalized = 0.0;  // raw / expectation (analytic for eta)
    double expectation = 0.0; // the divisor used
    long long box_size = 0;   // |B| (vertex count)
    double gamma = 0.0;
    int n = 0;
    int zeta = 0;
    bool empirical_normalization = false;  // pi has no closed form
};

// eta_n(B) = sum_{y in B} e^{gamma phi_n(y)} over Z_n^2(zeta) vertices in B;
// E[eta_n(B)] = 2^{gamma^2 n / 2} |B| since Var phi_n(y) = n log 2.
MeasureReport eta_measure(const FieldSample& sample, double gamma, Rect box,
                          int zeta = 0);

// pi_n(B) = sum_{y in B} sum_{e ~ y} e^{-gamma phi_n(m_e)} on an existing
// network; normalized by `empirical_mean` when provided (> 0), else left raw
// (normalized = raw, flagged empirical).
MeasureReport pi_measure(const Network& net, const std::vector<int>& vertices,
                         double empirical_mean = 0.0);

// Cross-check route for the pi consistency invariant: accumulate by edges
// (each edge contributes its conductance to both endpoint vertices).
double pi_measure_by_edges(const Network& net, const std::vector<int>& vertices);

}  // namespace gffnet
