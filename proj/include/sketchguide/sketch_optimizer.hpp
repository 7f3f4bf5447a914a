// Copyright (C) 2026 The sketchguide Authors
// SPDX-License-Identifier: Apache-2.0

// Line extraction and guidance-sketch refinement.
//
// Refinement is an edge-preserving recursive filter in the domain-transform
// formulation: each 1D pass is a first-order recursion whose feedback weight
// a^d shrinks across large intensity gaps (d = 1 + σs/σr·|ΔI|). Alternating
// horizontal and vertical passes over N iterations, with the spatial scale
// halving each iteration, smooths in 2D.

#pragma once

#include <span>
#include <vector>

#include "sketchguide/image.hpp"

namespace sketchguide {

class ModelBackend;

struct FilterParams {
    double sigma_s = 8.0;
    double sigma_r = 0.1;
    int iterations = 3;

    void validate() const;
};

struct XdogParams {
    double sigma = 1.0;
    double k = 1.6;
    double p = 20.0;
    double eps = 0.1;
    double phi = 10.0;

    void validate() const;
};

/// Causal pass only: y[0] = x[0], y[i] = (1-w_i)x[i] + w_i·y[i-1], w_i = a^{d_i}.
/// `distances[i]` is the gap between samples i-1 and i; distances[0] is unused.
std::vector<double> rf_causal_1d(std::span<const double> signal, std::span<const double> distances, double a);

/// Causal pass followed by the mirrored anti-causal pass.
std::vector<double> rf_filter_1d(std::span<const double> signal, std::span<const double> distances, double a);

/// σ for 1-based iteration i of n: σs·√3·2^(n-i)/√(4^n - 1).
double iteration_sigma(double sigma_s, int iteration, int iterations);

/// Takes the image by value and filters that buffer in place.
GrayImage rf_filter_2d(GrayImage img, const FilterParams& params);

/// Extended difference of Gaussians; dark lines on a light ground.
GrayImage xdog_extract(const GrayImage& img, const XdogParams& params);

/// rf_filter_2d, then the 2nd/98th percentiles are stretched to 0/1.
/// A constant input is returned unchanged.
GrayImage optimize(GrayImage rough, const FilterParams& params);

/// extract_lines on the backend, then optimize.
GrayImage refine_candidate(ModelBackend& backend, const RgbImage& candidate, const FilterParams& params);

}  // namespace sketchguide
