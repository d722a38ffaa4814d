/*
 * (C) Copyright 2026 the jloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "core/vec3.hpp"

namespace jloc::geom {

// Sparse per-vertex bone influences. Weights are non-negative and sum to 1
// per vertex within kWeightTolerance.
struct SkinWeights {
  static constexpr double kWeightTolerance = 1e-4;

  std::vector<std::vector<std::pair<std::uint32_t, double>>> vertex_weights;

  void validate(std::size_t vertex_count, std::size_t bone_count) const;
};

// v' = sum_b w_b * T_b(v) with T_b the effective per-bone transform (world
// composed with inverse bind).
std::vector<Vec3> linear_blend_skinning(const std::vector<Vec3>& vertices,
                                        const SkinWeights& weights,
                                        const std::vector<Affine3>& bone_transforms);

}  // namespace jloc::geom
