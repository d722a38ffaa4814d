/*
 * (C) Copyright 2026 the jloc authors
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */
#include "core/skinning.hpp"

#include <cmath>

#include "core/error.hpp"

namespace jloc::geom {

void SkinWeights::validate(std::size_t vertex_count, std::size_t bone_count) const {
  require_data(vertex_weights.size() == vertex_count,
               "SkinWeights: expected " + std::to_string(vertex_count) + " vertex entries, got " +
                   std::to_string(vertex_weights.size()));
  for (std::size_t v = 0; v < vertex_weights.size(); ++v) {
    double sum = 0.0;
    for (const auto& [bone, w] : vertex_weights[v]) {
      require_data(bone < bone_count, "SkinWeights: vertex " + std::to_string(v) +
                                          " references bone " + std::to_string(bone));
      require_data(w >= 0.0, "SkinWeights: negative weight on vertex " + std::to_string(v));
      sum += w;
    }
    require_data(std::fabs(sum - 1.0) <= kWeightTolerance,
                 "SkinWeights: vertex " + std::to_string(v) + " weights sum to " +
                     std::to_string(sum));
  }
}

std::vector<Vec3> linear_blend_skinning(const std::vector<Vec3>& vertices,
                                        const SkinWeights& weights,
                                        const std::vector<Affine3>& bone_transforms) {
  weights.validate(vertices.size(), bone_transforms.size());
  std::vector<Vec3> out(vertices.size());
#pragma omp parallel for schedule(static)
  for (std::int64_t ii = 0; ii < static_cast<std::int64_t>(vertices.size()); ++ii) {
    const std::size_t v = static_cast<std::size_t>(ii);
    Vec3 acc{0, 0, 0};
    for (const auto& [bone, w] : weights.vertex_weights[v]) {
      acc += w * (bone_transforms[bone] * vertices[v]);
    }
    out[v] = acc;
  }
  return out;
}

}  // namespace jloc::geom
