#pragma once

#include <optional>
#include <string>

#include "cobb/features.hpp"
#include "cobb/regressors.hpp"

namespace cobb {

/// A trained model plus the scaler fitted alongside it; what `train`
/// persists and `predict` consumes.
struct ModelArtifact {
  TrainedModel model;
  std::optional<ScalerParams> scaler;
};

/// Versioned JSON with round-trip-exact number formatting;
/// load_model(save_model(a)) reproduces identical predictions.
std::string save_model(const ModelArtifact& artifact);
ModelArtifact load_model(const std::string& text);

}  // namespace cobb
