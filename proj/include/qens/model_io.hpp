#pragma once

#include <filesystem>

#include "qens/dataset.hpp"

namespace qens {

/// Rebuilds any classifier from its structured document. Documents without
/// fitted state (plain model specs) yield untrained models.
ClassifierPtr classifier_from_json(const nlohmann::json& j);

void save_classifier(const Classifier& model, const std::filesystem::path& path);
ClassifierPtr load_classifier(const std::filesystem::path& path);

}  // namespace qens
