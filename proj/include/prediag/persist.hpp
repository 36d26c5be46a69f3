#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>

#include "prediag/forest.hpp"
#include "prediag/json_util.hpp"
#include "prediag/svm.hpp"

namespace prediag::persist {

inline constexpr int kFormatVersion = 1;
inline constexpr std::string_view kModelExtension = ".pdmodel.json";

enum class ModelKind { Svm, Forest };

struct ModelEnvelope {
  int format_version = kFormatVersion;
  json::Json created_with = json::Json::object();
  std::variant<ml::SvmModel, ml::ForestModel> payload;

  ModelKind kind() const { return payload.index() == 0 ? ModelKind::Svm : ModelKind::Forest; }
};

std::string_view to_string(ModelKind kind);

/// Canonical JSON: fixed field order, every real as "%.16e".
std::string save_model(const ModelEnvelope& envelope);

/// Throws DataError naming the offending field path on schema violations.
ModelEnvelope load_model(std::string_view text);

void save_model_file(const std::filesystem::path& path, const ModelEnvelope& envelope);
ModelEnvelope load_model_file(const std::filesystem::path& path);

} // namespace prediag::persist
