#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "treeging/ensemble.hpp"
#include "treeging/kriging.hpp"

namespace treeging {

// The four compared models.
enum class ModelKind { treeging, random_forest, kriging, kriging_ensemble };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);  // "treeging", "rf", "kriging", "kriging-ensemble"
const std::vector<ModelKind>& all_model_kinds();

struct ModelConfig {
  ModelKind kind = ModelKind::treeging;
  EnsembleConfig ensemble = treeging_defaults();  // ensemble kinds
  KrigingOptions kriging;                          // standalone kriging

  static ModelConfig defaults(ModelKind kind);
};

class FittedModel {
 public:
  FittedModel() = default;
  FittedModel(ModelKind kind, KrigingModel model, std::vector<std::string> covariate_names);
  FittedModel(ModelKind kind, EnsembleModel model, std::vector<std::string> covariate_names);

  ModelKind kind() const noexcept { return kind_; }
  const std::vector<std::string>& covariate_names() const noexcept { return covariate_names_; }
  bool is_ensemble() const noexcept { return std::holds_alternative<EnsembleModel>(impl_); }
  const EnsembleModel& ensemble() const { return std::get<EnsembleModel>(impl_); }
  const KrigingModel& kriging() const { return std::get<KrigingModel>(impl_); }

  Eigen::VectorXd predict(const Dataset& data, std::size_t jobs = 1) const;
  std::vector<std::string> warnings() const;

 private:
  ModelKind kind_ = ModelKind::treeging;
  std::variant<EnsembleModel, KrigingModel> impl_;
  std::vector<std::string> covariate_names_;
};

FittedModel fit_model(const Dataset& data, const ModelConfig& config, std::size_t jobs = 1);

// Version-tagged JSON archive. The same model always serializes to the same
// bytes.
inline constexpr int kArchiveVersion = 1;
std::string to_archive(const FittedModel& model);
FittedModel from_archive(std::string_view text);
void save_model(const FittedModel& model, const std::filesystem::path& path);
FittedModel load_model(const std::filesystem::path& path);

}  // namespace treeging
