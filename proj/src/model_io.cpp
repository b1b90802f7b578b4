#include "qens/model_io.hpp"

#include <fstream>

#include "qens/ensemble.hpp"
#include "qens/error.hpp"
#include "qens/learners.hpp"
#include "qens/qsvm.hpp"
#include "qens/vqc.hpp"

namespace qens {

ClassifierPtr classifier_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind")) throw Error(ErrorCategory::parse, "model document needs a kind");
  const std::string kind = j.at("kind").get<std::string>();
  try {
    if (kind == "vqc") return std::make_unique<VqcClassifier>(VqcClassifier::from_json(j));
    if (kind == "qsvm-kernel" || kind == "qsvm-anneal" || kind == "classical-svm")
      return std::make_unique<SvmClassifier>(SvmClassifier::from_json(j));
    if (kind == "logistic") return std::make_unique<LogisticClassifier>(LogisticClassifier::from_json(j));
    if (kind == "gbt") return std::make_unique<GbtClassifier>(GbtClassifier::from_json(j));
    if (kind == "stack") return std::make_unique<StackClassifier>(StackClassifier::from_json(j));
    if (kind == "bag") return std::make_unique<BaggingClassifier>(BaggingClassifier::from_json(j));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCategory::parse, "malformed " + kind + " document: " + e.what());
  }
  throw Error(ErrorCategory::configuration, "unknown model kind: " + kind);
}

void save_classifier(const Classifier& model, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCategory::io, "cannot write " + path.string());
  out << model.to_json().dump(2) << '\n';
  if (!out) throw Error(ErrorCategory::io, "write failed: " + path.string());
}

ClassifierPtr load_classifier(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::io, "cannot read " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCategory::parse, path.string() + ": " + e.what());
  }
  return classifier_from_json(j);
}

}  // namespace qens
