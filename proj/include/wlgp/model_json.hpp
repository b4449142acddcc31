#pragma once

// JSON round-tripping of kernel models, used by the CLI and fit reports.

#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "wlgp/kernels.hpp"

namespace wlgp {

inline nlohmann::json model_to_json(const KernelModel& model) {
  nlohmann::json j;
  std::visit(
      [&j](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, WeightedLog>) {
          j["family"] = "weighted_log";
          j["weight"] = m.weight.source.empty() ? print_weight(*m.weight.expr)
                                                : m.weight.source;
          if (m.weight.singularity_exponent)
            j["singularity_exponent"] = *m.weight.singularity_exponent;
        } else if constexpr (std::is_same_v<T, WeightedLogExp>) {
          j["family"] = "weighted_log_exp";
          j["sigma"] = m.sigma;
          j["beta"] = m.beta;
        } else if constexpr (std::is_same_v<T, WeightedLogConst>) {
          j["family"] = "weighted_log_const";
          j["alpha"] = m.alpha;
        } else if constexpr (std::is_same_v<T, WeightedLogPoly>) {
          j["family"] = "weighted_log_poly";
          j["alpha"] = m.alpha;
        } else if constexpr (std::is_same_v<T, IntegratedOU>) {
          j["family"] = "integrated_ou";
          j["sigma"] = m.sigma;
          j["beta"] = m.beta;
        } else if constexpr (std::is_same_v<T, IntegratedFOU>) {
          j["family"] = "integrated_fou";
          j["sigma"] = m.sigma;
          j["beta"] = m.beta;
          j["hurst"] = m.hurst;
        } else if constexpr (std::is_same_v<T, FBM>) {
          j["family"] = "fbm";
          j["sigma"] = m.sigma;
          j["hurst"] = m.hurst;
        }
      },
      model);
  return j;
}

inline KernelModel model_from_json(const nlohmann::json& j) {
  const std::string family = j.at("family").get<std::string>();
  KernelModel model;
  if (family == "weighted_log") {
    std::optional<double> hint;
    if (j.contains("singularity_exponent"))
      hint = j.at("singularity_exponent").get<double>();
    model = WeightedLog{make_weight(j.at("weight").get<std::string>(), hint)};
  } else if (family == "weighted_log_exp") {
    model = WeightedLogExp{j.at("sigma").get<double>(),
                           j.at("beta").get<double>()};
  } else if (family == "weighted_log_const") {
    model = WeightedLogConst{j.at("alpha").get<double>()};
  } else if (family == "weighted_log_poly") {
    model = WeightedLogPoly{j.at("alpha").get<double>()};
  } else if (family == "integrated_ou") {
    model = IntegratedOU{j.at("sigma").get<double>(),
                         j.at("beta").get<double>()};
  } else if (family == "integrated_fou") {
    model = IntegratedFOU{j.at("sigma").get<double>(),
                          j.at("beta").get<double>(),
                          j.at("hurst").get<double>()};
  } else if (family == "fbm") {
    model = FBM{j.at("sigma").get<double>(), j.at("hurst").get<double>()};
  } else {
    throw std::invalid_argument("unknown model family '" + family + "'");
  }
  validate_model(model);
  return model;
}

}  // namespace wlgp
