#include "spinfid/cli/report.hpp"

#include <cmath>
#include <cstdio>

#include <openssl/evp.h>

#include "spinfid/error.hpp"

namespace spinfid::cli {

Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

Json fit_to_json(const fit::FitResult& r) {
  Json j;
  j["model"] = std::string(fit::to_string(r.model));
  const auto info = fit::parameter_info(r.model);
  Json params;
  for (std::size_t i = 0; i < r.parameters.size(); ++i) {
    params[r.names[i]] = Json{{"value", number_or_null(r.parameters[i])},
                              {"sigma", number_or_null(r.sigma[i])},
                              {"unit", std::string(info[i].unit)},
                              {"fixed", static_cast<bool>(r.fixed[i])}};
  }
  j["parameters"] = params;
  Json cov = Json::array();
  for (Eigen::Index a = 0; a < r.covariance.rows(); ++a) {
    Json row = Json::array();
    for (Eigen::Index b = 0; b < r.covariance.cols(); ++b) row.push_back(number_or_null(r.covariance(a, b)));
    cov.push_back(row);
  }
  j["covariance"] = r.covariance_valid ? cov : Json(nullptr);
  j["covariance_valid"] = r.covariance_valid;
  j["residual_norm"] = number_or_null(r.residual_norm);
  j["gradient_norm"] = number_or_null(r.gradient_norm);
  j["n_iterations"] = r.n_iterations;
  j["converged"] = r.converged;
  j["informative"] = r.informative;
  j["window"] = Json{{"start_s", number_or_null(r.window.start)}, {"end_s", number_or_null(r.window.end)}};
  j["n_points"] = r.n_points;
  return j;
}

Json estimate_to_json(const analysis::Estimate& e) {
  return Json{{"value", number_or_null(e.value)}, {"sigma", number_or_null(e.sigma)}};
}

Json line_to_json(const analysis::LineFit& f) {
  return Json{{"slope", number_or_null(f.slope)},
              {"slope_sigma", number_or_null(f.slope_sigma)},
              {"intercept", number_or_null(f.intercept)},
              {"intercept_sigma", number_or_null(f.intercept_sigma)},
              {"covariance", number_or_null(f.covariance)},
              {"n_points", f.n_points}};
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw IoError("SHA-256 computation failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

std::string dump_report(const Json& report) { return report.dump(2) + "\n"; }

}  // namespace spinfid::cli
