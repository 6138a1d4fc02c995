#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "surpdec/types.hpp"

namespace surpdec {

struct RegressionResult {
  std::vector<std::string> names;
  std::vector<double> coefficients;
  std::vector<double> std_errors;
  std::vector<double> t_values;
  std::vector<double> p_values;  // two-sided, normal approximation
  std::size_t n = 0;
  double r_squared = 0.0;

  double coefficient(std::string_view name) const;
  double t_value(std::string_view name) const;
};

/// Least squares fit of y on the columns of `design` (which should already
/// contain an intercept column). Throws RankDeficient when n <= p or the
/// design is not of full column rank.
RegressionResult ols_fit(const Eigen::VectorXd& y, const Eigen::MatrixXd& design, std::vector<std::string> names);

/// Convenience: prepends an "(Intercept)" column to the named predictors.
RegressionResult ols_fit(std::span<const double> y,
                         const std::vector<std::pair<std::string, std::vector<double>>>& predictors);

struct SignCheck {
  std::string model;      // e.g. "Surprisal ~ N400 + P600"
  std::string predictor;
  int expected_sign = 0;  // +1 or -1
  double coefficient = 0.0;
  double t_value = 0.0;
  bool matches = false;
};

struct SignReport {
  std::vector<RegressionResult> fits;  // surprisal, N400, P600 models in that order
  std::vector<SignCheck> checks;       // six entries
  bool all_match = false;
};

/// Fits Surprisal ~ N400 + P600, N400 ~ Surprisal + P600 and P600 ~ Surprisal + N400
/// and compares the six slopes with the predicted (+,+ / +,- / +,-) signs.
SignReport check_sign_predictions(std::span<const double> n400, std::span<const double> p600,
                                  std::span<const double> surprisal);

std::string sign_report_text(const SignReport& report);

struct SignData {
  std::vector<double> n400;
  std::vector<double> p600;
  std::vector<double> surprisal;
};

/// CSV with numeric columns n400, p600 and surprisal (other columns ignored).
SignData parse_sign_csv(std::string_view text);

struct ErpTrial {
  std::string subject;
  std::string item_id;
  double n400_amp = 0.0;
  double p600_amp = 0.0;
};

/// CSV with a header naming at least subject, item_id, n400_amp, p600_amp.
std::vector<ErpTrial> parse_erp_csv(std::string_view text);

/// Long-format table for external mixed-effects analysis: one row per
/// (subject, item) when trials are given, otherwise one row per item. Raw and
/// z-scored model predictors are both included. Throws JoinError listing any
/// trial item id without a model result.
std::string export_long_format(std::span<const DecompositionResult> results,
                               const std::optional<std::vector<ErpTrial>>& trials);

}  // namespace surpdec
