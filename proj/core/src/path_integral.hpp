#pragma once

#include <Eigen/Dense>
#include <functional>

#include "til/market_model.hpp"

namespace til::detail {

// Shared by the frictionless-value and corrector Monte Carlo estimators;
// defined in market_model.cpp.
Estimate discounted_path_integral(const MarketModel& model, const Eigen::VectorXd& y0,
                                  const McConfig& mc,
                                  const std::function<double(const Eigen::VectorXd&)>& f);

}  // namespace til::detail
