#include "ccssp/model.hpp"

#include <cmath>
#include <stdexcept>

namespace ccssp {

std::uint32_t ModelIR::add_var(std::string name, double lb, double ub,
                               bool integral) {
  vars.push_back(Variable{std::move(name), lb, ub, integral});
  objective.push_back(0.0);
  return static_cast<std::uint32_t>(vars.size() - 1);
}

void ModelIR::add_row(std::string name, std::vector<std::uint32_t> idx,
                      std::vector<double> coef, Relation rel, double rhs) {
  if (idx.size() != coef.size()) {
    throw std::invalid_argument("row " + name + ": index/coef size mismatch");
  }
  for (auto v : idx) {
    if (v >= vars.size()) {
      throw std::invalid_argument("row " + name + ": undeclared variable");
    }
  }
  rows.push_back(LinearRow{std::move(name), std::move(idx), std::move(coef),
                           rel, rhs});
}

double ModelIR::max_violation(const std::vector<double>& x) const {
  double worst = 0.0;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    worst = std::max(worst, vars[i].lb - x[i]);
    worst = std::max(worst, x[i] - vars[i].ub);
  }
  for (const auto& row : rows) {
    double lhs = 0.0;
    for (std::size_t t = 0; t < row.idx.size(); ++t) {
      lhs += row.coef[t] * x[row.idx[t]];
    }
    if (row.rel == Relation::Eq) {
      worst = std::max(worst, std::abs(lhs - row.rhs));
    } else {
      worst = std::max(worst, lhs - row.rhs);
    }
  }
  return worst;
}

double ModelIR::objective_value(const std::vector<double>& x) const {
  double v = 0.0;
  for (std::size_t i = 0; i < objective.size(); ++i) {
    if (objective[i] != 0.0) v += objective[i] * x[i];
  }
  return v;
}

}  // namespace ccssp
