#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lowrank/errors.hpp"

namespace lowrank {

// Linear functional on grid samples, represented by one weight per grid
// point: <phi, v> = sum_i weights[i] * v[i]. Dirac functionals have a single
// unit weight, averages have uniform weights.
struct Functional {
  std::vector<double> weights;
  std::string label;

  double apply(const std::vector<double>& values) const {
    if (values.size() != weights.size()) {
      throw contract_error("Functional::apply: length mismatch for " + label);
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) sum += weights[i] * values[i];
    return sum;
  }

  static Functional dirac(std::size_t index, std::size_t size) {
    Functional f;
    f.weights.assign(size, 0.0);
    f.weights.at(index) = 1.0;
    f.label = "dirac(" + std::to_string(index) + ")";
    return f;
  }

  static Functional average(std::size_t size) {
    Functional f;
    f.weights.assign(size, 1.0 / static_cast<double>(size));
    f.label = "average";
    return f;
  }
};

}  // namespace lowrank
