#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "lowrank/sampling.hpp"

namespace lowrank {

// Side-by-side audit of the two greedy cross constructions: global-pivot
// cross elimination and max-norm interpolation. They share selection and
// update arithmetic, so pivot sequences must match exactly and coefficients
// and interpolants must match to round-off.
struct EquivalenceReport {
  bool passed = true;
  std::size_t steps = 0;              // pivot steps compared
  double max_coefficient_gap = 0.0;   // worst row-coefficient gap / max|S|
  double max_interpolant_gap = 0.0;   // worst grid interpolant gap / max|S|
  std::vector<std::string> failures;  // divergence details, empty on success
};

EquivalenceReport check_equivalence_aca_eim(const SnapshotMatrix& s, std::size_t q_max);

// sigma_{Q+1} of the weight-scaled snapshot matrix: the spectral floor for
// the mean-square error of any rank-Q reconstruction of the family.
double nwidth_oracle(const SnapshotMatrix& s, std::size_t q);

enum class DecayMethod { pod, aca_global, aca_partial, eim_inf, eim_2 };

const char* to_string(DecayMethod method);
DecayMethod decay_method_from_string(const std::string& name);

struct DecayRow {
  std::size_t q = 0;
  double floor = 0.0;           // nwidth_oracle at this q
  std::vector<double> errors;   // one entry per requested method
};

// Error-versus-rank table: the POD column reports the mean-square projection
// error, cross and interpolation columns their max-remainder/sup-error
// indicators, each padded with its final value once a method stops early.
struct DecayReport {
  std::vector<DecayMethod> methods;
  std::vector<DecayRow> rows;  // q = 1..q_max
};

DecayReport decay_report(const SnapshotMatrix& s, const std::vector<DecayMethod>& methods,
                         std::size_t q_max);

}  // namespace lowrank
