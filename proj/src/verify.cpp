#include "lowrank/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "lowrank/aca.hpp"
#include "lowrank/eim.hpp"
#include "lowrank/errors.hpp"
#include "lowrank/kernels.hpp"
#include "lowrank/pod.hpp"

namespace lowrank {

namespace {

// Below every practical tolerance, so runs stop only on rank caps or pivot
// exhaustion and both constructions walk the same number of steps.
constexpr double kNeverTol = 1e-300;

std::string format_step(std::size_t q) { return "step " + std::to_string(q + 1); }

}  // namespace

EquivalenceReport check_equivalence_aca_eim(const SnapshotMatrix& s, std::size_t q_max) {
  if (q_max == 0) {
    throw contract_error("check_equivalence_aca_eim: q_max must be positive");
  }
  EquivalenceReport rep;
  const double scale = s.values.max_abs();
  if (scale == 0.0) {
    rep.failures.push_back("input matrix is identically zero");
    rep.passed = false;
    return rep;
  }

  const Aca2Result aca = aca2_bivariate(s, kNeverTol, PivotRule::global, q_max);
  const EimSystem eim = eim_greedy(s, kNeverTol, PNorm::inf, q_max);
  const CrossApproximation& cross = aca.cross;

  if (cross.rank() != eim.q()) {
    std::ostringstream msg;
    msg << "rank mismatch: cross elimination stopped at " << cross.rank()
        << ", interpolation at " << eim.q();
    rep.failures.push_back(msg.str());
  }
  const std::size_t steps = std::min(cross.rank(), eim.q());
  rep.steps = steps;

  for (std::size_t q = 0; q < steps; ++q) {
    if (cross.tau[q] != eim.interp_indices[q] || cross.sigma[q] != eim.sample_indices[q]) {
      std::ostringstream msg;
      msg << format_step(q) << ": pivot (" << cross.tau[q] << ", " << cross.sigma[q]
          << ") vs (" << eim.interp_indices[q] << ", " << eim.sample_indices[q] << ")";
      rep.failures.push_back(msg.str());
    }
  }

  // The interpolation coefficients of step q are the row values of the
  // remainder before that step: g_q(y_j) = r_{q-1}(x_q, y_j).
  for (std::size_t q = 0; q < steps; ++q) {
    for (std::size_t j = 0; j < s.cols(); ++j) {
      const double gap = std::abs(eim.training_coeffs(q, j) - cross.v_vectors[q][j]) / scale;
      if (gap > rep.max_coefficient_gap) rep.max_coefficient_gap = gap;
      if (gap > 1e-10) {
        std::ostringstream msg;
        msg << format_step(q) << ": coefficient for column " << j << " differs by "
            << gap << " (relative)";
        rep.failures.push_back(msg.str());
      }
    }
  }

  // Same interpolant over the whole grid, column by column.
  if (cross.rank() == eim.q()) {
    const DenseMatrix from_cross = reconstruct(cross);
    for (std::size_t j = 0; j < s.cols(); ++j) {
      std::vector<double> col(s.rows());
      for (std::size_t i = 0; i < s.rows(); ++i) col[i] = s.values(i, j);
      const EimInterpolation ei = eim_interpolate(eim, col);
      for (std::size_t i = 0; i < s.rows(); ++i) {
        const double gap = std::abs(ei.values[i] - from_cross(i, j)) / scale;
        if (gap > rep.max_interpolant_gap) rep.max_interpolant_gap = gap;
        if (gap > 1e-10) {
          std::ostringstream msg;
          msg << "interpolant entry (" << i << ", " << j << ") differs by " << gap
              << " (relative)";
          rep.failures.push_back(msg.str());
        }
      }
    }
  }

  rep.passed = rep.failures.empty();
  return rep;
}

double nwidth_oracle(const SnapshotMatrix& s, std::size_t q) {
  if (q >= s.cols()) {
    throw contract_error("nwidth_oracle: rank must be below the number of snapshots");
  }
  const SvdResult sv = svd(scaled_snapshot_matrix(s));
  if (q >= sv.singular_values.size()) return 0.0;
  return sv.singular_values[q];
}

const char* to_string(DecayMethod method) {
  switch (method) {
    case DecayMethod::pod: return "pod";
    case DecayMethod::aca_global: return "aca_global";
    case DecayMethod::aca_partial: return "aca_partial";
    case DecayMethod::eim_inf: return "eim_inf";
    case DecayMethod::eim_2: return "eim_2";
  }
  throw contract_error("to_string: unknown decay method");
}

DecayMethod decay_method_from_string(const std::string& name) {
  if (name == "pod") return DecayMethod::pod;
  if (name == "aca_global") return DecayMethod::aca_global;
  if (name == "aca_partial") return DecayMethod::aca_partial;
  if (name == "eim_inf") return DecayMethod::eim_inf;
  if (name == "eim_2") return DecayMethod::eim_2;
  throw contract_error("unknown decay method '" + name + "'");
}

DecayReport decay_report(const SnapshotMatrix& s, const std::vector<DecayMethod>& methods,
                         std::size_t q_max) {
  if (methods.empty()) throw contract_error("decay_report: method list must not be empty");
  if (q_max == 0) throw contract_error("decay_report: q_max must be positive");
  if (q_max >= s.cols()) {
    throw contract_error("decay_report: q_max must be below the number of snapshots");
  }

  // History of the stopping indicator for each method, padded with its final
  // value so every row can be filled even after early termination.
  const auto padded = [&](const std::vector<double>& history, std::size_t q) {
    return history[std::min(q, history.size() - 1)];
  };
  std::vector<std::vector<double>> columns(methods.size());
  for (std::size_t c = 0; c < methods.size(); ++c) {
    switch (methods[c]) {
      case DecayMethod::pod: {
        for (std::size_t q = 1; q <= q_max; ++q) {
          const PodBasis basis = pod_basis(s, PodTruncation::rank(q));
          columns[c].push_back(pod_error(s, basis));
        }
        break;
      }
      case DecayMethod::aca_global:
      case DecayMethod::aca_partial: {
        const PivotRule rule =
            methods[c] == DecayMethod::aca_global ? PivotRule::global : PivotRule::partial;
        const Aca2Result aca = aca2_bivariate(s, kNeverTol, rule, q_max);
        for (std::size_t q = 1; q <= q_max; ++q) {
          columns[c].push_back(padded(aca.cross.indicator_history, q));
        }
        break;
      }
      case DecayMethod::eim_inf:
      case DecayMethod::eim_2: {
        const PNorm p = methods[c] == DecayMethod::eim_inf ? PNorm::inf : PNorm::two;
        const EimSystem eim = eim_greedy(s, kNeverTol, p, q_max);
        for (std::size_t q = 1; q <= q_max; ++q) {
          columns[c].push_back(padded(eim.err_history, q));
        }
        break;
      }
    }
  }

  DecayReport rep;
  rep.methods = methods;
  for (std::size_t q = 1; q <= q_max; ++q) {
    DecayRow row;
    row.q = q;
    row.floor = nwidth_oracle(s, q);
    for (std::size_t c = 0; c < methods.size(); ++c) row.errors.push_back(columns[c][q - 1]);
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

}  // namespace lowrank
