#pragma once

// Wraps a dense oracle instance as solver input. Header-only so the oracle
// library itself stays free of solver types.

#include "heliopack/opt.hpp"
#include "oracles.hpp"

namespace heliopack::oracle {

/// Rounds the instance's shading terms to the stored precision so that the
/// oracle and the solvers see identical data.
inline void round_to_float(oracle::Instance& inst) {
  for (auto& row : inst.s)
    for (auto& v : row)
      for (auto& f : v) f = static_cast<double>(static_cast<float>(f));
}

struct InstanceContext {
  ShadowMatrix shadow;
  ConflictGraph graph;
  ObjectiveContext ctx;

  explicit InstanceContext(const oracle::Instance& inst, bool shaded = true) {
    std::vector<heliopack::ShadowTriplet> trip;
    for (int i = 0; i < inst.n; ++i)
      for (int j = 0; j < inst.n; ++j)
        for (int k = 0; k < inst.k; ++k)
          if (i != j && inst.s[i][j][k] > 0.0)
            trip.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j),
                            static_cast<std::uint16_t>(k), static_cast<float>(inst.s[i][j][k])});
    shadow = ShadowMatrix(inst.n, inst.k, trip);
    for (int i = 0; i < inst.n; ++i)
      for (int k = 0; k < inst.k; ++k) shadow.diagonal(i, k) = inst.diag[i][k];
    graph = ConflictGraph(inst.n, inst.edges);
    Eigen::MatrixXd gen(inst.n, inst.k);
    for (int i = 0; i < inst.n; ++i)
      for (int k = 0; k < inst.k; ++k) gen(i, k) = inst.gen[i][k];
    EconomicParams econ;
    econ.tariff_by_sample = inst.tariff;
    econ.lifetime_years = 1.0;
    ctx = ObjectiveContext(gen, econ, shaded ? &shadow : nullptr, &graph);
    for (int i = 0; i < inst.n; ++i) ctx.cost(i) = inst.cost[i];
    ctx.unshaded_gain = ctx.weight.rowwise().sum() - ctx.cost;
  }
  InstanceContext(const InstanceContext&) = delete;
  InstanceContext& operator=(const InstanceContext&) = delete;
};


}  // namespace heliopack::oracle
