#pragma once

#include <memory>
#include <string>

#include "anisoac/config.hpp"
#include "anisoac/energy.hpp"

namespace anisoac {

inline constexpr const char* kVersion = "0.1.0";

// Objects assembled from a config; EnergyParams returned by params() borrow
// from this bundle, so keep it alive while they are in use.
struct Assembly {
  std::shared_ptr<Grid> grid;
  std::shared_ptr<ConformalMetric> metric;
  std::shared_ptr<PotentialSpec> potential;
  std::shared_ptr<IntegrandSpec> integrand;
  std::shared_ptr<MollifiedIntegrand> moll;
  double epsilon = 0.1;
  double delta = 0;

  EnergyParams params() const;
  // Same integrand/potential/grid at a different mollification scale.
  Assembly at_delta(double new_delta, int quad_order) const;
};

Assembly assemble(const Config& cfg);

// Initial field per the init.* keys (constant | random | stripe | snapshot).
ScalarField initial_field(const Config& cfg, const Assembly& A);

// Exit codes: 0 success, 2 certificate failure, 1 operational error (thrown;
// the CLI maps exceptions to 1). Reports and snapshots land in outdir.
int run_subcommand(const std::string& name, const Config& cfg,
                   const std::string& outdir);

}  // namespace anisoac
