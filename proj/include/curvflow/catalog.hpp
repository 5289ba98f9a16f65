#pragma once

#include "curvflow/immersion.hpp"
#include "curvflow/parallel.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace curvflow {

struct ExampleParams {
  double r0 = 0.7;      // geodesic-sphere radius (cp2 examples)
  double R0 = 1.0;      // sphere radius (space-form examples)
  std::uint64_t seed = 1;
  double amplitude = 0.05;  // perturbation amplitude
};

struct GridOptions {
  int res = 0;                // base resolution; 0 picks the example default
  bool patch = false;         // small non-periodic window (identity suites)
  double patch_extent = 0.3;  // half-width of the window in parameter units
};

// A built-in example: an ambient model, an immersion builder parametrized by
// the normal offset r (the parallel family), and, when the example is
// curvature-adapted with constant eigenvalues, its spectrum at r = 0.
struct BuiltInExample {
  std::string name;
  std::string status;
  std::string params_doc;
  AmbientModel model = AmbientModel::euclidean(3);
  int n = 2;
  std::optional<IsoparametricSpectrum> spectrum;
  std::function<std::shared_ptr<ParametrizedImmersion>(double r_offset,
                                                       const GridOptions&)> build;
};

struct CatalogRow {
  std::string name;
  std::string status;
  std::string params_doc;
};
std::vector<CatalogRow> catalog_listing();

// Throws std::invalid_argument for unknown names.
BuiltInExample make_example(const std::string& name, const ExampleParams& params);

}  // namespace curvflow
