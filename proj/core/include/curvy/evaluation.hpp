#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "curvy/curvygan.hpp"
#include "curvy/pipeline.hpp"
#include "curvy/pointae.hpp"

// Cross-section-count sweep: per-class Chamfer for each number of planes.
namespace curvy::evaluation {

struct TestShape {
  std::string id;
  std::string class_label;
  geometry::TriangleMesh mesh;  // normalized
  geometry::PointSet gt;
  std::uint64_t seed = 0;
};

struct SampleResult {
  std::string id;
  std::string class_label;
  std::size_t count = 0;
  double chamfer = 0.0;
  double hausdorff = 0.0;
};

struct CountRow {
  std::size_t count = 0;
  std::map<std::string, double> per_class;  // mean Chamfer
  double mean = 0.0;                        // mean of the class means
  std::size_t samples = 0;
};

struct EvalReport {
  std::vector<std::string> classes;
  std::map<std::string, double> per_class;  // mean Chamfer over every count
  std::vector<CountRow> rows;
  std::vector<SampleResult> samples;
  std::vector<std::string> failures;

  const CountRow& row(std::size_t count) const;
};

struct SweepOptions {
  std::vector<std::size_t> counts = {2, 5, 10, 11, 15, 20, 25};
  pipeline::SectionOptions sections;  // `planes` is replaced by each count
};

/// Groups samples into per-count, per-class means.
EvalReport aggregate(const std::vector<SampleResult>& samples, const std::vector<std::size_t>& counts);

/// Re-slices every shape at each count, reconstructs with the generator and
/// scores against the ground-truth cloud. Shapes that fail to slice are
/// listed in `failures` and left out of the means.
EvalReport sweep_cross_sections(const curvygan::GeneratorParams& g, const pointae::AEParams& ae,
                                const std::vector<TestShape>& shapes, const SweepOptions& options);

/// Header: count,<class...>,mean
std::string report_csv(const EvalReport& report);
nlohmann::json report_json(const EvalReport& report);

}  // namespace curvy::evaluation
