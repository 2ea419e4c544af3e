#include "curvy/evaluation.hpp"

#include <cstdio>
#include <set>

#include "curvy/error.hpp"
#include "curvy/graphrep.hpp"
#include "curvy/metrics.hpp"

namespace curvy::evaluation {

const CountRow& EvalReport::row(std::size_t count) const {
  for (const auto& r : rows) {
    if (r.count == count) return r;
  }
  throw DataError("report has no row for count " + std::to_string(count));
}

EvalReport aggregate(const std::vector<SampleResult>& samples, const std::vector<std::size_t>& counts) {
  EvalReport report;
  report.samples = samples;
  std::set<std::string> classes;
  for (const auto& s : samples) classes.insert(s.class_label);
  report.classes.assign(classes.begin(), classes.end());

  std::map<std::string, std::pair<double, std::size_t>> overall;
  for (std::size_t c : counts) {
    CountRow row;
    row.count = c;
    std::map<std::string, std::pair<double, std::size_t>> acc;
    for (const auto& s : samples) {
      if (s.count != c) continue;
      auto& a = acc[s.class_label];
      a.first += s.chamfer;
      ++a.second;
      auto& o = overall[s.class_label];
      o.first += s.chamfer;
      ++o.second;
      ++row.samples;
    }
    double total = 0.0;
    for (const auto& [cls, a] : acc) {
      row.per_class[cls] = a.first / static_cast<double>(a.second);
      total += row.per_class[cls];
    }
    row.mean = acc.empty() ? 0.0 : total / static_cast<double>(acc.size());
    report.rows.push_back(std::move(row));
  }
  for (const auto& [cls, o] : overall) report.per_class[cls] = o.first / static_cast<double>(o.second);
  return report;
}

EvalReport sweep_cross_sections(const curvygan::GeneratorParams& g, const pointae::AEParams& ae,
                                const std::vector<TestShape>& shapes, const SweepOptions& options) {
  if (options.counts.empty()) throw UsageError("at least one cross-section count is required");
  std::vector<SampleResult> samples;
  std::vector<std::string> failures;
  for (std::size_t c : options.counts) {
    if (c == 0) throw UsageError("cross-section counts must be positive");
    for (const auto& shape : shapes) {
      auto sections = options.sections;
      sections.planes = c;
      sections.seed = shape.seed;
      splitfit::CrossSectionSet set;
      try {
        set = pipeline::cross_sections(shape.mesh, sections).set;
      } catch (const GeometryError& e) {
        failures.push_back("count " + std::to_string(c) + ", " + shape.id + ": " + e.what());
        continue;
      }
      const auto cloud = curvygan::reconstruct(g, ae, set, shape.seed);
      samples.push_back({shape.id, shape.class_label, c, metrics::chamfer(cloud, shape.gt),
                         metrics::hausdorff(cloud, shape.gt)});
    }
  }
  EvalReport report = aggregate(samples, options.counts);
  report.failures = std::move(failures);
  return report;
}

std::string report_csv(const EvalReport& report) {
  std::string out = "count";
  for (const auto& c : report.classes) out += "," + c;
  out += ",mean\n";
  char buf[64];
  for (const auto& row : report.rows) {
    out += std::to_string(row.count);
    for (const auto& c : report.classes) {
      auto it = row.per_class.find(c);
      if (it == row.per_class.end()) {
        out += ",";
        continue;
      }
      std::snprintf(buf, sizeof buf, ",%.6g", it->second);
      out += buf;
    }
    std::snprintf(buf, sizeof buf, ",%.6g\n", row.mean);
    out += buf;
  }
  return out;
}

nlohmann::json report_json(const EvalReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"count", r.count}, {"per_class", r.per_class}, {"mean", r.mean}, {"samples", r.samples}});
  }
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : report.samples) {
    samples.push_back({{"shape_id", s.id},
                       {"class_label", s.class_label},
                       {"count", s.count},
                       {"chamfer", s.chamfer},
                       {"hausdorff", s.hausdorff}});
  }
  return {{"classes", report.classes},
          {"per_class", report.per_class},
          {"rows", rows},
          {"samples", samples},
          {"failures", report.failures}};
}

}  // namespace curvy::evaluation
