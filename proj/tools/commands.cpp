#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "curvy/archive.hpp"
#include "curvy/curvygan.hpp"
#include "curvy/dataset.hpp"
#include "curvy/error.hpp"
#include "curvy/evaluation.hpp"
#include "curvy/gradsuite.hpp"
#include "curvy/graphrep.hpp"
#include "curvy/mesh_io.hpp"
#include "curvy/pipeline.hpp"
#include "curvy/pointae.hpp"
#include "curvy/shapes.hpp"

namespace curvy::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t default_seed() {
  if (const char* env = std::getenv("CURVY_SEED")) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw UsageError(std::string("CURVY_SEED is not an unsigned integer: ") + env);
  }
  return 0;
}

int parse_axis(const std::string& axis) {
  if (axis == "x") return 0;
  if (axis == "y") return 1;
  if (axis == "z") return 2;
  throw UsageError("axis must be x, y or z");
}

geometry::PlaneStrategy parse_strategy(const std::string& s) {
  if (s == "axis") return geometry::PlaneStrategy::kAxisAligned;
  if (s == "random") return geometry::PlaneStrategy::kRandom;
  throw UsageError("strategy must be axis or random");
}

json read_config(const std::string& path) {
  if (path.empty()) return json::object();
  json j = dataset::read_json(path);
  if (!j.is_object()) throw DataError(path + ": config must be a JSON object");
  return j;
}

json section(const json& config, const char* key) {
  return config.contains(key) ? config.at(key) : json::object();
}

void write_csv(const fs::path& path, const std::string& text) { dataset::write_text(path, text); }

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------

struct SliceArgs {
  std::string mesh, out, strategy = "axis", axis = "z";
  std::size_t planes = 10;
  std::uint64_t seed = 0;
};

int cmd_slice(const SliceArgs& a, std::ostream& out) {
  if (a.planes == 0) throw UsageError("--planes must be at least 1");
  const int axis = parse_axis(a.axis);
  const auto strategy = parse_strategy(a.strategy);
  const auto mesh = geometry::normalize_mesh(geometry::load_obj(a.mesh));
  const auto planes = geometry::sample_planes(mesh, a.planes, strategy, axis, a.seed);
  json groups = json::array();
  std::size_t total = 0;
  for (const auto& plane : planes) {
    json contours = json::array();
    for (const auto& c : geometry::slice_mesh(mesh, plane)) {
      json pts = json::array();
      for (const auto& p : c.points) pts.push_back({p.x(), p.y(), p.z()});
      contours.push_back({{"closed", c.closed}, {"length", c.length}, {"plane", dataset::to_json(c.plane)},
                          {"points", pts}});
      ++total;
    }
    groups.push_back({{"plane", dataset::to_json(plane)}, {"contours", contours}});
  }
  const json doc = {{"format_version", 1},
                    {"mesh", fs::path(a.mesh).filename().string()},
                    {"seed", a.seed},
                    {"strategy", a.strategy},
                    {"axis", a.axis},
                    {"planes", groups}};
  dataset::write_text(a.out, dataset::dump(doc));
  out << "wrote " << groups.size() << " plane groups, " << total << " contours to " << a.out << "\n";
  return 0;
}

struct FitArgs {
  std::string contours, out;
  std::size_t k = 8;
  double rho = 0.0;
};

int cmd_fit(const FitArgs& a, std::ostream& out, std::ostream& err) {
  if (a.k < 2) throw UsageError("--k must be at least 2");
  const json doc = dataset::read_json(a.contours);
  splitfit::EncodeOptions enc;
  enc.k = a.k;
  splitfit::CrossSectionSet set;
  try {
    std::size_t gi = 0;
    for (const auto& group : doc.at("planes")) {
      std::size_t ci = 0;
      for (const auto& cj : group.at("contours")) {
        geometry::Contour c;
        for (const auto& p : cj.at("points")) c.points.emplace_back(p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>());
        c.closed = true;
        c.plane = dataset::plane_from_json(cj.contains("plane") ? cj.at("plane") : group.at("plane"));
        c.update_length();
        const auto e = splitfit::encode_contour(pipeline::densify(c, a.rho), enc);
        err << "plane " << gi << " contour " << ci << ": " << e.contour.points.size() << " vertices, max residual "
            << e.max_residual << "\n";
        if (e.upsampled) {
          err << "  notice: contour upsampled by midpoint insertion to support k=" << a.k << "\n";
        }
        if (e.topped_up > 0) {
          err << "  notice: " << e.topped_up << " split(s) added by bisecting the longest pieces\n";
        }
        set.sections.push_back(e.section);
        ++ci;
      }
      ++gi;
    }
  } catch (const json::exception& e) {
    throw DataError(a.contours + ": " + e.what());
  }
  if (set.sections.empty()) throw GeometryError(a.contours + ": no contours to fit");
  const json block = {{"format_version", dataset::kFormatVersion}, {"k", a.k}, {"cross_sections", dataset::to_json(set)}};
  dataset::write_text(a.out, dataset::dump(block));
  out << "wrote " << set.m() << " cross-sections with k=" << a.k << " to " << a.out << "\n";
  return 0;
}

struct DatasetArgs {
  std::string mesh_dir, out_dir, classes, strategy = "axis", axis = "z";
  std::size_t planes = 10, k = 8, points = 2048;
  double rho = 0.0;
  std::uint64_t seed = 0;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int cmd_dataset(const DatasetArgs& a, std::ostream& out, std::ostream& err) {
  if (a.planes == 0) throw UsageError("--planes-per-shape must be at least 1");
  if (a.points == 0) throw UsageError("--points must be at least 1");
  if (a.k < 2) throw UsageError("--k must be at least 2");
  dataset::BuildOptions opts;
  opts.sections.planes = a.planes;
  opts.sections.strategy = parse_strategy(a.strategy);
  opts.sections.axis = parse_axis(a.axis);
  opts.sections.rho = a.rho;
  opts.sections.encode.k = a.k;
  opts.points = a.points;
  opts.seed = a.seed;
  const auto shapes = dataset::scan_mesh_dir(a.mesh_dir, split_list(a.classes));
  const auto report = dataset::build(shapes, opts, a.out_dir);
  for (const auto& f : report.failures) err << "skipped " << f << "\n";
  out << "wrote " << report.written << " records to " << a.out_dir << "\n";
  if (report.written == 0) throw GeometryError("no shape could be processed");
  return 0;
}

struct TrainAEArgs {
  std::string dataset, config, out_weights, loss_csv;
  std::optional<std::size_t> epochs, emb, points, batch_size;
  std::optional<double> lr;
  std::optional<std::uint64_t> seed;
};

int cmd_train_ae(const TrainAEArgs& a, std::ostream& out) {
  const json config = read_config(a.config);
  const auto ds = dataset::load(a.dataset);
  std::vector<geometry::PointSet> clouds;
  for (const auto& r : ds.records) clouds.push_back(ds.points(r));

  const json aej = section(config, "autoencoder");
  auto ae_cfg = archive::ae_config_from_json(aej);
  if (!aej.contains("points")) ae_cfg.points = static_cast<std::size_t>(clouds.front().rows());
  if (a.emb) ae_cfg.emb = *a.emb;
  if (a.points) ae_cfg.points = *a.points;

  const json tj = section(config, "train");
  pointae::AETrainConfig train;
  train.epochs = a.epochs.value_or(tj.value("epochs", train.epochs));
  train.lr = a.lr.value_or(tj.value("lr", train.lr));
  train.final_lr_fraction = tj.value("final_lr_fraction", train.final_lr_fraction);
  train.batch_size = a.batch_size.value_or(tj.value("batch_size", train.batch_size));
  train.seed = a.seed.value_or(tj.value("seed", default_seed()));

  const auto result = pointae::train_ae(clouds, ae_cfg, train);
  archive::save(archive::ae_archive(result.params, train.seed), a.out_weights);
  if (!a.loss_csv.empty()) {
    std::string csv = "epoch,chamfer\n";
    for (std::size_t i = 0; i < result.losses.size(); ++i) csv += std::to_string(i + 1) + "," + fmt(result.losses[i]) + "\n";
    write_csv(a.loss_csv, csv);
  }
  out << "trained autoencoder for " << train.epochs << " epochs";
  if (!result.losses.empty()) out << ", final chamfer " << result.losses.back();
  out << "; weights in " << archive::manifest_path(a.out_weights).string() << "\n";
  return 0;
}

struct TrainGanArgs {
  std::string dataset, ae_weights, config, out_weights, curve_csv, adversarial, discriminator_loss;
  std::optional<std::size_t> epochs, batch_size;
  std::optional<double> lr_g, lr_d;
  std::optional<std::uint64_t> seed;
};

curvygan::AdversarialMode parse_adversarial(const std::string& s) {
  if (s == "non-saturating") return curvygan::AdversarialMode::kNonSaturating;
  if (s == "saturating") return curvygan::AdversarialMode::kSaturating;
  throw UsageError("adversarial mode must be non-saturating or saturating");
}

curvygan::DiscriminatorMode parse_disc(const std::string& s) {
  if (s == "standard") return curvygan::DiscriminatorMode::kStandard;
  if (s == "printed") return curvygan::DiscriminatorMode::kPrintedVerbatim;
  throw UsageError("discriminator loss must be standard or printed");
}

int cmd_train_gan(const TrainGanArgs& a, std::ostream& out, std::ostream& err) {
  const json config = read_config(a.config);
  const auto ds = dataset::load(a.dataset);
  const auto ae = archive::ae_from_archive(archive::load(a.ae_weights));
  std::vector<curvygan::GanSample> data;
  for (const auto& r : ds.records) data.push_back({graphrep::build_graph(r.set), ds.points(r)});

  const auto gan_cfg = archive::gan_config_from_json(section(config, "gan"));
  const json tj = section(config, "train");
  curvygan::GanTrainConfig train;
  train.epochs = a.epochs.value_or(tj.value("epochs", train.epochs));
  train.lr_g = a.lr_g.value_or(tj.value("lr_g", train.lr_g));
  train.lr_d = a.lr_d.value_or(tj.value("lr_d", train.lr_d));
  train.final_lr_fraction = tj.value("final_lr_fraction", train.final_lr_fraction);
  train.batch_size = a.batch_size.value_or(tj.value("batch_size", train.batch_size));
  train.seed = a.seed.value_or(tj.value("seed", default_seed()));
  if (tj.contains("weights")) {
    const auto& w = tj.at("weights");
    train.weights.adversarial = w.value("adversarial", 1.0);
    train.weights.chamfer = w.value("chamfer", 1.0);
    train.weights.mse = w.value("mse", 1.0);
  }
  train.adversarial = parse_adversarial(
      !a.adversarial.empty() ? a.adversarial : tj.value("adversarial", std::string("non-saturating")));
  train.discriminator = parse_disc(
      !a.discriminator_loss.empty() ? a.discriminator_loss : tj.value("discriminator_loss", std::string("standard")));

  const auto result = curvygan::train_gan(data, ae, gan_cfg, train);
  archive::save(archive::gan_archive(result.generator, result.discriminator, train.seed), a.out_weights);
  if (!a.curve_csv.empty()) {
    std::string csv = "epoch,l_g,l_d,l_ch,l_mse\n";
    for (std::size_t i = 0; i < result.curve.size(); ++i) {
      const auto& c = result.curve[i];
      csv += std::to_string(i + 1) + "," + fmt(c.l_g) + "," + fmt(c.l_d) + "," + fmt(c.l_ch) + "," + fmt(c.l_mse) + "\n";
    }
    write_csv(a.curve_csv, csv);
  }
  if (result.diverged) {
    err << "error: " << result.message << "; last good checkpoint written to "
        << archive::manifest_path(a.out_weights).string() << "\n";
    return 3;
  }
  out << "trained generator for " << train.epochs << " epochs";
  if (!result.curve.empty()) out << ", final l_mse " << result.curve.back().l_mse;
  out << "; weights in " << archive::manifest_path(a.out_weights).string() << "\n";
  return 0;
}

struct ReconstructArgs {
  std::string weights, ae_weights, record, out_ply;
  std::uint64_t seed = 0;
};

int cmd_reconstruct(const ReconstructArgs& a, std::ostream& out) {
  const auto model = archive::gan_from_archive(archive::load(a.weights));
  const auto ae = archive::ae_from_archive(archive::load(a.ae_weights));
  const json j = dataset::read_json(a.record);
  splitfit::CrossSectionSet set;
  try {
    set = dataset::set_from_json(j.at("cross_sections"));
  } catch (const json::exception& e) {
    throw DataError(a.record + ": " + e.what());
  }
  const auto cloud = curvygan::reconstruct(model.generator, ae, set, a.seed);
  dataset::write_text(a.out_ply, geometry::format_ply(cloud, a.seed));
  out << "wrote " << cloud.rows() << " points to " << a.out_ply << "\n";
  return 0;
}

struct EvalArgs {
  std::string weights, ae_weights, dataset, out_report;
  std::vector<std::size_t> counts = {2, 5, 10, 11, 15, 20, 25};
  std::optional<std::uint64_t> seed;
};

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  const auto model = archive::gan_from_archive(archive::load(a.weights));
  const auto ae = archive::ae_from_archive(archive::load(a.ae_weights));
  const auto ds = dataset::load(a.dataset);
  const json opts = ds.index.value("options", json::object());
  evaluation::SweepOptions sweep;
  sweep.counts = a.counts;
  sweep.sections.strategy = parse_strategy(opts.value("strategy", std::string("axis")));
  sweep.sections.axis = opts.value("axis", 2);
  sweep.sections.rho = opts.value("rho", 0.0);
  sweep.sections.encode.k = opts.value("k", std::size_t{8});
  const std::uint64_t seed = a.seed.value_or(default_seed());
  std::vector<evaluation::TestShape> shapes;
  for (const auto& r : ds.records) {
    shapes.push_back({r.shape_id, r.class_label, ds.mesh(r), ds.points(r), dataset::shape_seed(seed, r.shape_id)});
  }
  const auto report = evaluation::sweep_cross_sections(model.generator, ae, shapes, sweep);
  for (const auto& f : report.failures) err << "excluded " << f << "\n";
  fs::path csv_path = a.out_report;
  if (csv_path.extension() != ".csv") csv_path += ".csv";
  const fs::path json_path = fs::path(csv_path).replace_extension(".json");
  const std::string csv = evaluation::report_csv(report);
  dataset::write_text(csv_path, csv);
  dataset::write_text(json_path, dataset::dump(evaluation::report_json(report)));
  out << csv;
  return 0;
}

int cmd_gradcheck(std::uint64_t seed, std::size_t instances, const std::string& only, std::ostream& out) {
  const auto results = gradsuite::run(seed, instances, only);
  bool ok = true;
  for (const auto& r : results) {
    const bool pass = r.report.max_rel_error <= gradsuite::kTolerance;
    ok = ok && pass;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-4s %-20s #%zu  max rel err %.3e over %zu entries\n", pass ? "ok" : "FAIL",
                  r.name.c_str(), r.instance, r.report.max_rel_error, r.report.checked);
    out << buf;
  }
  return ok ? 0 : 3;
}

int cmd_toy_corpus(std::size_t count, std::uint64_t seed, const std::string& out_dir, std::ostream& out) {
  if (count == 0) throw UsageError("--count must be at least 1");
  for (const auto& s : shapes::toy_corpus(count, seed)) {
    geometry::save_obj(s.mesh, fs::path(out_dir) / s.class_label / (s.id + ".obj"));
  }
  out << "wrote " << count << " meshes to " << out_dir << "\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Cross-section slicing, parametric fitting and graph-conditioned point cloud reconstruction", "curvy"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  std::uint64_t seed_fallback = 0;
  try {
    seed_fallback = default_seed();
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  SliceArgs slice;
  slice.seed = seed_fallback;
  auto* s = app.add_subcommand("slice", "Slice a mesh into closed contours (JSON)");
  s->add_option("--mesh", slice.mesh, "OBJ mesh")->required();
  s->add_option("--planes", slice.planes, "Number of planes");
  s->add_option("--strategy", slice.strategy, "axis | random");
  s->add_option("--axis", slice.axis, "x | y | z");
  s->add_option("--seed", slice.seed, "Seed for random planes");
  s->add_option("--out", slice.out, "Output JSON")->required();

  FitArgs fit;
  auto* f = app.add_subcommand("fit", "Fit degree-5 pieces to sliced contours");
  f->add_option("--contours", fit.contours, "Contours JSON from `slice`")->required();
  f->add_option("--k", fit.k, "Pieces per cross-section");
  f->add_option("--rho", fit.rho, "Densify contours to rho vertices per unit length");
  f->add_option("--out", fit.out, "Output JSON")->required();

  DatasetArgs ds;
  ds.seed = seed_fallback;
  auto* d = app.add_subcommand("dataset", "Build dataset records and ground-truth clouds");
  d->add_option("--mesh-dir", ds.mesh_dir, "Directory of <class>/*.obj")->required();
  d->add_option("--classes", ds.classes, "Comma-separated class filter");
  d->add_option("--planes-per-shape", ds.planes, "Cross-sections per shape");
  d->add_option("--strategy", ds.strategy, "axis | random");
  d->add_option("--axis", ds.axis, "x | y | z");
  d->add_option("--k", ds.k, "Pieces per cross-section");
  d->add_option("--rho", ds.rho, "Densify contours to rho vertices per unit length");
  d->add_option("--points", ds.points, "Ground-truth points per shape");
  d->add_option("--seed", ds.seed, "Seed");
  d->add_option("--out-dir", ds.out_dir, "Output directory")->required();

  TrainAEArgs tae;
  auto* ta = app.add_subcommand("train-ae", "Train the point cloud autoencoder");
  ta->add_option("--dataset", tae.dataset, "Dataset directory")->required();
  ta->add_option("--config", tae.config, "JSON config");
  ta->add_option("--out-weights", tae.out_weights, "Weight archive path")->required();
  ta->add_option("--epochs", tae.epochs);
  ta->add_option("--lr", tae.lr);
  ta->add_option("--emb", tae.emb, "Embedding size");
  ta->add_option("--points", tae.points, "Decoder point count");
  ta->add_option("--batch-size", tae.batch_size);
  ta->add_option("--seed", tae.seed);
  ta->add_option("--loss-csv", tae.loss_csv, "Per-epoch loss CSV");

  TrainGanArgs tg;
  auto* tgc = app.add_subcommand("train-gan", "Train generator and discriminator against a frozen autoencoder");
  tgc->add_option("--dataset", tg.dataset, "Dataset directory")->required();
  tgc->add_option("--ae-weights", tg.ae_weights, "Autoencoder archive")->required();
  tgc->add_option("--config", tg.config, "JSON config");
  tgc->add_option("--out-weights", tg.out_weights, "Weight archive path")->required();
  tgc->add_option("--epochs", tg.epochs);
  tgc->add_option("--lr-g", tg.lr_g);
  tgc->add_option("--lr-d", tg.lr_d);
  tgc->add_option("--batch-size", tg.batch_size);
  tgc->add_option("--seed", tg.seed);
  tgc->add_option("--adversarial", tg.adversarial, "non-saturating | saturating");
  tgc->add_option("--discriminator-loss", tg.discriminator_loss, "standard | printed");
  tgc->add_option("--curve-csv", tg.curve_csv, "Per-epoch loss CSV");

  ReconstructArgs rec;
  rec.seed = seed_fallback;
  auto* r = app.add_subcommand("reconstruct", "Generate a point cloud from a record's cross-sections");
  r->add_option("--weights", rec.weights, "Generator archive")->required();
  r->add_option("--ae-weights", rec.ae_weights, "Autoencoder archive")->required();
  r->add_option("--record", rec.record, "Record or fit JSON")->required();
  r->add_option("--seed", rec.seed, "Noise seed");
  r->add_option("--out-ply", rec.out_ply, "Output PLY")->required();

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Per-class Chamfer across cross-section counts");
  e->add_option("--weights", ev.weights, "Generator archive")->required();
  e->add_option("--ae-weights", ev.ae_weights, "Autoencoder archive")->required();
  e->add_option("--dataset", ev.dataset, "Dataset directory")->required();
  e->add_option("--counts", ev.counts, "Cross-section counts")->delimiter(',');
  e->add_option("--seed", ev.seed);
  e->add_option("--out-report", ev.out_report, "Report path (.csv and .json written)")->required();

  std::uint64_t gc_seed = seed_fallback;
  std::size_t gc_instances = 3;
  std::string gc_only;
  auto* g = app.add_subcommand("gradcheck", "Finite-difference gradient suite");
  g->add_option("--seed", gc_seed);
  g->add_option("--instances", gc_instances);
  g->add_option("--case", gc_only, "Run a single case");

  std::size_t toy_count = 20;
  std::uint64_t toy_seed = seed_fallback;
  std::string toy_out;
  auto* t = app.add_subcommand("toy-corpus", "Write the synthetic sphere/box/ellipsoid corpus as OBJ files");
  t->add_option("--count", toy_count);
  t->add_option("--seed", toy_seed);
  t->add_option("--out-dir", toy_out)->required();

  std::vector<std::string> argv_storage;
  argv_storage.push_back("curvy");
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& pe) {
    std::ostringstream o, er;
    const int code = app.exit(pe, o, er);
    out << o.str();
    err << er.str();
    return code == 0 ? 0 : 1;
  }

  try {
    if (s->parsed()) return cmd_slice(slice, out);
    if (f->parsed()) return cmd_fit(fit, out, err);
    if (d->parsed()) return cmd_dataset(ds, out, err);
    if (ta->parsed()) return cmd_train_ae(tae, out);
    if (tgc->parsed()) return cmd_train_gan(tg, out, err);
    if (r->parsed()) return cmd_reconstruct(rec, out);
    if (e->parsed()) return cmd_eval(ev, out, err);
    if (g->parsed()) return cmd_gradcheck(gc_seed, gc_instances, gc_only, out);
    if (t->parsed()) return cmd_toy_corpus(toy_count, toy_seed, toy_out, out);
  } catch (const UsageError& ex) {
    err << "usage error: " << ex.what() << "\n";
    return 1;
  } catch (const DivergenceError& ex) {
    err << "error: " << ex.what() << "\n";
    return 3;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& ex) {
    err << "error: " << ex.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace curvy::cli
