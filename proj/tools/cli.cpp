// Copyright 2026 The CRG Explainer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "crg/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "crg/cam.hpp"
#include "crg/checks.hpp"
#include "crg/heatmap_ops.hpp"
#include "crg/image_io.hpp"
#include "crg/metrics.hpp"
#include "crg/model_zoo.hpp"
#include "crg/utility.hpp"

namespace crg {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct ModelOptions {
  std::string arch = "cnn-smooth";
  std::string weights;
  std::uint64_t seed = 0;
  std::size_t num_classes = 3;
  std::string tap = "auto";
  std::string save_weights;

  void add_to(CLI::App& cmd) {
    cmd.add_option("--arch", arch, "cnn-relu | cnn-smooth | mlp-smooth")->capture_default_str();
    cmd.add_option("--weights", weights, "load a weight file instead of building from --arch/--seed");
    cmd.add_option("--seed", seed, "weight seed")->capture_default_str();
    cmd.add_option("--num-classes", num_classes, "number of classes")->capture_default_str()->check(
        CLI::PositiveNumber);
    cmd.add_option("--tap", tap, "target layer, or auto")->capture_default_str();
    cmd.add_option("--save-weights", save_weights, "write the model used to this path");
  }

  /// Weight files carry their own input layout; built models take the image's.
  ToyModel resolve(const InputSpec& input) const {
    ToyModel model = weights.empty() ? build_model(parse_architecture(arch), num_classes, seed, input)
                                     : load_weights(weights);
    select_tap(model, tap);
    if (!save_weights.empty()) save_weights_to(model);
    return model;
  }

  void save_weights_to(const ToyModel& model) const { crg::save_weights(model, save_weights); }
};

InputSpec spec_of(const Tensor& pixels) {
  return {pixels.shape()[0], pixels.shape()[1], pixels.shape()[2]};
}

/// Replicates a grey image across channels when the model expects colour.
Tensor fit_channels(const Tensor& pixels, const InputSpec& input) {
  const InputSpec have = spec_of(pixels);
  if (have.height != input.height || have.width != input.width) {
    throw std::invalid_argument("image is " + std::to_string(have.height) + "x" + std::to_string(have.width) +
                                ", model expects " + std::to_string(input.height) + "x" +
                                std::to_string(input.width));
  }
  if (have.channels == input.channels) return pixels;
  if (have.channels != 1) {
    throw std::invalid_argument("image has " + std::to_string(have.channels) + " channels, model expects " +
                                std::to_string(input.channels));
  }
  Tensor out(input.shape());
  const std::size_t plane = input.height * input.width;
  for (std::size_t c = 0; c < input.channels; ++c) {
    for (std::size_t k = 0; k < plane; ++k) out[c * plane + k] = pixels[k];
  }
  return out;
}

std::size_t argmax(const Tensor& t) {
  return static_cast<std::size_t>(std::max_element(t.data().begin(), t.data().end()) - t.data().begin());
}

json summary(const Eigen::VectorXd& v) {
  return {{"min", v.minCoeff()},
          {"max", v.maxCoeff()},
          {"mean", v.mean()},
          {"l1", v.cwiseAbs().sum()},
          {"positive_fraction", static_cast<double>((v.array() > 0.0).count()) / static_cast<double>(v.size())}};
}

json to_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

double percent(double fraction) { return std::round(fraction * 100.0 * 1e4) / 1e4; }

std::string hex64(std::uint64_t v) {
  char buf[19];
  std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path);
}

void emit_report(const json& report, const std::string& path, std::ostream& out) {
  const std::string text = report.dump(2) + "\n";
  if (path.empty()) {
    out << text;
  } else {
    write_text(path, text);
  }
}

struct ExplainOptions {
  ModelOptions model;
  std::string image;
  std::optional<std::size_t> target;
  std::string utility = "rest";
  std::string method = "shapleycam";
  std::uint64_t method_seed = 0;
  std::string out_dir = ".";
  double alpha = 0.5;
};

int run_explain(const ExplainOptions& o, std::ostream& out) {
  const Image img = read_image(o.image);
  const ToyModel model = o.model.resolve(spec_of(img.pixels));
  const Tensor x = fit_channels(img.pixels, model.input);
  const CamMethod method{parse_method(o.method), o.method_seed};
  UtilitySpec spec{0, parse_utility(o.utility)};

  const Tensor logits = predict(model, x);
  const std::size_t predicted = argmax(logits);
  spec.target_class = o.target.value_or(predicted);

  const Explanation e = explain_weights(model, x, spec, method);
  const Heatmap h = assemble_heatmap(e.weights, e.activations, method);
  const NormalizedHeatmap norm = to_normalized(h, model.input.height, model.input.width);

  const std::string stem = fs::path(o.image).stem().string();
  const fs::path dir(o.out_dir);
  fs::create_directories(dir);
  const std::string base = stem + "." + to_string(method.kind);
  const fs::path heat_path = dir / (base + ".heatmap.ppm");
  const fs::path overlay_path = dir / (base + ".overlay.ppm");
  const fs::path sidecar_path = dir / (base + ".json");
  write_image(heat_path.string(), colorize(norm));
  write_image(overlay_path.string(), overlay(Image::from_tensor(x), norm, {o.alpha}));

  json crg = nullptr;
  if (e.weights.order != WeightOrder::None) {
    const CrgClass k = classify_crg(e.weights.values, e.activations);
    crg = {{"type_i_equals_type_ii", k.type_i_equals_type_ii}, {"optimal", k.optimal}};
  }
  const bool cam_gap = method.kind == MethodKind::CamGap;
  const json sidecar = {
      {"image", fs::path(o.image).filename().string()},
      {"arch", to_string(model.arch)},
      {"tap", model.tap},
      {"method", to_string(method.kind)},
      {"utility", to_string(cam_gap ? UtilityKind::PreSoftmax : spec.kind)},
      {"class", spec.target_class},
      {"predicted_class", predicted},
      {"logits", to_json(logits.data())},
      {"probabilities", to_json(softmax(logits.data()))},
      {"map", {{"height", h.map_height}, {"width", h.map_width}}},
      {"pre_relu", summary(h.pre_relu)},
      {"post_relu", summary(h.post_relu)},
      {"pre_relu_values", to_json(h.pre_relu)},
      {"crg", crg},
      {"backward_passes", e.backward_passes},
      {"weight_checksum", hex64(weight_checksum(model))},
      {"heatmap", heat_path.filename().string()},
      {"overlay", overlay_path.filename().string()},
  };
  write_text(sidecar_path.string(), sidecar.dump(2) + "\n");
  out << heat_path.string() << "\n" << overlay_path.string() << "\n" << sidecar_path.string() << "\n";
  return 0;
}

struct EvaluateOptions {
  ModelOptions model;
  std::string images;
  std::optional<std::size_t> target;
  std::string utility = "rest";
  std::string method = "shapleycam";
  std::uint64_t method_seed = 0;
  std::string report;
  std::string csv;
};

std::vector<fs::path> list_images(const std::string& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir);
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string ext = entry.path().extension().string();
    if (entry.is_regular_file() && (ext == ".ppm" || ext == ".pgm" || ext == ".pnm")) paths.push_back(entry.path());
  }
  std::sort(paths.begin(), paths.end());
  return paths;
}

int run_evaluate(const EvaluateOptions& o, std::ostream& out, std::ostream& err) {
  const std::vector<fs::path> paths = list_images(o.images);
  if (paths.empty()) {
    err << "error: no images (.ppm/.pgm) in " << o.images << "\n";
    return 1;
  }
  std::vector<Image> decoded;
  std::vector<std::string> ids;
  for (const auto& p : paths) {
    try {
      decoded.push_back(read_image(p.string()));
      ids.push_back(p.filename().string());
    } catch (const std::exception& ex) {
      err << "warning: skipping " << p.filename().string() << ": " << ex.what() << "\n";
    }
  }
  if (decoded.empty()) {
    err << "error: no images could be decoded in " << o.images << "\n";
    return 1;
  }
  const ToyModel model = o.model.resolve(spec_of(decoded.front().pixels));
  std::vector<BatchImage> batch;
  for (std::size_t i = 0; i < decoded.size(); ++i) {
    try {
      batch.push_back({ids[i], fit_channels(decoded[i].pixels, model.input)});
    } catch (const std::exception& ex) {
      err << "warning: skipping " << ids[i] << ": " << ex.what() << "\n";
    }
  }
  if (batch.empty()) {
    err << "error: no images match the model input in " << o.images << "\n";
    return 1;
  }
  const CamMethod method{parse_method(o.method), o.method_seed};
  const UtilityKind utility = parse_utility(o.utility);
  const MetricRecord rec = evaluate_batch(model, batch, utility, method, o.target);
  for (const auto& s : rec.skipped) err << "warning: skipped " << s << "\n";
  if (rec.n_images() == 0) {
    err << "error: every image failed\n";
    return 1;
  }

  const json report = {{"method", to_string(method.kind)},
                       {"utility", to_string(utility)},
                       {"arch", to_string(model.arch)},
                       {"n_images", rec.n_images()},
                       {"ad", percent(rec.ad)},
                       {"coherency", percent(rec.coherency)},
                       {"complexity", percent(rec.complexity)},
                       {"adcc", percent(rec.adcc)},
                       {"ic", percent(rec.ic)},
                       {"add", percent(rec.add)}};
  emit_report(report, o.report, out);

  if (!o.csv.empty()) {
    std::ostringstream csv;
    csv.precision(17);
    csv << "id,class,conf_full,conf_expl,conf_anti,ad,coherency,complexity,increase,add\n";
    for (const auto& m : rec.images) {
      csv << m.id << ',' << m.target_class << ',' << m.conf_full << ',' << m.conf_expl << ',' << m.conf_anti << ','
          << m.ad << ',' << m.coherency << ',' << m.complexity << ',' << (m.increase ? 1 : 0) << ',' << m.add
          << '\n';
    }
    write_text(o.csv, csv.str());
  }
  return 0;
}

int finish_suite(const checks::SuiteReport& report, const std::string& path, std::ostream& out,
                 std::ostream& err) {
  emit_report(report.to_json(), path, out);
  if (!report.passed()) {
    for (const auto& c : report.checks) {
      if (!c.passed) err << "FAILED: " << c.name << "\n";
    }
    return 1;
  }
  return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Class activation maps as cooperative-game explanations"};
  app.name("crg");
  app.require_subcommand(1);

  ExplainOptions ex;
  CLI::App* explain_cmd = app.add_subcommand("explain", "write a heatmap, an overlay and a JSON sidecar");
  ex.model.add_to(*explain_cmd);
  explain_cmd->add_option("--image", ex.image, "input PPM/PGM")->required();
  explain_cmd->add_option("--class", ex.target, "target class (default: predicted)");
  explain_cmd->add_option("--utility", ex.utility, "rest | pre | post | logpost")->capture_default_str();
  explain_cmd->add_option("--method", ex.method, "CAM method")->capture_default_str();
  explain_cmd->add_option("--method-seed", ex.method_seed, "seed for randomcam")->capture_default_str();
  explain_cmd->add_option("--out-dir", ex.out_dir, "output directory")->capture_default_str();
  explain_cmd->add_option("--alpha", ex.alpha, "overlay opacity")->capture_default_str()->check(
      CLI::Range(0.0, 1.0));

  EvaluateOptions ev;
  CLI::App* evaluate_cmd = app.add_subcommand("evaluate", "explanation-quality metrics over an image directory");
  ev.model.add_to(*evaluate_cmd);
  evaluate_cmd->add_option("--images", ev.images, "directory of PPM/PGM images")->required();
  evaluate_cmd->add_option("--class", ev.target, "target class (default: predicted per image)");
  evaluate_cmd->add_option("--utility", ev.utility, "rest | pre | post | logpost")->capture_default_str();
  evaluate_cmd->add_option("--method", ev.method, "CAM method")->capture_default_str();
  evaluate_cmd->add_option("--method-seed", ev.method_seed, "seed for randomcam")->capture_default_str();
  evaluate_cmd->add_option("--report", ev.report, "JSON report path (default: stdout)");
  evaluate_cmd->add_option("--csv", ev.csv, "per-image CSV path");

  std::uint64_t suite_seed = 0;
  std::size_t graphs = 100;
  std::size_t seeds = 5;
  std::string suite_report;
  CLI::App* shapley_cmd = app.add_subcommand("shapley-verify", "Shapley axioms and closed-form exactness");
  shapley_cmd->add_option("--seed", suite_seed, "base seed")->capture_default_str();
  shapley_cmd->add_option("--report", suite_report, "JSON report path (default: stdout)");
  CLI::App* hvp_cmd = app.add_subcommand("hvp-check", "gradients and Hessian-vector products vs finite differences");
  hvp_cmd->add_option("--seed", suite_seed, "base seed")->capture_default_str();
  hvp_cmd->add_option("--graphs", graphs, "random graphs per check")->capture_default_str()->check(
      CLI::PositiveNumber);
  hvp_cmd->add_option("--report", suite_report, "JSON report path (default: stdout)");
  CLI::App* theorem_cmd = app.add_subcommand("theorem-check", "softmax ensemble and ReST identities");
  theorem_cmd->add_option("--seeds", seeds, "seeds per configuration")->capture_default_str()->check(
      CLI::PositiveNumber);
  theorem_cmd->add_option("--report", suite_report, "JSON report path (default: stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (explain_cmd->parsed()) return run_explain(ex, out);
    if (evaluate_cmd->parsed()) return run_evaluate(ev, out, err);
    if (shapley_cmd->parsed()) return finish_suite(checks::shapley_verify_suite(suite_seed), suite_report, out, err);
    if (hvp_cmd->parsed()) return finish_suite(checks::hvp_check_suite(suite_seed, graphs), suite_report, out, err);
    if (theorem_cmd->parsed()) return finish_suite(checks::theorem_check_suite(seeds), suite_report, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace crg
