/* Copyright 2026 The OTSNet Desk Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "otsnet/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "otsnet/ablation.hpp"
#include "otsnet/errors.hpp"
#include "otsnet/exports.hpp"
#include "otsnet/gradcheck_suite.hpp"
#include "otsnet/image_io.hpp"
#include "otsnet/metrics.hpp"

namespace otsnet {
namespace fs = std::filesystem;

namespace {

std::string fixed(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

void print_header(std::ostream& out, const std::string& command, const RunConfig& cfg) {
  out << "# otsnet " << command << '\n';
  write_config(out, cfg, "# ");
}

void print_metrics(std::ostream& out, const std::string& label, const Metrics& m) {
  out << label << " count=" << m.count << " sequence_accuracy=" << fixed(m.sequence_accuracy)
      << " character_accuracy=" << fixed(m.character_accuracy) << '\n';
}

fs::path checkpoint_path(const CommandOptions& options, const RunConfig& cfg) {
  return options.checkpoint ? fs::path(*options.checkpoint) : fs::path(cfg.paths.checkpoint_dir);
}

void restore(OtsNet& model, const fs::path& dir) { load_checkpoint(model.parameters(), dir); }

std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::directory_iterator(in)) {
        if (entry.is_regular_file()) found.push_back(entry.path());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.emplace_back(in);
    }
  }
  return files;
}

std::vector<double> load_raster(const fs::path& path, const ModelConfig& cfg) {
  return resize_bilinear(read_pgm(path), cfg.image_height, cfg.image_width).pixels;
}

// Maps the error taxonomy onto exit codes.
template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const CheckpointError& e) {
    err << "checkpoint error: " << e.what() << '\n';
    return kExitCheckpoint;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace

std::size_t worker_threads() {
  if (const char* env = std::getenv("OTSNET_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n > 0) return static_cast<std::size_t>(n);
  }
  return 1;
}

RunConfig resolve_config(const CommandOptions& options) {
  RunConfig cfg = options.config_path.empty() ? RunConfig{} : load_config(options.config_path);
  if (options.seed) cfg.train.seed = *options.seed;
  cfg.validate();
  return cfg;
}

std::vector<SyntheticSample> load_dataset(const RunConfig& cfg, const std::string& split) {
  if (cfg.data.source == "directory") {
    const fs::path dir(cfg.data.directory);
    std::ifstream labels(dir / "labels.tsv");
    if (!labels) throw ConfigError("cannot read " + (dir / "labels.tsv").string());
    std::vector<SyntheticSample> out;
    std::string line;
    while (std::getline(labels, line)) {
      if (line.empty()) continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos) throw ConfigError("labels.tsv line without a tab: " + line);
      SyntheticSample s;
      s.text = line.substr(tab + 1);
      s.image = load_raster(dir / line.substr(0, tab), cfg.model);
      out.push_back(std::move(s));
    }
    return out;
  }
  std::vector<SyntheticSample> train_part, heldout_part;
  split_corpus(synth_generate(cfg.data.synth), cfg.data.heldout_fraction, train_part, heldout_part);
  if (split == "train") return train_part;
  if (split == "heldout") return heldout_part;
  if (split == "all") {
    train_part.insert(train_part.end(), heldout_part.begin(), heldout_part.end());
    return train_part;
  }
  throw ConfigError("unknown data split '" + split + "'");
}

int cmd_train(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    RunConfig cfg = resolve_config(options);
    if (options.out) {
      const fs::path root(*options.out);
      cfg.paths.checkpoint_dir = (root / "checkpoint").string();
      cfg.paths.export_dir = (root / "exports").string();
      cfg.paths.log_file = (root / "train_log.csv").string();
    }
    print_header(out, "train", cfg);
    const auto train_set = load_dataset(cfg, "train");
    if (train_set.empty()) throw ConfigError("training split is empty");

    OtsNet model(cfg.model);
    model.initialize(cfg.train.seed);
    out << "# parameters " << model.parameters().total_elements() << '\n';
    const fs::path log_path(cfg.paths.log_file);
    if (log_path.has_parent_path()) fs::create_directories(log_path.parent_path());
    std::ofstream log(log_path);
    if (!log) throw ConfigError("cannot write training log " + log_path.string());
    write_log_header(log);

    const fs::path ckpt(cfg.paths.checkpoint_dir);
    double epoch_loss = 0.0;
    std::size_t epoch_steps = 0;
    TrainHooks hooks;
    hooks.on_step = [&](const StepLog& s) {
      write_log_line(log, s);
      epoch_loss += s.total;
      ++epoch_steps;
    };
    hooks.on_epoch = [&](std::size_t epoch) {
      out << "epoch " << epoch << " mean_loss " << fixed(epoch_loss / static_cast<double>(epoch_steps), 6) << '\n';
      epoch_loss = 0.0;
      epoch_steps = 0;
      if (cfg.paths.checkpoint_every && epoch % cfg.paths.checkpoint_every == 0 && epoch != cfg.train.epochs) {
        char name[32];
        std::snprintf(name, sizeof name, "epoch_%04zu", epoch);
        save_checkpoint(model.parameters(), ckpt / name);
      }
    };
    train(model, train_set, cfg.train, hooks);
    save_checkpoint(model.parameters(), ckpt);
    out << "checkpoint " << ckpt.string() << '\n';
    print_metrics(out, "train", evaluate(model, train_set, cfg.eval_batch, nullptr, worker_threads()));
    const auto heldout = load_dataset(cfg, "heldout");
    if (!heldout.empty() && cfg.data.source == "synth") {
      print_metrics(out, "heldout", evaluate(model, heldout, cfg.eval_batch, nullptr, worker_threads()));
    }
    return static_cast<int>(kExitOk);
  });
}

int cmd_eval(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = resolve_config(options);
    OtsNet model(cfg.model);
    restore(model, checkpoint_path(options, cfg));
    const auto data = load_dataset(cfg, cfg.data.eval_split);
    if (data.empty()) throw ConfigError("evaluation dataset is empty");
    const Metrics m = evaluate(model, data, cfg.eval_batch, nullptr, worker_threads());
    print_metrics(out, cfg.data.eval_split, m);
    for (const auto& [key, sub] : m.subsets) {
      out << "  " << key << " count=" << sub.count << " sequence_accuracy=" << fixed(sub.sequence_accuracy)
          << " character_accuracy=" << fixed(sub.character_accuracy) << '\n';
    }
    return static_cast<int>(kExitOk);
  });
}

int cmd_infer(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = resolve_config(options);
    const auto files = expand_inputs(options.inputs);
    if (files.empty()) throw ConfigError("no input images given");
    OtsNet model(cfg.model);
    restore(model, checkpoint_path(options, cfg));
    std::vector<std::vector<double>> rasters;
    std::vector<fs::path> decoded;
    for (const auto& f : files) {
      try {
        rasters.push_back(load_raster(f, cfg.model));
        decoded.push_back(f);
      } catch (const std::exception& e) {
        err << "warning: skipping " << f.string() << ": " << e.what() << '\n';
      }
    }
    if (rasters.empty()) {
      err << "error: no input could be decoded\n";
      return static_cast<int>(kExitFailure);
    }
    std::vector<const std::vector<double>*> images;
    for (const auto& r : rasters) images.push_back(&r);
    const auto results = recognize_all(model, images, cfg.eval_batch, worker_threads());
    for (std::size_t i = 0; i < results.size(); ++i) out << recognition_line(decoded[i].string(), results[i]) << '\n';
    return static_cast<int>(kExitOk);
  });
}

int cmd_dump_attention(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = resolve_config(options);
    if (options.inputs.size() != 1) throw ConfigError("dump-attention takes exactly one image");
    OtsNet model(cfg.model);
    restore(model, checkpoint_path(options, cfg));
    const auto raster = load_raster(options.inputs.front(), cfg.model);
    AttentionSink sink;
    const auto result = model.recognize(stack_images({&raster}, cfg.model.image_height, cfg.model.image_width), &sink);
    const fs::path dir = options.out ? fs::path(*options.out) : fs::path(cfg.paths.export_dir) / "attention";
    const auto files = export_attention(sink, dir);
    out << recognition_line(options.inputs.front(), result.front()) << '\n';
    out << "maps " << files.size() << ' ' << dir.string() << '\n';
    return static_cast<int>(kExitOk);
  });
}

int cmd_export_features(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = resolve_config(options);
    OtsNet model(cfg.model);
    restore(model, checkpoint_path(options, cfg));
    const auto data = load_dataset(cfg, cfg.data.eval_split);
    if (data.empty()) throw ConfigError("feature export dataset is empty");
    const fs::path dir = options.out ? fs::path(*options.out) : fs::path(cfg.paths.export_dir);
    fs::create_directories(dir);
    const fs::path file = dir / "features.csv";
    std::ofstream csv(file);
    if (!csv) throw ConfigError("cannot write " + file.string());
    std::size_t rows = 0;
    for (std::size_t start = 0; start < data.size(); start += cfg.eval_batch) {
      const std::size_t end = std::min(data.size(), start + cfg.eval_batch);
      std::vector<const std::vector<double>*> images;
      std::vector<std::string> labels;
      for (std::size_t i = start; i < end; ++i) {
        images.push_back(&data[i].image);
        labels.push_back(data[i].text);
        rows += std::min(data[i].text.size(), cfg.model.slots);
      }
      write_feature_rows(csv, model.semantic_features(stack_images(images, cfg.model.image_height,
                                                                   cfg.model.image_width)),
                         labels);
    }
    out << "features " << rows << ' ' << file.string() << '\n';
    return static_cast<int>(kExitOk);
  });
}

int cmd_gradcheck(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = resolve_config(options);
    bool all = true;
    for (const auto& c : run_gradcheck_suite(cfg.model, cfg.train.seed)) {
      double worst = 0.0;
      for (const auto& e : c.report.entries) worst = std::max(worst, e.max_rel_error);
      out << (c.report.passed ? "PASS " : "FAIL ") << c.name << " params=" << c.report.entries.size()
          << " max_rel_error=" << std::scientific << std::setprecision(3) << worst << std::defaultfloat
          << " worst=" << c.report.worst() << '\n';
      all = all && c.report.passed;
    }
    return static_cast<int>(all ? kExitOk : kExitNumeric);
  });
}

int cmd_ablate(const CommandOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (!options.suite) throw ConfigError("ablate needs --suite");
    ablation_suite(*options.suite);  // rejects unknown names before any work
    const RunConfig cfg = resolve_config(options);
    print_header(out, "ablate " + *options.suite, cfg);
    const AblationResult result = run_ablation(*options.suite, cfg, [&](const std::string& line) {
      out << line << '\n' << std::flush;
    });
    const fs::path dir = options.out ? fs::path(*options.out) : fs::path(cfg.paths.export_dir);
    fs::create_directories(dir);
    const fs::path file = dir / ("ablation_" + *options.suite + ".csv");
    std::ofstream table(file);
    if (!table) throw ConfigError("cannot write " + file.string());
    write_ablation_table(table, result);
    write_ablation_table(out, result);
    for (const auto& v : result.verdicts) out << "verdict " << (v.holds ? "PASS " : "FAIL ") << v.claim << '\n';
    out << "table " << file.string() << '\n';
    return static_cast<int>(kExitOk);
  });
}

int run_command(const std::string& name, const CommandOptions& options, std::ostream& out, std::ostream& err) {
  if (name == "train") return cmd_train(options, out, err);
  if (name == "eval") return cmd_eval(options, out, err);
  if (name == "infer") return cmd_infer(options, out, err);
  if (name == "dump-attention") return cmd_dump_attention(options, out, err);
  if (name == "export-features") return cmd_export_features(options, out, err);
  if (name == "gradcheck") return cmd_gradcheck(options, out, err);
  if (name == "ablate") return cmd_ablate(options, out, err);
  err << "unknown command '" << name << "'\n";
  return kExitConfig;
}

}  // namespace otsnet
