// drowsy: batch pipeline for eye-state based drowsiness detection.
//
// Subcommands: synth, preprocess, train, eval, stream, bench. Every command
// is deterministic given its flags (including --seed) and echoes its
// configuration into the artifacts it writes.

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "drowsy/bench.hpp"
#include "drowsy/dataset.hpp"
#include "drowsy/decision.hpp"
#include "drowsy/errors.hpp"
#include "drowsy/experiments.hpp"
#include "drowsy/fdnn.hpp"
#include "drowsy/landmarks.hpp"
#include "drowsy/metrics.hpp"
#include "drowsy/pgm.hpp"

namespace fs = std::filesystem;
using namespace drowsy;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw DataError("short write to " + path.string());
}

std::vector<std::uint8_t> read_binary_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
}

// "# key=value" provenance lines prefixed to every CSV artifact.
std::string config_header(const std::string& command,
                          const std::vector<std::pair<std::string, std::string>>& kv) {
  std::ostringstream os;
  os << "# drowsy " << command << "\n";
  for (const auto& [k, v] : kv) os << "# " << k << "=" << v << "\n";
  return os.str();
}

std::vector<double> parse_fractions(const std::string& text) {
  std::vector<double> fractions;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      fractions.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw std::invalid_argument("--split: \"" + item + "\" is not a number");
    }
  }
  return fractions;
}

// Last contiguous digit run in the filename stem, e.g. "frame_0042" -> 42.
std::optional<std::int64_t> frame_id_of(const std::string& stem) {
  int end = -1;
  for (int i = static_cast<int>(stem.size()) - 1; i >= 0; --i) {
    if (std::isdigit(static_cast<unsigned char>(stem[i]))) {
      end = i + 1;
      break;
    }
  }
  if (end < 0) return std::nullopt;
  int begin = end;
  while (begin > 0 && std::isdigit(static_cast<unsigned char>(stem[begin - 1]))) --begin;
  return std::stoll(stem.substr(begin, end - begin));
}

std::vector<fs::path> sorted_files(const fs::path& dir, const std::string& extension) {
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == extension)
      files.push_back(entry.path());
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  return files;
}

struct EvalSummary {
  ConfusionCounts counts;
  ClassMetrics metrics;
  double auc = 0.0;
};

EvalSummary evaluate(const FdnnModel& model, const Corpus& corpus) {
  std::vector<std::pair<EyeLabel, EyeLabel>> pred_truth;
  std::vector<double> scores;
  std::vector<EyeLabel> labels;
  pred_truth.reserve(corpus.samples.size());
  for (const EyeSample& s : corpus.samples) {
    const Prediction p = model.predict(s.pixels);
    pred_truth.push_back({p.label, s.label});
    scores.push_back(p.p_closed);
    labels.push_back(s.label);
  }
  EvalSummary summary;
  summary.counts = confusion(pred_truth);
  summary.metrics = precision_recall_accuracy(summary.counts);
  summary.auc = roc_auc(scores, labels).auc;
  return summary;
}

std::string metric_str(const std::optional<double>& v) {
  if (!v) return "undefined";
  std::ostringstream os;
  os << *v;
  return os.str();
}

void print_eval_block(const std::string& name, const EvalSummary& s) {
  std::cout << name << ": accuracy=" << metric_str(s.metrics.accuracy)
            << " auc=" << s.auc << " precision=" << metric_str(s.metrics.precision)
            << " recall=" << metric_str(s.metrics.recall) << " (tp=" << s.counts.tp
            << " fp=" << s.counts.fp << " tn=" << s.counts.tn << " fn=" << s.counts.fn
            << ")\n";
}

// ---------------------------------------------------------------- synth ----

struct SynthArgs {
  int n = 200;
  std::uint64_t seed = 42;
  double noise = SynthParams{}.noise_stddev;
  std::string out;
};

int cmd_synth(const SynthArgs& args) {
  const fs::path root(args.out);
  fs::create_directories(root / "open");
  fs::create_directories(root / "closed");

  // Same rng walk as synth_corpus, so loading the tree reproduces it.
  Rng rng(args.seed);
  const SynthParams params{args.noise};
  Corpus manifest_only;
  for (EyeLabel label : {EyeLabel::Closed, EyeLabel::Open}) {
    for (int k = 0; k < args.n; ++k) {
      std::ostringstream name;
      name << to_string(label) << "_" << std::setw(5) << std::setfill('0') << k << ".pgm";
      const fs::path file = root / to_string(label) / name.str();
      write_pgm_file(file, synth_glyph(rng, label, params));
      manifest_only.manifest.push_back({file.string(), label, "synth"});
    }
  }

  std::ostringstream csv;
  csv << config_header("synth", {{"n", std::to_string(args.n)},
                                 {"seed", std::to_string(args.seed)},
                                 {"noise", std::to_string(args.noise)}});
  csv << manifest_csv(manifest_only);
  write_text_file(root / "manifest.csv", csv.str());

  std::cout << "wrote " << 2 * args.n << " glyphs under " << root.string() << "\n";
  return 0;
}

// ----------------------------------------------------------- preprocess ----

struct PreprocessArgs {
  std::string frames;
  std::string landmarks;
  std::string out;
  double margin = 0.4;
  bool no_square = false;
};

int cmd_preprocess(const PreprocessArgs& args) {
  const auto rows = parse_landmarks_csv(read_text_file(args.landmarks));
  std::map<std::int64_t, const LandmarkSet*> by_id;
  for (const LandmarkSet& lm : rows)
    if (!by_id.emplace(lm.frame_id, &lm).second)
      throw DataError("duplicate landmark row for frame id " + std::to_string(lm.frame_id));

  const std::vector<fs::path> frames = sorted_files(args.frames, ".pgm");
  if (frames.empty()) throw DataError("no .pgm frames in " + std::string(args.frames));

  fs::create_directories(args.out);
  const EyeBoxParams box_params{args.margin, !args.no_square};

  std::ostringstream log;
  log << config_header("preprocess", {{"frames", args.frames},
                                      {"landmarks", args.landmarks},
                                      {"margin", std::to_string(args.margin)},
                                      {"square", args.no_square ? "0" : "1"}});
  log << "frame,frame_id,status,detail\n";

  int ok = 0, missing = 0, failed = 0;
  for (const fs::path& frame_path : frames) {
    const std::string stem = frame_path.stem().string();
    const std::optional<std::int64_t> id = frame_id_of(stem);
    const auto it = id ? by_id.find(*id) : by_id.end();

    std::string status, detail;
    if (it == by_id.end()) {
      status = "no_measurement";
      detail = id ? "no landmark row for frame id " + std::to_string(*id)
                  : "no frame id in filename";
      write_text_file(fs::path(args.out) / (stem + ".nomeasure"), detail + "\n");
      std::cerr << "warning: " << frame_path.filename().string() << ": " << detail << "\n";
      ++missing;
    } else {
      try {
        const GrayImage frame = read_pgm_file(frame_path);
        const EyeSelection sel = select_eye(*it->second, box_params, frame.extent());
        const GrayImage eye = crop(frame, sel.box);
        const GrayImage out = resize_bilinear(equalize_histogram(eye), 24, 24);
        write_pgm_file(fs::path(args.out) / (stem + ".pgm"), out);
        status = "ok";
        detail = std::string(to_string(sel.side)) + " eye, span " + std::to_string(sel.span);
        ++ok;
      } catch (const DataError& e) {
        status = "no_measurement";
        detail = e.what();
        write_text_file(fs::path(args.out) / (stem + ".nomeasure"), detail + "\n");
        std::cerr << "warning: " << frame_path.filename().string() << ": " << detail << "\n";
        ++failed;
      }
    }
    log << stem << "," << (id ? std::to_string(*id) : "") << "," << status << ",\""
        << detail << "\"\n";
  }
  write_text_file(fs::path(args.out) / "preprocess_log.csv", log.str());

  std::cout << "preprocessed " << ok << "/" << frames.size() << " frames (" << missing
            << " without landmarks, " << failed << " failed)\n";
  if (ok == 0) throw DataError("preprocess: no frame produced an eye crop");
  return 0;
}

// ---------------------------------------------------------------- train ----

struct TrainArgs {
  std::string data;
  std::string out = "weights.fdnn";
  std::string history;
  std::string split = "0.7,0.3";
  double lr = 0.01;
  double momentum = 0.0;
  int batch = 32;
  int epochs = 50;
  std::uint64_t seed = 42;
};

int cmd_train(const TrainArgs& args) {
  const Corpus corpus = load_corpus(args.data);
  const SplitSpec spec{parse_fractions(args.split), args.seed};
  const std::vector<Corpus> parts = split(corpus, spec);

  nn::SgdConfig cfg;
  cfg.learning_rate = args.lr;
  cfg.momentum = args.momentum;
  cfg.batch_size = args.batch;
  cfg.epochs = args.epochs;
  cfg.seed = args.seed;

  FdnnModel model(args.seed);
  const TrainHistory history = model.train(parts[0].samples, parts[1].samples, cfg);

  const std::vector<std::uint8_t> weights = model.save_weights();
  std::ofstream out(args.out, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open " + args.out + " for writing");
  out.write(reinterpret_cast<const char*>(weights.data()),
            static_cast<std::streamsize>(weights.size()));
  if (!out) throw DataError("short write to " + args.out);

  if (!args.history.empty()) {
    std::ostringstream csv;
    csv << config_header("train", {{"data", args.data},
                                   {"split", args.split},
                                   {"config", cfg.digest()}});
    csv << "epoch,train_loss,val_accuracy\n";
    for (std::size_t e = 0; e < history.epochs.size(); ++e)
      csv << e << "," << history.epochs[e].train_loss << ","
          << history.epochs[e].val_accuracy << "\n";
    write_text_file(args.history, csv.str());
  }

  const char* part_names[] = {"train", "val", "test"};
  for (std::size_t p = 0; p < parts.size() && p < 3; ++p)
    print_eval_block(part_names[p], evaluate(model, parts[p]));
  std::cout << "weights: " << args.out << " (" << weights.size() << " bytes, seed "
            << args.seed << ")\n";
  return 0;
}

// ----------------------------------------------------------------- eval ----

struct EvalArgs {
  std::string weights;
  std::string data;
  std::string out;
  std::string roc_out;
};

int cmd_eval(const EvalArgs& args) {
  const FdnnModel model = FdnnModel::load_weights(read_binary_file(args.weights));
  const Corpus corpus = load_corpus(args.data);
  const EvalSummary s = evaluate(model, corpus);

  if (!args.out.empty()) {
    std::ostringstream csv;
    csv << config_header("eval", {{"weights", args.weights}, {"data", args.data}});
    csv << "metric,value\n";
    csv << "samples," << corpus.samples.size() << "\n";
    csv << "accuracy," << metric_str(s.metrics.accuracy) << "\n";
    csv << "auc," << s.auc << "\n";
    csv << "precision," << metric_str(s.metrics.precision) << "\n";
    csv << "recall," << metric_str(s.metrics.recall) << "\n";
    csv << "tp," << s.counts.tp << "\nfp," << s.counts.fp << "\ntn," << s.counts.tn
        << "\nfn," << s.counts.fn << "\n";
    write_text_file(args.out, csv.str());
  }

  if (!args.roc_out.empty()) {
    std::vector<double> scores;
    std::vector<EyeLabel> labels;
    for (const EyeSample& sample : corpus.samples) {
      scores.push_back(model.predict(sample.pixels).p_closed);
      labels.push_back(sample.label);
    }
    const RocResult roc = roc_auc(scores, labels);
    std::ostringstream csv;
    csv << config_header("eval", {{"weights", args.weights}, {"data", args.data}});
    csv << "threshold,fpr,tpr\n";
    for (const RocPoint& p : roc.points)
      csv << p.threshold << "," << p.fpr << "," << p.tpr << "\n";
    write_text_file(args.roc_out, csv.str());
  }

  print_eval_block("eval", s);
  return 0;
}

// --------------------------------------------------------------- stream ----

struct StreamArgs {
  std::string weights;
  std::string crops;
  std::string out;
  double fps = 6.0;
  double alarm_seconds = 2.0;
  double threshold = 0.5;
};

int cmd_stream(const StreamArgs& args) {
  const FdnnModel model = FdnnModel::load_weights(read_binary_file(args.weights));
  const DecisionConfig cfg{args.fps, args.alarm_seconds, args.threshold};
  cfg.validate();

  struct Entry {
    fs::path path;
    bool measured;
  };
  std::vector<Entry> entries;
  for (const fs::path& p : sorted_files(args.crops, ".pgm")) entries.push_back({p, true});
  for (const fs::path& p : sorted_files(args.crops, ".nomeasure"))
    entries.push_back({p, false});
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.path.filename() < b.path.filename();
  });
  if (entries.empty()) throw DataError("no crops or markers in " + args.crops);

  std::ostringstream csv;
  csv << config_header("stream",
                       {{"weights", args.weights},
                        {"crops", args.crops},
                        {"fps", std::to_string(args.fps)},
                        {"alarm_seconds", std::to_string(args.alarm_seconds)},
                        {"threshold", std::to_string(args.threshold)},
                        {"alarm_frames", std::to_string(cfg.alarm_frames())}});
  csv << "frame,file,timestamp_s,classification,p_closed,closed_run,no_measure_run,event\n";

  DrowsinessState state;
  int alarms = 0, longest_closed = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    FrameVerdict verdict;
    if (entries[i].measured) {
      const GrayImage crop_img = read_pgm_file(entries[i].path);
      const auto input = preprocess_to_input(crop_img);
      verdict = step(state, model.predict(input).p_closed, cfg);
    } else {
      verdict = step_no_measurement(state, cfg);
    }
    if (verdict.event == AlarmEvent::Raised) ++alarms;
    longest_closed = std::max(longest_closed, verdict.closed_run);

    csv << i << "," << entries[i].path.filename().string() << ","
        << static_cast<double>(i) / args.fps << "," << to_string(verdict.classification)
        << ",";
    if (entries[i].measured) csv << verdict.p_closed;
    csv << "," << verdict.closed_run << "," << verdict.no_measurement_run << ","
        << to_string(verdict.event) << "\n";
  }

  if (!args.out.empty())
    write_text_file(args.out, csv.str());
  else
    std::cout << csv.str();

  std::cout << "frames=" << entries.size() << " alarms=" << alarms
            << " longest_closed_run=" << longest_closed << "\n";
  return 0;
}

// ---------------------------------------------------------------- bench ----

struct BenchArgs {
  std::string weights;
  int frames = 1000;
  int warmup = 10;
  std::uint64_t seed = 42;
  std::string out;
};

int cmd_bench(const BenchArgs& args) {
  const FdnnModel model = FdnnModel::load_weights(read_binary_file(args.weights));
  if (args.frames < 100) throw std::invalid_argument("--frames must be >= 100");

  // Raw eye crops at a webcam-like ROI size, so the preprocess stage does
  // real equalization and resampling work.
  Rng rng(args.seed);
  std::vector<GrayImage> frames;
  frames.reserve(args.frames);
  for (int i = 0; i < args.frames; ++i) {
    const GrayImage glyph = synth_glyph(rng, i % 2 == 0 ? EyeLabel::Open : EyeLabel::Closed);
    frames.push_back(resize_bilinear(glyph, 64, 64));
  }

  const DecisionConfig cfg;
  const LatencyReport report = bench_latency(model, frames, cfg, args.warmup);

  const auto print_stage = [](const char* name, const StageStats& s) {
    std::cout << name << ": mean=" << s.mean_ms << "ms median=" << s.median_ms
              << "ms p95=" << s.p95_ms << "ms\n";
  };
  print_stage("preprocess", report.preprocess());
  print_stage("inference", report.inference());
  print_stage("decision", report.decision());
  print_stage("total", report.total());
  std::cout << "frames=" << report.samples.size() << " warmup=" << report.warmup_frames
            << " budget_per_frame=" << 1000.0 / cfg.fps << "ms\n";

  if (!args.out.empty()) {
    std::ostringstream csv;
    csv << config_header("bench", {{"weights", args.weights},
                                   {"frames", std::to_string(args.frames)},
                                   {"warmup", std::to_string(args.warmup)},
                                   {"seed", std::to_string(args.seed)}});
    csv << latency_csv(report);
    write_text_file(args.out, csv.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Eye-state drowsiness detection pipeline"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand("synth", "Render a synthetic eye-crop dataset");
  synth->add_option("--n", synth_args.n, "Glyphs per class")->check(CLI::PositiveNumber);
  synth->add_option("--seed", synth_args.seed, "Generator seed");
  synth->add_option("--noise", synth_args.noise, "Pixel noise stddev");
  synth->add_option("--out", synth_args.out, "Output dataset directory")->required();

  PreprocessArgs pre_args;
  CLI::App* pre = app.add_subcommand("preprocess", "Cut eye ROIs out of camera frames");
  pre->add_option("--frames", pre_args.frames, "Directory of frame PGMs")->required();
  pre->add_option("--landmarks", pre_args.landmarks, "68-point landmark CSV")->required();
  pre->add_option("--out", pre_args.out, "Output crop directory")->required();
  pre->add_option("--margin", pre_args.margin, "Eye box margin (fraction of width)");
  pre->add_flag("--no-square", pre_args.no_square, "Keep the raw padded box");

  TrainArgs train_args;
  CLI::App* train = app.add_subcommand("train", "Train the eye-state classifier");
  train->add_option("--data", train_args.data, "Dataset root (open/, closed/)")->required();
  train->add_option("--out", train_args.out, "Weight file to write");
  train->add_option("--history", train_args.history, "Per-epoch history CSV");
  train->add_option("--split", train_args.split, "Fractions, e.g. 0.7,0.3 or 0.8,0.1,0.1");
  train->add_option("--lr", train_args.lr, "Learning rate");
  train->add_option("--momentum", train_args.momentum, "Classical momentum");
  train->add_option("--batch", train_args.batch, "Mini-batch size");
  train->add_option("--epochs", train_args.epochs, "Training epochs");
  train->add_option("--seed", train_args.seed, "Init/shuffle/dropout seed");

  EvalArgs eval_args;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate weights on a dataset");
  eval_cmd->add_option("--weights", eval_args.weights, "Weight file")->required();
  eval_cmd->add_option("--data", eval_args.data, "Dataset root")->required();
  eval_cmd->add_option("--out", eval_args.out, "Metrics CSV");
  eval_cmd->add_option("--roc-out", eval_args.roc_out, "ROC points CSV");

  StreamArgs stream_args;
  CLI::App* stream = app.add_subcommand("stream", "Run the alarm over an ordered crop dir");
  stream->add_option("--weights", stream_args.weights, "Weight file")->required();
  stream->add_option("--crops", stream_args.crops, "Directory of crops and markers")
      ->required();
  stream->add_option("--out", stream_args.out, "Verdict CSV (stdout when omitted)");
  stream->add_option("--fps", stream_args.fps, "Frame rate the stream was captured at");
  stream->add_option("--alarm-seconds", stream_args.alarm_seconds, "Closed time to alarm");
  stream->add_option("--threshold", stream_args.threshold, "Closed probability threshold");

  BenchArgs bench_args;
  CLI::App* bench = app.add_subcommand("bench", "Per-frame latency benchmark");
  bench->add_option("--weights", bench_args.weights, "Weight file")->required();
  bench->add_option("--frames", bench_args.frames, "Frame count");
  bench->add_option("--warmup", bench_args.warmup, "Warm-up iterations");
  bench->add_option("--seed", bench_args.seed, "Frame generator seed");
  bench->add_option("--out", bench_args.out, "Latency CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (synth->parsed()) return cmd_synth(synth_args);
    if (pre->parsed()) return cmd_preprocess(pre_args);
    if (train->parsed()) return cmd_train(train_args);
    if (eval_cmd->parsed()) return cmd_eval(eval_args);
    if (stream->parsed()) return cmd_stream(stream_args);
    if (bench->parsed()) return cmd_bench(bench_args);
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return 0;
}
