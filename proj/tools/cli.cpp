#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <optional>
#include <sstream>

#include "adq/allocator.hpp"
#include "adq/byte_io.hpp"
#include "adq/dataset.hpp"
#include "adq/error.hpp"
#include "adq/logistic_model.hpp"
#include "adq/qds_format.hpp"
#include "adq/quantizer.hpp"
#include "adq/sensitivity.hpp"
#include "adq/trainer.hpp"

namespace adq::cli {

namespace {

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) parts.push_back(item);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

template <typename T>
T parse_number(const std::string& text, const std::string& what) {
  std::istringstream in(text);
  T value{};
  std::string rest;
  if (text.empty() || !(in >> value) || (in >> rest)) throw_validation("cannot parse " + what + " '" + text + "'");
  return value;
}

template <typename T>
std::vector<T> parse_list(const std::string& text, const std::string& what) {
  std::vector<T> values;
  for (const auto& part : split(text, ',')) values.push_back(parse_number<T>(part, what));
  if (values.empty()) throw_validation("empty " + what + " list");
  return values;
}

SampleShape parse_shape(const std::string& text) {
  const auto parts = split(text, 'x');
  if (parts.size() != 3) throw_validation("shape must be HxWxC, got '" + text + "'");
  SampleShape shape{parse_number<std::uint32_t>(parts[0], "height"),
                    parse_number<std::uint32_t>(parts[1], "width"),
                    parse_number<std::uint32_t>(parts[2], "channels")};
  validate_shape(shape);
  return shape;
}

std::string shape_string(const SampleShape& s) {
  return std::to_string(s.height) + "x" + std::to_string(s.width) + "x" + std::to_string(s.channels);
}

void print_dataset_summary(std::ostream& out, const Dataset& d) {
  out << "N=" << d.size() << "\nshape=" << shape_string(d.shape()) << "\nclasses=" << d.num_classes() << "\n";
}

void print_report(std::ostream& out, const StorageReport& report, bool porcelain) {
  out << (porcelain ? format_report_porcelain(report) : format_report_table(report));
}

// Options for every subcommand; CLI11 binds directly into these.
struct IngestArgs {
  std::string cifar;
  std::vector<std::string> raw;
  std::string shape;
  std::string synth;
  std::string half_noise;
  std::uint32_t classes = 0;
  std::uint64_t seed = 42;
  std::string out;
};

struct ScoreArgs {
  std::string dataset;
  std::string out;
  int probe_bits = kDefaultProbeBits;
  std::uint32_t warmup_epochs = 1;
  std::uint64_t seed = 42;
};

struct AllocateArgs {
  std::string scores;
  std::string out;
  std::string bits;
  std::string strategy = "adaptive";
  std::uint32_t groups = 0;
  std::string fractions;
  double prune_ratio = 0.0;
  std::string keep;
  std::uint64_t seed = 42;
};

struct QuantizeArgs {
  std::string dataset;
  std::string plan;
  std::string out;
};

struct StatsArgs {
  std::string qds;
};

struct CompareArgs {
  std::string dataset;
  std::string qds;
  std::string test;
  std::string csv;
  TrainConfig train;
};

struct MaterializeArgs {
  std::string qds;
  std::string out;
};

int cmd_ingest(const IngestArgs& a, std::ostream& out) {
  const int sources = !a.cifar.empty() + !a.raw.empty() + !a.synth.empty() + !a.half_noise.empty();
  if (sources != 1) throw_validation("ingest needs exactly one of --cifar, --raw, --synth, --half-noise");

  Dataset dataset;
  if (!a.cifar.empty()) {
    const std::uint32_t classes = a.classes == 0 ? 10 : a.classes;
    if (classes != 10 && classes != 100) throw_validation("--classes must be 10 or 100 for CIFAR input");
    dataset = ingest_cifar_binary(read_file(a.cifar), classes);
  } else if (!a.raw.empty()) {
    if (a.shape.empty()) throw_validation("--raw needs --shape HxWxC");
    if (a.classes == 0) throw_validation("--raw needs --classes");
    const SampleShape shape = parse_shape(a.shape);
    const auto values = read_file(a.raw[0]);
    const auto labels = read_file(a.raw[1]);
    dataset = ingest_raw(values, labels, shape, a.classes);
  } else if (!a.synth.empty()) {
    const auto parts = split(a.synth, ',');
    if (parts.size() != 4) throw_validation("--synth takes C,DIM,N,SPREAD");
    const auto classes = parse_number<std::uint32_t>(parts[0], "class count");
    const auto dim = parse_number<std::uint32_t>(parts[1], "dimension");
    const auto total = parse_number<std::uint32_t>(parts[2], "sample count");
    const auto spread = parse_number<double>(parts[3], "spread");
    if (classes == 0 || total % classes != 0) throw_validation("--synth sample count must be a multiple of the class count");
    dataset = synth_blobs(classes, dim, total / classes, spread, a.seed);
  } else {
    const auto parts = split(a.half_noise, ',');
    if (parts.size() != 3) throw_validation("--half-noise takes C,DIM,N");
    const auto classes = parse_number<std::uint32_t>(parts[0], "class count");
    const auto dim = parse_number<std::uint32_t>(parts[1], "dimension");
    const auto total = parse_number<std::uint32_t>(parts[2], "sample count");
    if (classes == 0 || total % (2 * classes) != 0) {
      throw_validation("--half-noise sample count must be a multiple of twice the class count");
    }
    dataset = synth_half_noise(classes, dim, total / (2 * classes), a.seed);
  }
  save_dataset(dataset, a.out);
  print_dataset_summary(out, dataset);
  return kOk;
}

int cmd_score(const ScoreArgs& a, unsigned threads, std::ostream& out) {
  const BitWidth probe = BitWidth::of(a.probe_bits);
  if (probe.dropped()) throw_validation("--probe-bits must be in [2, 16]");
  const Dataset dataset = load_dataset(a.dataset);
  if (dataset.empty()) throw_validation("cannot score an empty dataset");

  TrainConfig warmup;
  warmup.epochs = a.warmup_epochs;
  warmup.seed = a.seed;
  const LogisticModel model = train(dataset, warmup);
  const auto scores = score_dataset(dataset, model, probe, threads);
  save_scores(scores, a.out);

  double sum = 0.0;
  double lo = 2.0;
  double hi = 0.0;
  for (const auto& s : scores) {
    sum += s.value;
    lo = std::min(lo, s.value);
    hi = std::max(hi, s.value);
  }
  char buf[256];
  std::snprintf(buf, sizeof buf, "N=%zu\nprobe_bits=%d\nmean_score=%.9g\nmin_score=%.9g\nmax_score=%.9g\n",
                scores.size(), probe.bits(), sum / static_cast<double>(scores.size()), lo, hi);
  out << buf;
  return kOk;
}

int cmd_allocate(const AllocateArgs& a, std::ostream& out) {
  const auto scores = load_scores(a.scores);
  std::vector<BitWidth> levels;
  for (int b : parse_list<int>(a.bits, "bit-width")) levels.push_back(BitWidth::of(b));

  AllocationConfig config;
  if (a.strategy == "fixed") {
    if (levels.size() != 1) throw_validation("--strategy fixed takes a single --bits value");
    config = AllocationConfig::equal_split(Strategy::FixedUniform, levels);
  } else if (a.strategy == "adaptive") {
    if (a.groups != 0 && a.groups != levels.size()) {
      throw_validation("--groups " + std::to_string(a.groups) + " does not match " +
                       std::to_string(levels.size()) + " bit levels");
    }
    const Strategy s = levels.size() == 2 ? Strategy::AdaptiveTwoGroup : Strategy::AdaptiveKGroup;
    config = AllocationConfig::equal_split(s, levels);
  } else {
    throw_validation("--strategy must be adaptive or fixed");
  }
  if (!a.fractions.empty()) config.group_fractions = parse_list<double>(a.fractions, "fraction");
  config.prune_ratio = a.prune_ratio;
  if (!a.keep.empty()) config.keep_list = load_keep_list(a.keep);

  const AllocationPlan plan = allocate(scores, config, a.seed);
  save_plan(plan, a.out);
  char buf[160];
  std::snprintf(buf, sizeof buf, "N=%zu\nb_avg=%.10g\nratio=%.10g\ndropped=%zu\n", plan.size(), plan.b_avg,
                plan.compression_ratio, plan.dropped_count());
  out << buf;
  return kOk;
}

int cmd_quantize(const QuantizeArgs& a, bool porcelain, std::ostream& out) {
  const Dataset dataset = load_dataset(a.dataset);
  const AllocationPlan plan = load_plan(a.plan);
  if (plan.size() != dataset.size()) {
    throw_validation("plan has " + std::to_string(plan.size()) + " samples, dataset has " +
                     std::to_string(dataset.size()));
  }
  print_report(out, write_qds(dataset, plan, a.out), porcelain);
  return kOk;
}

int cmd_stats(const StatsArgs& a, bool porcelain, std::ostream& out) {
  print_report(out, storage_report(read_qds(a.qds)), porcelain);
  return kOk;
}

int cmd_compare(const CompareArgs& a, bool porcelain, std::ostream& out) {
  validate(a.train);
  const Dataset original = load_dataset(a.dataset);
  const QdsContents quantized = read_qds(a.qds);
  std::optional<Dataset> test;
  if (!a.test.empty()) test = load_dataset(a.test);
  const EvalReport report = compare(original, quantized, a.train, test);
  if (!a.csv.empty()) write_file_atomic(a.csv, format_eval_csv(report));
  if (porcelain) {
    out << format_eval_porcelain(report);
  } else {
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "                 original   dequantized\n"
                  "train samples    %-10zu %zu\n"
                  "train accuracy   %-10.4f %.4f\n"
                  "test accuracy    %-10.4f %.4f\n"
                  "accuracy_delta=%.6f\n",
                  report.train_size, report.quantized_train_size, report.baseline_train_accuracy,
                  report.train_accuracy, report.baseline_test_accuracy, report.test_accuracy,
                  report.accuracy_delta);
    out << buf;
  }
  return kOk;
}

int cmd_materialize(const MaterializeArgs& a, std::ostream& out) {
  const Dataset dataset = materialize_training_set(a.qds);
  save_dataset(dataset, a.out);
  print_dataset_summary(out, dataset);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"adq: adaptive per-sample dataset quantization"};
  app.require_subcommand(1);
  bool porcelain = false;
  unsigned threads = 1;
  app.add_flag("--porcelain", porcelain, "Machine-readable key=value output");
  app.add_option("--threads", threads, "Worker threads for scoring")->check(CLI::Range(1u, 256u));

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Build a dataset file from CIFAR, raw or synthetic data");
  ingest_cmd->add_option("--cifar", ingest.cifar, "CIFAR-10/100 binary batch file");
  ingest_cmd->add_option("--raw", ingest.raw, "VALUES.f32le LABELS.u32le")->expected(2);
  ingest_cmd->add_option("--shape", ingest.shape, "Sample shape HxWxC for --raw");
  ingest_cmd->add_option("--synth", ingest.synth, "Gaussian blobs C,DIM,N,SPREAD");
  ingest_cmd->add_option("--half-noise", ingest.half_noise, "Half informative, half noise C,DIM,N");
  ingest_cmd->add_option("--classes", ingest.classes, "Number of classes");
  ingest_cmd->add_option("--seed", ingest.seed, "Random seed");
  ingest_cmd->add_option("--out", ingest.out, "Output dataset file")->required();

  ScoreArgs score;
  auto* score_cmd = app.add_subcommand("score", "Compute per-sample quantization sensitivity");
  score_cmd->add_option("--dataset", score.dataset)->required();
  score_cmd->add_option("--out", score.out, "Score file (index<TAB>score)")->required();
  score_cmd->add_option("--probe-bits", score.probe_bits, "Probe bit-width");
  score_cmd->add_option("--warmup-epochs", score.warmup_epochs,
                        "Epochs of full-precision training before scoring (0 = untrained)");
  score_cmd->add_option("--seed", score.seed);

  AllocateArgs alloc;
  auto* alloc_cmd = app.add_subcommand("allocate", "Assign bit-widths under a global budget");
  alloc_cmd->add_option("--scores", alloc.scores)->required();
  alloc_cmd->add_option("--out", alloc.out, "Plan file")->required();
  alloc_cmd->add_option("--bits", alloc.bits, "Bit levels, high to low, e.g. 8,0")->required();
  alloc_cmd->add_option("--strategy", alloc.strategy, "adaptive or fixed");
  alloc_cmd->add_option("--groups", alloc.groups, "Number of groups (must match --bits)");
  alloc_cmd->add_option("--fractions", alloc.fractions, "Group fractions, default equal");
  alloc_cmd->add_option("--prune-ratio", alloc.prune_ratio, "Random drop fraction before allocation");
  alloc_cmd->add_option("--keep", alloc.keep, "Keep-list file; samples not listed are dropped");
  alloc_cmd->add_option("--seed", alloc.seed);

  QuantizeArgs quant;
  auto* quant_cmd = app.add_subcommand("quantize", "Write a QDS file from a dataset and a plan");
  quant_cmd->add_option("--dataset", quant.dataset)->required();
  quant_cmd->add_option("--plan", quant.plan)->required();
  quant_cmd->add_option("--out", quant.out)->required();

  StatsArgs stats;
  auto* stats_cmd = app.add_subcommand("stats", "Print storage accounting of a QDS file");
  stats_cmd->add_option("qds", stats.qds)->required();

  CompareArgs cmp;
  auto* cmp_cmd = app.add_subcommand("compare", "Train on original and dequantized data and compare");
  cmp_cmd->add_option("--dataset", cmp.dataset, "Original dataset")->required();
  cmp_cmd->add_option("--qds", cmp.qds, "Quantized dataset aligned with --dataset")->required();
  cmp_cmd->add_option("--test", cmp.test, "Separate test dataset (default: stratified 80/20 split)");
  cmp_cmd->add_option("--csv", cmp.csv, "Per-epoch CSV for the dequantized arm");
  cmp_cmd->add_option("--epochs", cmp.train.epochs);
  cmp_cmd->add_option("--batch-size", cmp.train.batch_size);
  cmp_cmd->add_option("--lr", cmp.train.learning_rate);
  cmp_cmd->add_option("--momentum", cmp.train.momentum);
  cmp_cmd->add_option("--weight-decay", cmp.train.weight_decay);
  cmp_cmd->add_option("--seed", cmp.train.seed);
  bool no_normalize = false;
  cmp_cmd->add_flag("--no-normalize", no_normalize, "Train on unstandardized inputs");

  MaterializeArgs mat;
  auto* mat_cmd = app.add_subcommand("materialize", "Dequantize a QDS file into a dataset file");
  mat_cmd->add_option("--qds", mat.qds)->required();
  mat_cmd->add_option("--out", mat.out)->required();

  std::vector<std::string> storage{"adq"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kValidationFailure;
  }

  try {
    if (*ingest_cmd) return cmd_ingest(ingest, out);
    if (*score_cmd) return cmd_score(score, threads, out);
    if (*alloc_cmd) return cmd_allocate(alloc, out);
    if (*quant_cmd) return cmd_quantize(quant, porcelain, out);
    if (*stats_cmd) return cmd_stats(stats, porcelain, out);
    if (*cmp_cmd) {
      cmp.train.normalize = !no_normalize;
      return cmd_compare(cmp, porcelain, out);
    }
    if (*mat_cmd) return cmd_materialize(mat, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIoFailure;
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kIoFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kValidationFailure;
  }
  return kValidationFailure;
}

}  // namespace adq::cli
