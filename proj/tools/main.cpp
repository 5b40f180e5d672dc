#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <boost/program_options.hpp>

#include "segflow/config.hpp"
#include "segflow/hof.hpp"
#include "segflow/iki.hpp"
#include "segflow/pipeline.hpp"
#include "segflow/render.hpp"
#include "segflow/report.hpp"
#include "segflow/segmentation.hpp"
#include "segflow/session_io.hpp"

namespace po = boost::program_options;
namespace fs = std::filesystem;
using namespace segflow;

namespace {

constexpr int kOk = 0;
constexpr int kDataError = 1;
constexpr int kUsageError = 2;

void print_usage(std::ostream& out) {
  out << "usage: segflow <command> [options] [paths...]\n"
         "\n"
         "commands:\n"
         "  validate   check session files and report every issue\n"
         "  profile    compute per-translator pause thresholds\n"
         "  segment    build the motor-program/task/segment hierarchy\n"
         "  hof        state analytics over annotated sessions\n"
         "  identify   paired two-sample KS comparisons\n"
         "  render     SVG progression graphs and interval distributions\n"
         "\n"
         "common options:\n"
         "  --config PATH     key=value config file\n"
         "  --set KEY=VALUE   override one config key (repeatable)\n"
         "  --out DIR         output directory (default: out)\n"
         "  --seed N          seed recorded in the config hash\n"
         "  --literal-rule    inverted p-value decision rule for identify\n"
         "  --help            per-command option listing\n";
}

po::options_description common_options() {
  po::options_description d("common options");
  d.add_options()                                                        //
      ("help,h", "show this help")                                       //
      ("config", po::value<std::string>(), "key=value config file")      //
      ("set", po::value<std::vector<std::string>>()->composing(),
       "override one config key=value (repeatable)")                     //
      ("out", po::value<std::string>(), "output directory")              //
      ("seed", po::value<uint64_t>(), "seed recorded in the manifest")   //
      ("literal-rule", po::bool_switch()->default_value(false),
       "decide 'same source' when p < alpha instead of p >= alpha")      //
      ("paths", po::value<std::vector<std::string>>(), "session files or directories");
  return d;
}

config::RunConfig make_config(const po::variables_map& vm) {
  config::RunConfig cfg;
  if (vm.count("config")) cfg = config::load_config_file(vm["config"].as<std::string>());
  if (vm.count("set")) {
    for (const auto& kv : vm["set"].as<std::vector<std::string>>()) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos)
        throw std::invalid_argument("--set expects KEY=VALUE, got: " + kv);
      config::apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
  }
  if (vm.count("out")) cfg.out_dir = vm["out"].as<std::string>();
  if (vm.count("seed")) cfg.seed = vm["seed"].as<uint64_t>();
  if (vm["literal-rule"].as<bool>()) cfg.ks_rule = "literal";
  config::validate(cfg);
  return cfg;
}

std::vector<std::string> positional_paths(const po::variables_map& vm) {
  if (!vm.count("paths")) return {};
  return vm["paths"].as<std::vector<std::string>>();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

class OutputDir {
 public:
  explicit OutputDir(const std::string& dir) : dir_(dir) { fs::create_directories(dir_); }

  void write(const std::string& filename, const std::string& content) {
    std::ofstream out(dir_ / filename, std::ios::binary);
    if (!out) throw std::invalid_argument("cannot write file: " + (dir_ / filename).string());
    out << content;
    ++count_;
  }

  void write_table(const report::ReportTable& t, int precision) {
    report::validate_table(t);
    write(t.name + ".csv", report::emit_csv(t, precision));
  }

  void finish(const std::string& command, const config::RunConfig& cfg,
              const pipeline::Corpus& corpus,
              std::span<const std::pair<std::string, std::string>> extra = {}) {
    write("manifest.json", pipeline::manifest_json(command, cfg, corpus, extra));
    std::cout << "wrote " << count_ << " file(s) to " << dir_.string() << "\n";
  }

 private:
  fs::path dir_;
  std::size_t count_ = 0;
};

void print_warnings(std::span<const std::string> warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
}

struct LoadedInputs {
  pipeline::Corpus corpus;
  int failure = -1;  // set when loading failed; the exit code to return
};

LoadedInputs load_inputs(const po::variables_map& vm) {
  LoadedInputs in;
  const auto paths = positional_paths(vm);
  if (paths.empty()) {
    std::cerr << "error: no input paths given\n";
    in.failure = kUsageError;
    return in;
  }
  const auto files = pipeline::discover_session_files(paths);
  if (files.empty()) {
    std::cerr << "error: no sessions\n";
    in.failure = kUsageError;
    return in;
  }
  in.corpus = pipeline::load_corpus(files);
  return in;
}

std::map<std::string, iki::TranslatorProfile> resolve_profiles(const po::variables_map& vm,
                                                               const pipeline::Corpus& corpus,
                                                               const config::RunConfig& cfg) {
  if (vm.count("profiles"))
    return pipeline::parse_profiles_csv(read_file(vm["profiles"].as<std::string>()));
  std::vector<std::string> warnings;
  auto profiles = pipeline::build_profiles(corpus, config::iki_params(cfg), &warnings);
  print_warnings(warnings);
  return profiles;
}

int cmd_validate(const po::variables_map& vm, const config::RunConfig&) {
  const auto paths = positional_paths(vm);
  if (paths.empty()) {
    std::cerr << "error: no input paths given\n";
    return kUsageError;
  }
  const auto files = pipeline::discover_session_files(paths);
  if (files.empty()) {
    std::cerr << "error: no sessions\n";
    return kUsageError;
  }
  bool any_error = false;
  for (const auto& file : files) {
    SessionLog log;
    try {
      log = io::parse_session_text(read_file(file));
    } catch (const std::exception& e) {
      std::cout << file << ": error: " << e.what() << "\n";
      any_error = true;
      continue;
    }
    for (const auto& issue : io::validate_session(log)) {
      const bool is_error = issue.severity == io::Severity::error;
      any_error = any_error || is_error;
      std::cout << file << ": " << (is_error ? "error" : "warning") << ": " << issue.code << ": "
                << issue.message << "\n";
    }
  }
  std::cout << (any_error ? "invalid" : "ok") << " (" << files.size() << " file(s))\n";
  return any_error ? kDataError : kOk;
}

int cmd_profile(const po::variables_map& vm, const config::RunConfig& cfg) {
  auto in = load_inputs(vm);
  if (in.failure >= 0) return in.failure;

  std::vector<std::string> warnings;
  const auto profiles = pipeline::build_profiles(in.corpus, config::iki_params(cfg), &warnings);
  print_warnings(warnings);
  if (profiles.empty()) {
    std::cerr << "error: no profiles could be built\n";
    return kDataError;
  }

  OutputDir out(cfg.out_dir);
  // Profiles are re-read by `segment --profiles`; emit them losslessly.
  out.write_table(pipeline::profiles_table(in.corpus, profiles), 17);
  out.write_table(pipeline::study_summary(in.corpus), cfg.float_precision);
  out.write_table(pipeline::thresholds_by_language(in.corpus, profiles), cfg.float_precision);
  out.finish("profile", cfg, in.corpus);
  return kOk;
}

int cmd_segment(const po::variables_map& vm, const config::RunConfig& cfg) {
  auto in = load_inputs(vm);
  if (in.failure >= 0) return in.failure;

  const auto profiles = resolve_profiles(vm, in.corpus, cfg);
  const auto trees = pipeline::build_trees(in.corpus, profiles, cfg);

  OutputDir out(cfg.out_dir);
  for (const auto& tree : trees) {
    out.write(tree.session_id + ".segments.json", seg::tree_to_json(tree));
    auto tasks = seg::tasks_table(tree);
    tasks.name = tree.session_id + ".tasks";
    report::validate_table(tasks);
    out.write(tasks.name + ".csv", report::emit_csv(tasks, cfg.float_precision));
  }
  out.write_table(seg::corpus_ts_summary(trees), cfg.float_precision);
  out.write_table(seg::ts_overall(trees), cfg.float_precision);
  out.write_table(pipeline::a_only_table(trees), cfg.float_precision);
  try {
    out.write_table(seg::hierarchy_correlations(trees), cfg.float_precision);
  } catch (const std::invalid_argument& e) {
    std::cerr << "warning: hierarchy_correlations skipped: " << e.what() << "\n";
  }
  out.finish("segment", cfg, in.corpus);
  return kOk;
}

int cmd_hof(const po::variables_map& vm, const config::RunConfig& cfg) {
  if (!vm.count("annotations")) {
    std::cerr << "error: --annotations DIR is required\n";
    return kUsageError;
  }
  auto in = load_inputs(vm);
  if (in.failure >= 0) return in.failure;

  const auto profiles = resolve_profiles(vm, in.corpus, cfg);
  const auto bundle = pipeline::build_hof_bundle(in.corpus, profiles,
                                                 vm["annotations"].as<std::string>(), cfg);
  print_warnings(bundle.warnings);
  const bool suggest = vm["suggest"].as<bool>();
  if (bundle.cuts.empty() && !suggest) {
    std::cerr << "error: no annotated sessions\n";
    return kDataError;
  }

  OutputDir out(cfg.out_dir);
  if (!bundle.cuts.empty()) {
    out.write_table(pipeline::state_counts_table(bundle), cfg.float_precision);
    out.write_table(pipeline::transitions_by_language(bundle), cfg.float_precision);
    std::vector<std::string> dist_warnings;
    out.write_table(hof::task_distribution_by_state(bundle.cuts, &dist_warnings),
                    cfg.float_precision);
    print_warnings(dist_warnings);
    out.write_table(hof::ts_label_ranking_by_state(bundle.cuts), cfg.float_precision);
    for (const auto state : {HofState::orientation, HofState::flow, HofState::hesitation}) {
      try {
        out.write_table(hof::state_summary(bundle.cuts, bundle.tracks, state),
                        cfg.float_precision);
      } catch (const std::invalid_argument& e) {
        std::cerr << "warning: state summary skipped: " << e.what() << "\n";
      }
    }
    out.write_table(hof::pause_fraction_by_state(bundle.cuts, bundle.tracks),
                    cfg.float_precision);
    out.write_table(hof::label_share_correlations(bundle.cuts), cfg.float_precision);
    out.write_table(pipeline::cut_stats_table(bundle), cfg.float_precision);
  }

  if (suggest) {
    const auto trees = pipeline::build_trees(in.corpus, profiles, cfg);
    for (std::size_t i = 0; i < in.corpus.sessions.size(); ++i) {
      const auto& log = in.corpus.sessions[i].log;
      const auto& profile = profiles.at(log.translator_id);
      const auto aus = hof::derive_activity_units(log, profile, config::au_params(cfg));
      out.write(log.session_id + ".au.tsv", hof::serialize_activity_units(aus));
      const auto suggested =
          hof::suggest_hof_states(log, trees[i], aus, config::suggest_params(cfg));
      std::vector<StateAnnotation> annotations;
      for (const auto& sg : suggested) annotations.push_back(sg.annotation);
      out.write(log.session_id + ".suggested.hof.tsv", io::serialize_annotations(annotations));
    }
  }
  out.finish("hof", cfg, in.corpus);
  return kOk;
}

int cmd_identify(const po::variables_map& vm, const config::RunConfig& cfg) {
  if (!vm.count("pairs")) {
    std::cerr << "error: --pairs FILE is required\n";
    return kUsageError;
  }
  auto in = load_inputs(vm);
  if (in.failure >= 0) return in.failure;

  const std::string pairs_path = vm["pairs"].as<std::string>();
  const std::string pairs_bytes = read_file(pairs_path);
  const auto plan = pipeline::parse_pairs_plan(pairs_bytes);
  if (plan.empty()) {
    std::cerr << "error: pairs plan is empty\n";
    return kDataError;
  }
  const auto result = pipeline::identification_experiment(in.corpus, plan, cfg);
  print_warnings(result.warnings);

  OutputDir out(cfg.out_dir);
  out.write_table(result.detail, cfg.float_precision);
  out.write_table(result.summary, cfg.float_precision);
  std::cout << report::emit_csv(result.summary, cfg.float_precision);
  const std::vector<std::pair<std::string, std::string>> extra = {
      {pairs_path, fnv1a_hex(pairs_bytes)}};
  out.finish("identify", cfg, in.corpus, extra);
  return kOk;
}

int cmd_render(const po::variables_map& vm, const config::RunConfig& cfg) {
  const bool want_graph = vm.count("graph") > 0;
  const bool want_dist = vm.count("dist") > 0;
  if (want_graph == want_dist) {
    std::cerr << "error: pass exactly one of --graph SESSION_ID or --dist density|cdf\n";
    return kUsageError;
  }
  auto in = load_inputs(vm);
  if (in.failure >= 0) return in.failure;

  OutputDir out(cfg.out_dir);
  if (want_graph) {
    const std::string id = vm["graph"].as<std::string>();
    const auto* ls = pipeline::find_session(in.corpus, id);
    if (!ls) {
      std::cerr << "error: unknown session id: " << id << "\n";
      return kDataError;
    }
    const auto profiles = resolve_profiles(vm, in.corpus, cfg);
    const auto pit = profiles.find(ls->log.translator_id);
    if (pit == profiles.end()) {
      std::cerr << "error: no profile for translator: " << ls->log.translator_id << "\n";
      return kDataError;
    }
    const auto tree = seg::build_segmentation(ls->log, pit->second, cfg.delay_threshold_ms);
    const auto aus = hof::derive_activity_units(ls->log, pit->second, config::au_params(cfg));

    hof::StateTrack track;
    bool have_track = false;
    if (vm.count("annotations")) {
      const std::string file =
          vm["annotations"].as<std::string>() + "/" + ls->log.session_id + ".hof.tsv";
      if (fs::exists(file)) {
        track = hof::build_track(io::parse_annotations_text(read_file(file)));
        have_track = true;
      } else {
        std::cerr << "warning: session " << id << ": no annotation file; state band omitted\n";
      }
    }

    render::GraphSpec spec;
    if (vm.count("t0")) spec.t0 = vm["t0"].as<int64_t>();
    if (vm.count("t1")) spec.t1 = vm["t1"].as<int64_t>();
    if (vm.count("width")) spec.width = vm["width"].as<int>();
    if (vm.count("height")) spec.height = vm["height"].as<int>();
    if (vm.count("align"))
      spec.alignments = render::parse_alignment_pairs(read_file(vm["align"].as<std::string>()));
    out.write("graph_" + id + ".svg",
              render::render_progression_graph(ls->log, tree, have_track ? &track : nullptr, aus,
                                               spec));
  } else {
    const std::string kind_name = vm["dist"].as<std::string>();
    if (kind_name != "density" && kind_name != "cdf") {
      std::cerr << "error: --dist expects density or cdf\n";
      return kUsageError;
    }
    const std::string group_by =
        vm.count("group-by") ? vm["group-by"].as<std::string>() : std::string("study");
    if (group_by != "study" && group_by != "language") {
      std::cerr << "error: --group-by expects study or language\n";
      return kUsageError;
    }

    std::map<std::string, std::vector<double>> groups;
    for (const auto& ls : in.corpus.sessions) {
      auto& sample = groups[group_by == "study" ? ls.log.study_id : ls.log.target_lang];
      for (std::size_t i = 1; i < ls.log.keys.size(); ++i)
        sample.push_back(static_cast<double>(ls.log.keys[i].time_ms - ls.log.keys[i - 1].time_ms));
    }
    iki::DistOptions opts;
    opts.kde = vm["kde"].as<bool>();
    opts.bin_width_ms = static_cast<double>(cfg.histogram_bin_ms);
    std::vector<render::DistSeries> series;
    for (const auto& [label, sample] : groups) {
      if (sample.empty()) continue;
      series.push_back({label, iki::iki_distribution(sample, opts)});
    }
    if (series.empty()) {
      std::cerr << "error: no intervals to plot\n";
      return kDataError;
    }
    const auto kind = kind_name == "cdf" ? render::DistKind::cdf : render::DistKind::density;
    out.write("dist_" + kind_name + ".svg", render::render_distribution(series, kind));
  }
  out.finish("render", cfg, in.corpus);
  return kOk;
}

int dispatch(const std::string& command, const std::vector<std::string>& args) {
  po::options_description opts = common_options();
  if (command == "segment" || command == "hof" || command == "render") {
    opts.add_options()("profiles", po::value<std::string>(),
                       "profiles.csv from a previous `profile` run");
  }
  if (command == "hof") {
    opts.add_options()                                                       //
        ("annotations", po::value<std::string>(), "directory of <session_id>.hof.tsv files")  //
        ("suggest", po::bool_switch(), "emit activity units and suggested state tracks");
  }
  if (command == "identify") {
    opts.add_options()("pairs", po::value<std::string>(),
                       "pairing plan: session_a<TAB>session_b<TAB>class");
  }
  if (command == "render") {
    opts.add_options()                                                           //
        ("graph", po::value<std::string>(), "render one session's progression graph")  //
        ("dist", po::value<std::string>(), "render interval distributions: density|cdf")  //
        ("annotations", po::value<std::string>(), "directory of <session_id>.hof.tsv files")  //
        ("t0", po::value<int64_t>(), "window start in ms")                      //
        ("t1", po::value<int64_t>(), "window end in ms")                        //
        ("width", po::value<int>(), "figure width in px")                       //
        ("height", po::value<int>(), "figure height in px")                     //
        ("align", po::value<std::string>(), "token alignment TSV")              //
        ("group-by", po::value<std::string>(), "distribution series: study|language")  //
        ("kde", po::bool_switch(), "overlay kernel density instead of histogram bars");
  }

  po::positional_options_description pos;
  pos.add("paths", -1);
  po::variables_map vm;
  po::store(po::command_line_parser(args).options(opts).positional(pos).run(), vm);
  po::notify(vm);

  if (vm.count("help")) {
    std::cout << "usage: segflow " << command << " [options] [paths...]\n" << opts << "\n";
    return kOk;
  }

  config::RunConfig cfg;
  try {
    cfg = make_config(vm);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  }
  if (command == "validate") return cmd_validate(vm, cfg);
  if (command == "profile") return cmd_profile(vm, cfg);
  if (command == "segment") return cmd_segment(vm, cfg);
  if (command == "hof") return cmd_hof(vm, cfg);
  if (command == "identify") return cmd_identify(vm, cfg);
  if (command == "render") return cmd_render(vm, cfg);
  std::cerr << "error: unknown command: " << command << "\n";
  print_usage(std::cerr);
  return kUsageError;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    print_usage(std::cerr);
    return kUsageError;
  }
  const std::string command = argv[1];
  if (command == "help" || command == "--help" || command == "-h") {
    print_usage(std::cout);
    return kOk;
  }
  if (command == "--version") {
    std::cout << pipeline::kToolName << " " << pipeline::kToolVersion << "\n";
    return kOk;
  }

  const std::vector<std::string> args(argv + 2, argv + argc);
  try {
    return dispatch(command, args);
  } catch (const po::error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const io::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDataError;
  }
}
