#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "manifest.hpp"
#include "ratedev/csv.hpp"
#include "ratedev/detector.hpp"
#include "ratedev/features.hpp"
#include "ratedev/report_io.hpp"
#include "ratedev/stats.hpp"
#include "ratedev/synthgen.hpp"

namespace ratedev::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class EmptyResult : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string num(double v) { return format_number(v); }

/// Runs fn(i) for i in [0, n) on up to `jobs` threads; rethrows the first failure.
template <class Fn>
void parallel_for(std::size_t n, std::size_t jobs, Fn&& fn) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> workers;
  for (std::size_t w = 0; w < jobs; ++w)
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  workers.clear();
  if (failure) std::rethrow_exception(failure);
}

std::string graph_dir_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "graph_%03zu", index);
  return buf;
}

/// Subdirectories of `dir` holding `file`, sorted by name.
std::vector<std::string> graph_dirs(const std::string& dir, const std::string& file) {
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_directory() && fs::exists(entry.path() / file)) names.push_back(entry.path().filename().string());
  std::sort(names.begin(), names.end());
  return names;
}

// ---------------------------------------------------------------------------
// Flat key=value config files. Keys are long option names without dashes;
// anything given on the command line wins.

std::vector<std::pair<std::string, std::string>> read_flat_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    const auto e = s.find_last_not_of(" \t\r");
    s = s.substr(b, e - b + 1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError("config '" + path + "': expected key=value", line_no);
    out.emplace_back(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return out;
}

bool mentions(const std::vector<std::string>& args, const std::string& flag) {
  for (const auto& a : args)
    if (a == flag || a.rfind(flag + "=", 0) == 0) return true;
  return false;
}

/// Prepends config-file settings (as flags) to the user's arguments.
std::vector<std::string> apply_config_file(CLI::App& sub, const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;
  std::vector<std::string> injected;
  for (const auto& [key, value] : read_flat_config(path)) {
    const std::string flag = "--" + key;
    CLI::Option* opt = nullptr;
    try {
      opt = sub.get_option(flag);
    } catch (const CLI::OptionNotFound&) {
      throw UsageError("config '" + path + "': unknown key '" + key + "'");
    }
    if (mentions(args, flag)) continue;
    if (opt->get_expected_min() == 0) {
      if (value == "true" || value == "1" || value == "yes") injected.push_back(flag);
    } else {
      injected.push_back(flag);
      injected.push_back(value);
    }
  }
  injected.insert(injected.end(), args.begin(), args.end());
  return injected;
}

// ---------------------------------------------------------------------------
// Shared input and detector options.

struct InputOptions {
  std::string input;
  std::string format = "csv";
  bool strict = false;
  bool binary = false;

  void add(CLI::App* app) {
    app->add_option("--input", input, "Review file (csv or jsonl)")->required();
    app->add_option("--format", format, "Input format")->check(CLI::IsMember({"csv", "jsonl"}));
    app->add_flag("--strict", strict, "Fail on malformed or out-of-scale records");
    app->add_flag("--binary", binary, "Ratings on a 0/1 scale (midpoint 0.5 unless --lambda)");
  }

  ParseOptions parse_options(double midpoint) const {
    ParseOptions po;
    po.format = format == "jsonl" ? InputFormat::jsonl : InputFormat::csv;
    po.strict = strict;
    po.scale = binary ? kBinary : kFiveStar;
    po.midpoint = midpoint;
    return po;
  }

  void canonical(std::vector<std::string>& args) const {
    args.insert(args.end(), {"--input", input, "--format", format});
    if (strict) args.push_back("--strict");
    if (binary) args.push_back("--binary");
  }

  json to_json() const { return {{"input", input}, {"format", format}, {"strict", strict}, {"binary", binary}}; }
};

struct DetectorOptions {
  double lambda = 3.0;
  CLI::Option* lambda_opt = nullptr;
  double alpha = 0.05;
  double tau = 1e-5;
  std::size_t max_iterations = 10;
  std::string phi_mode = "initial";
  std::string mean_mode = "weighted";
  bool no_bonferroni = false;
  std::size_t max_candidate_reviews = 50;

  void add(CLI::App* app) {
    lambda_opt = app->add_option("--lambda", lambda, "Midpoint rating");
    app->add_option("--alpha", alpha, "Significance level");
    app->add_option("--tau", tau, "Convergence tolerance on honesty weights");
    app->add_option("--max-iterations", max_iterations, "Correction iteration cap");
    app->add_option("--phi-mode", phi_mode, "Disagreement rate against initial or corrected means")
        ->check(CLI::IsMember({"initial", "post"}));
    app->add_option("--mean-mode", mean_mode, "Weighted mean denominator: sum of weights or count")
        ->check(CLI::IsMember({"weighted", "count"}));
    app->add_flag("--no-bonferroni", no_bonferroni, "Use alpha without correction");
    app->add_option("--max-candidate-reviews", max_candidate_reviews,
                    "Drop candidates with more reviews than this (0 = no cap)");
  }

  double midpoint(bool binary) const {
    if (lambda_opt && lambda_opt->count() > 0) return lambda;
    return binary ? 0.5 : 3.0;
  }

  DetectorConfig config(bool binary) const {
    DetectorConfig cfg;
    cfg.lambda = midpoint(binary);
    cfg.alpha = alpha;
    cfg.tau = tau;
    cfg.max_iterations = max_iterations;
    cfg.phi_mode = phi_mode == "post" ? PhiMode::post_correction : PhiMode::initial;
    cfg.mean_mode = mean_mode == "count" ? MeanMode::count_normalized : MeanMode::weight_normalized;
    cfg.bonferroni = !no_bonferroni;
    if (max_candidate_reviews == 0)
      cfg.max_candidate_reviews.reset();
    else
      cfg.max_candidate_reviews = max_candidate_reviews;
    cfg.validate();
    return cfg;
  }

  void canonical(std::vector<std::string>& args, bool binary) const {
    args.insert(args.end(), {"--lambda", num(midpoint(binary)), "--alpha", num(alpha), "--tau", num(tau),
                             "--max-iterations", std::to_string(max_iterations), "--phi-mode", phi_mode,
                             "--mean-mode", mean_mode, "--max-candidate-reviews",
                             std::to_string(max_candidate_reviews)});
    if (no_bonferroni) args.push_back("--no-bonferroni");
  }

  json to_json(bool binary) const {
    return {{"lambda", midpoint(binary)},  {"alpha", alpha},         {"tau", tau},
            {"max_iterations", max_iterations}, {"phi_mode", phi_mode}, {"mean_mode", mean_mode},
            {"bonferroni", !no_bonferroni}, {"max_candidate_reviews", max_candidate_reviews}};
  }
};

struct FilterOptions {
  bool preprocess = false;
  bool no_lcc = false;
  bool fixpoint = false;
  FilterPolicy policy;

  void add(CLI::App* app) {
    app->add_flag("--preprocess", preprocess, "Largest component plus degree filters before detection");
    app->add_flag("--no-lcc", no_lcc, "With --preprocess, skip the largest-component step");
    app->add_flag("--fixpoint", fixpoint, "Repeat the degree filters until stable");
    app->add_option("--min-reviewer-reviews", policy.min_reviews_per_reviewer);
    app->add_option("--max-reviewer-reviews", policy.max_reviews_per_reviewer);
    app->add_option("--min-product-reviews", policy.min_reviews_per_product);
    app->add_option("--max-product-reviews", policy.max_reviews_per_product);
  }

  FilterPolicy resolved() const {
    FilterPolicy p = policy;
    p.take_largest_component = !no_lcc;
    p.fixpoint = fixpoint;
    return p;
  }

  void canonical(std::vector<std::string>& args) const {
    if (preprocess) args.push_back("--preprocess");
    if (no_lcc) args.push_back("--no-lcc");
    if (fixpoint) args.push_back("--fixpoint");
    args.insert(args.end(), {"--min-reviewer-reviews", std::to_string(policy.min_reviews_per_reviewer),
                             "--max-reviewer-reviews", std::to_string(policy.max_reviews_per_reviewer),
                             "--min-product-reviews", std::to_string(policy.min_reviews_per_product),
                             "--max-product-reviews", std::to_string(policy.max_reviews_per_product)});
  }

  json to_json() const {
    return {{"preprocess", preprocess},
            {"largest_component", !no_lcc},
            {"fixpoint", fixpoint},
            {"min_reviewer_reviews", policy.min_reviews_per_reviewer},
            {"max_reviewer_reviews", policy.max_reviews_per_reviewer},
            {"min_product_reviews", policy.min_reviews_per_product},
            {"max_product_reviews", policy.max_reviews_per_product}};
  }
};

void write_manifest(const std::string& out_dir, RunManifest& m,
                    std::chrono::steady_clock::time_point started) {
  m.duration_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  io::write_file_atomic((fs::path(out_dir) / "manifest.json").string(), m.to_json().dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// synth

synth::RatingPmf parse_pmf(const std::string& text) {
  synth::RatingPmf pmf;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw UsageError("--pmf entries must look like rating:probability");
    try {
      pmf[std::stoi(item.substr(0, colon))] = std::stod(item.substr(colon + 1));
    } catch (const std::exception&) {
      throw UsageError("--pmf entry '" + item + "' is not rating:probability");
    }
  }
  synth::validate_pmf(pmf);
  return pmf;
}

std::string format_pmf(const synth::RatingPmf& pmf) {
  std::string out;
  for (auto [r, p] : pmf) out += (out.empty() ? "" : ",") + std::to_string(r) + ":" + num(p);
  return out;
}

struct SynthCommand {
  std::string model = "A";
  std::size_t graphs = 30;
  std::uint64_t seed = 0;
  synth::GeneratorParams params;
  std::size_t famous = 7;
  std::size_t spammers = 0;
  bool binary = false;
  std::string pool = "observable";
  std::size_t spammer_min_reviews = 2;
  std::string pmf = format_pmf(synth::default_pmf());
  std::string out;
  std::size_t jobs = 1;

  void add(CLI::App* app) {
    app->add_option("--model", model, "Spammer model")->check(CLI::IsMember({"A", "B"}));
    app->add_option("--graphs", graphs, "Number of graphs");
    app->add_option("--seed", seed, "Master seed; graph i uses seed + i");
    app->add_option("--W", params.words, "Typed words (edges) per graph");
    app->add_option("--k", params.alphabet, "Alphabet size");
    app->add_option("--q", params.q, "Word termination probability");
    app->add_option("--beta", params.beta, "Character probability skew");
    app->add_option("--famous", famous, "Famous products per graph");
    app->add_option("--spammers", spammers, "Spammers per graph (0 = model default)");
    app->add_flag("--binary", binary, "Model A with 1/0 ratings");
    app->add_option("--spammer-pool", pool, "Draw spammers from all reviewers or only those with observable spam")
        ->check(CLI::IsMember({"any", "observable"}));
    app->add_option("--spammer-min-reviews", spammer_min_reviews, "Fewest reviews a spammer may have");
    app->add_option("--pmf", pmf, "Model B rating distribution, e.g. 1:0.1,2:0.1,3:0.1,4:0.2,5:0.5");
    app->add_option("--out", out, "Output directory")->required();
    app->add_option("--jobs", jobs, "Worker threads");
  }

  std::vector<std::string> canonical() const {
    std::vector<std::string> a{"synth",  "--model", model,   "--graphs", std::to_string(graphs),
                               "--seed", std::to_string(seed), "--W", std::to_string(params.words),
                               "--k",    std::to_string(params.alphabet), "--q", num(params.q),
                               "--beta", num(params.beta), "--famous", std::to_string(famous),
                               "--spammers", std::to_string(spammers), "--spammer-pool", pool,
                               "--spammer-min-reviews", std::to_string(spammer_min_reviews), "--pmf", pmf};
    if (binary) a.push_back("--binary");
    a.insert(a.end(), {"--out", out, "--jobs", std::to_string(jobs)});
    return a;
  }

  int run(const std::vector<std::string>& original) {
    const auto started = std::chrono::steady_clock::now();
    synth::BatchParams batch;
    batch.generator = params;
    batch.generator.validate();
    batch.model = model == "B" ? synth::SpammerModel::B : synth::SpammerModel::A;
    batch.famous_count = famous;
    batch.spammers = spammers;
    batch.binary = binary;
    batch.pmf = parse_pmf(pmf);
    batch.selection = {pool == "observable", spammer_min_reviews, true};

    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec || !fs::is_directory(out)) throw IoError("cannot create output directory '" + out + "'");

    std::vector<json> per_graph(graphs);
    parallel_for(graphs, jobs, [&](std::size_t i) {
      synth::SynthGraph g = synth::generate_graph(batch, seed, i);
      const fs::path dir = fs::path(out) / graph_dir_name(i);
      io::write_file_atomic((dir / "reviews.csv").string(), io::reviews_csv(g.dataset));
      io::write_file_atomic((dir / "truth.csv").string(), io::truth_csv(g));
      json info = {{"model", model},
                   {"index", i},
                   {"seed", seed + i},
                   {"params",
                    {{"W", params.words}, {"k", params.alphabet}, {"q", params.q}, {"beta", params.beta}}},
                   {"binary", binary},
                   {"spammer_pool", pool},
                   {"spammer_min_reviews", spammer_min_reviews},
                   {"pmf", batch.model == synth::SpammerModel::B ? json(pmf) : json(nullptr)},
                   {"spammers", g.spammer_ids.size()},
                   {"famous_products", std::vector<std::string>(g.famous_products.begin(), g.famous_products.end())},
                   {"reviews", g.dataset.review_count()},
                   {"reviewers", g.dataset.reviewer_count()},
                   {"products", g.dataset.product_count()}};
      io::write_file_atomic((dir / "manifest.json").string(), info.dump(2) + "\n");
      per_graph[i] = {{"graph", graph_dir_name(i)}, {"reviews", g.dataset.review_count()},
                      {"reviewers", g.dataset.reviewer_count()}, {"spammers", g.spammer_ids.size()}};
    });
    for (const auto& info : per_graph)
      if (info["spammers"].get<std::size_t>() < batch.spammer_count())
        std::cerr << "ratedev: " << info["graph"].get<std::string>() << " has only "
                  << info["spammers"].get<std::size_t>() << " eligible spammer(s)\n";

    RunManifest m;
    m.command = "synth";
    m.args = canonical();
    m.original_args = original;
    m.config = {{"model", model},   {"graphs", graphs},     {"W", params.words}, {"k", params.alphabet},
                {"q", params.q},    {"beta", params.beta},  {"famous", famous},  {"spammers", batch.spammer_count()},
                {"binary", binary}, {"spammer_pool", pool},
                {"spammer_min_reviews", spammer_min_reviews}, {"pmf", pmf}};
    m.seeds = {{"master", seed}, {"derivation", "graph i uses master + i"}};
    m.summary = {{"graphs", per_graph}};
    write_manifest(out, m, started);
    return kOk;
  }
};

// ---------------------------------------------------------------------------
// detect

struct DetectCommand {
  InputOptions input;
  DetectorOptions detector;
  FilterOptions filter;
  std::string out;
  std::size_t jobs = 1;

  void add(CLI::App* app) {
    input.add(app);
    detector.add(app);
    filter.add(app);
    app->add_option("--out", out, "Output directory")->required();
    app->add_option("--jobs", jobs, "Worker threads for graph batches");
  }

  std::vector<std::string> canonical() const {
    std::vector<std::string> a{"detect"};
    input.canonical(a);
    detector.canonical(a, input.binary);
    filter.canonical(a);
    a.insert(a.end(), {"--out", out, "--jobs", std::to_string(jobs)});
    return a;
  }

  json run_one(const std::string& in_path, const fs::path& out_dir) const {
    const DetectorConfig cfg = detector.config(input.binary);
    ParseResult parsed = parse_reviews_file(in_path, input.parse_options(cfg.lambda));
    Dataset data = std::move(parsed.dataset);
    if (filter.preprocess && !data.empty()) data = preprocess(data, filter.resolved());
    if (data.empty()) throw EmptyResult("no reviews left in '" + in_path + "' after parsing and filtering");

    Detection result = detect(data, cfg);
    io::write_file_atomic((out_dir / "report.csv").string(), io::report_csv(result.report));
    io::write_file_atomic((out_dir / "candidates.csv").string(), io::candidates_csv(result.report));
    json state = io::state_json(result.state, cfg);
    state["phi"] = result.report.phi;
    state["effective_alpha"] = result.report.effective_alpha;
    state["dataset"] = io::dataset_summary(data, parsed.dropped, parsed.malformed);
    io::write_file_atomic((out_dir / "state.json").string(), state.dump(2) + "\n");

    std::size_t candidates = 0;
    for (const auto& s : result.report.reviewers) candidates += s.is_candidate;
    return {{"iteration", result.state.iteration},
            {"converged", result.state.converged},
            {"phi", result.report.phi},
            {"reviewers", data.reviewer_count()},
            {"reviews", data.review_count()},
            {"candidates", candidates}};
  }

  int run(const std::vector<std::string>& original) {
    const auto started = std::chrono::steady_clock::now();
    RunManifest m;
    m.command = "detect";
    m.args = canonical();
    m.original_args = original;
    m.config = {{"input", input.to_json()}, {"detector", detector.to_json(input.binary)},
                {"filter", filter.to_json()}};

    if (fs::is_directory(input.input)) {
      const auto names = graph_dirs(input.input, "reviews.csv");
      if (names.empty()) throw UsageError("'" + input.input + "' has no */reviews.csv");
      std::vector<json> summaries(names.size());
      parallel_for(names.size(), jobs, [&](std::size_t i) {
        const auto in_path = (fs::path(input.input) / names[i] / "reviews.csv").string();
        summaries[i] = run_one(in_path, fs::path(out) / names[i]);
        summaries[i]["graph"] = names[i];
      });
      for (const auto& name : names) m.add_input((fs::path(input.input) / name / "reviews.csv").string());
      m.summary = {{"graphs", summaries}};
    } else {
      m.summary = run_one(input.input, fs::path(out));
      m.add_input(input.input);
    }
    write_manifest(out, m, started);
    return kOk;
  }
};

// ---------------------------------------------------------------------------
// eval

struct EvalCommand {
  std::string reports;
  std::string truth;
  std::string score_column = "spamicity";
  std::string out;

  void add(CLI::App* app) {
    app->add_option("--reports", reports, "Report CSV, or directory of */report.csv")->required();
    app->add_option("--truth", truth, "Truth CSV, or directory of */truth.csv")->required();
    app->add_option("--score-column", score_column, "Score column in the report files");
    app->add_option("--out", out, "Output directory")->required();
  }

  std::vector<std::string> canonical() const {
    return {"eval", "--reports", reports, "--truth", truth, "--score-column", score_column, "--out", out};
  }

  int run(const std::vector<std::string>& original) {
    const auto started = std::chrono::steady_clock::now();
    std::vector<std::pair<std::string, std::string>> pairs;
    if (fs::is_directory(reports) != fs::is_directory(truth))
      throw UsageError("--reports and --truth must both be files or both be directories");
    if (fs::is_directory(reports)) {
      const auto have_reports = graph_dirs(reports, "report.csv");
      const auto have_truth = graph_dirs(truth, "truth.csv");
      if (have_reports != have_truth)
        throw UsageError("report and truth directories do not hold the same graphs");
      if (have_reports.empty()) throw UsageError("no */report.csv under '" + reports + "'");
      for (const auto& name : have_reports)
        pairs.emplace_back((fs::path(reports) / name / "report.csv").string(),
                           (fs::path(truth) / name / "truth.csv").string());
    } else {
      pairs.emplace_back(reports, truth);
    }

    std::vector<stats::ScoredLabel> pooled;
    std::size_t positives = 0;
    for (const auto& [report_path, truth_path] : pairs) {
      const auto scores = io::read_score_column(report_path, score_column);
      const auto labels = io::read_truth(truth_path);
      if (scores.size() != labels.size())
        throw UsageError("'" + report_path + "' and '" + truth_path + "' list different reviewers");
      for (const auto& [id, label] : labels) {
        auto it = scores.find(id);
        if (it == scores.end()) throw UsageError("reviewer '" + id + "' missing from '" + report_path + "'");
        pooled.push_back({it->second, label});
        positives += label;
      }
    }
    const stats::RocCurve curve = stats::roc_curve(pooled);
    io::write_file_atomic((fs::path(out) / "roc.csv").string(), stats::roc_to_csv(curve));
    json summary = {{"auc", curve.auc},
                    {"graphs", pairs.size()},
                    {"positives", positives},
                    {"negatives", pooled.size() - positives},
                    {"roc_vertices", curve.points.size()}};
    io::write_file_atomic((fs::path(out) / "auc.json").string(), summary.dump(2) + "\n");

    RunManifest m;
    m.command = "eval";
    m.args = canonical();
    m.original_args = original;
    m.config = {{"reports", reports}, {"truth", truth}, {"score_column", score_column}};
    for (const auto& [r, t] : pairs) {
      m.add_input(r);
      m.add_input(t);
    }
    m.summary = summary;
    write_manifest(out, m, started);
    std::cout << "AUC " << num(curve.auc) << " over " << pairs.size() << " graph(s)\n";
    return kOk;
  }
};

// ---------------------------------------------------------------------------
// features

std::vector<double> parse_thresholds(const std::string& text) {
  if (text.empty()) return features::default_thresholds();
  std::vector<double> z;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      z.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw UsageError("threshold '" + item + "' is not a number");
    }
  }
  if (!std::is_sorted(z.begin(), z.end())) throw UsageError("--thresholds must be ascending");
  return z;
}

struct FeaturesCommand {
  InputOptions input;
  std::string candidates;
  std::string out;
  std::size_t sample_size = 100;
  std::size_t repeats = 100;
  std::uint64_t seed = 0;
  std::string thresholds;

  void add(CLI::App* app) {
    input.add(app);
    app->add_option("--candidates", candidates, "Candidate ids (one per line, or a CSV with reviewer_id)")
        ->required();
    app->add_option("--out", out, "Output directory")->required();
    app->add_option("--sample-size", sample_size, "Reviewers per baseline sample");
    app->add_option("--repeats", repeats, "Baseline samples");
    app->add_option("--seed", seed, "Seed; repeat i draws from stream (seed, i)");
    app->add_option("--thresholds", thresholds, "Comma-separated z grid (default 0,0.05,...,1)");
  }

  std::vector<std::string> canonical() const {
    std::vector<std::string> a{"features"};
    input.canonical(a);
    a.insert(a.end(), {"--candidates", candidates, "--out", out, "--sample-size", std::to_string(sample_size),
                       "--repeats", std::to_string(repeats), "--seed", std::to_string(seed)});
    if (!thresholds.empty()) a.insert(a.end(), {"--thresholds", thresholds});
    return a;
  }

  int run(const std::vector<std::string>& original) {
    const auto started = std::chrono::steady_clock::now();
    const auto z = parse_thresholds(thresholds);
    ParseResult parsed = parse_reviews_file(input.input, input.parse_options(input.binary ? 0.5 : 3.0));
    if (parsed.dataset.empty()) throw EmptyResult("no reviews in '" + input.input + "'");
    const auto ids = io::read_id_list(candidates);
    if (ids.empty()) throw EmptyResult("candidate list '" + candidates + "' is empty");

    const auto table = features::compute_features(parsed.dataset);
    const auto baseline = features::baseline_sample(table, sample_size, repeats, seed, z);
    const auto cmp = features::compare_groups(ids, baseline, parsed.dataset, table);
    io::write_file_atomic((fs::path(out) / "features.csv").string(), io::features_csv(table));
    io::write_file_atomic((fs::path(out) / "comparison.csv").string(), io::comparison_csv(cmp));

    RunManifest m;
    m.command = "features";
    m.args = canonical();
    m.original_args = original;
    m.config = {{"input", input.to_json()}, {"candidates", candidates}, {"sample_size", sample_size},
                {"repeats", repeats},       {"thresholds", z}};
    m.seeds = {{"baseline", seed}, {"derivation", "repeat i uses stream (seed, i)"}};
    m.add_input(input.input);
    m.add_input(candidates);
    std::vector<std::string> names;
    for (auto f : table.available()) names.emplace_back(features::feature_name(f));
    m.summary = {{"candidates", ids.size()}, {"features", names}, {"rows", cmp.rows.size()}};
    write_manifest(out, m, started);
    return kOk;
  }
};

// ---------------------------------------------------------------------------
// summary, replay

struct SummaryCommand {
  InputOptions input;
  void add(CLI::App* app) { input.add(app); }
  int run() {
    ParseResult parsed = parse_reviews_file(input.input, input.parse_options(input.binary ? 0.5 : 3.0));
    std::cout << io::dataset_summary(parsed.dataset, parsed.dropped, parsed.malformed).dump(2) << "\n";
    return kOk;
  }
};

struct ReplayCommand {
  std::string manifest;
  std::string out;
  void add(CLI::App* app) {
    app->add_option("manifest", manifest, "manifest.json written by a previous run")->required();
    app->add_option("--out", out, "Write outputs here instead of the recorded directory");
  }
  int run() {
    const auto m = RunManifest::from_json(json::parse(io::read_file(manifest)));
    std::vector<std::string> args = m.args;
    if (!out.empty()) {
      auto it = std::find(args.begin(), args.end(), "--out");
      if (it == args.end() || it + 1 == args.end()) throw UsageError("manifest has no --out to override");
      *(it + 1) = out;
    }
    return cli::run(args);
  }
};

}  // namespace

int run(const std::vector<std::string>& raw_args) {
  CLI::App app{"Opinion-spam detection from rating deviation", "ratedev"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", RATEDEV_VERSION);

  SynthCommand synth_cmd;
  DetectCommand detect_cmd;
  EvalCommand eval_cmd;
  FeaturesCommand features_cmd;
  SummaryCommand summary_cmd;
  ReplayCommand replay_cmd;

  std::map<std::string, CLI::App*> subs;
  subs["synth"] = app.add_subcommand("synth", "Generate labelled synthetic review graphs");
  subs["detect"] = app.add_subcommand("detect", "Score reviewers by anomalous rating deviation");
  subs["eval"] = app.add_subcommand("eval", "Pool reports against ground truth into ROC/AUC");
  subs["features"] = app.add_subcommand("features", "Behavioural features of candidates vs. random reviewers");
  subs["summary"] = app.add_subcommand("summary", "Print review, reviewer and product counts as JSON");
  subs["replay"] = app.add_subcommand("replay", "Re-run a command from its manifest");
  synth_cmd.add(subs["synth"]);
  detect_cmd.add(subs["detect"]);
  eval_cmd.add(subs["eval"]);
  features_cmd.add(subs["features"]);
  summary_cmd.add(subs["summary"]);
  replay_cmd.add(subs["replay"]);
  for (const char* name : {"synth", "detect", "eval", "features"})
    subs[name]->add_option("--config", "Flat key=value file; flags given here take precedence");

  try {
    std::vector<std::string> args = raw_args;
    if (!args.empty() && subs.count(args[0]) && args[0] != "replay" && args[0] != "summary") {
      std::vector<std::string> rest(args.begin() + 1, args.end());
      rest = apply_config_file(*subs[args[0]], rest);
      rest.insert(rest.begin(), args[0]);
      args = std::move(rest);
    }
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);

    if (subs["synth"]->parsed()) return synth_cmd.run(raw_args);
    if (subs["detect"]->parsed()) return detect_cmd.run(raw_args);
    if (subs["eval"]->parsed()) return eval_cmd.run(raw_args);
    if (subs["features"]->parsed()) return features_cmd.run(raw_args);
    if (subs["summary"]->parsed()) return summary_cmd.run();
    if (subs["replay"]->parsed()) return replay_cmd.run();
    return kUsage;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  } catch (const EmptyResult& e) {
    std::cerr << "ratedev: " << e.what() << "\n";
    return kEmpty;
  } catch (const ParseError& e) {
    std::cerr << "ratedev: parse error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    std::cerr << "ratedev: I/O error: " << e.what() << "\n";
    return kUsage;
  } catch (const UsageError& e) {
    std::cerr << "ratedev: " << e.what() << "\n";
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "ratedev: " << e.what() << "\n";
    return kUsage;
  } catch (const std::domain_error& e) {
    std::cerr << "ratedev: " << e.what() << "\n";
    return kUsage;
  } catch (const DatasetError& e) {
    std::cerr << "ratedev: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "ratedev: internal error: " << e.what() << "\n";
    return kInternal;
  }
}

}  // namespace ratedev::cli
