#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "surpdec/surpdec.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitItemFailure = 1;
constexpr int kExitConfig = 2;

// Reads flat JSON objects ({"lambda": 1.5, "stimuli": "x.json", ...}) as CLI11 config,
// scoped to the subcommand being run.
class JsonConfig : public CLI::Config {
 public:
  void set_section(std::string section) { section_ = std::move(section); }

  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}\n"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    nlohmann::json j;
    try {
      input >> j;
    } catch (const nlohmann::json::exception& e) {
      throw CLI::ConversionError("config is not valid JSON: " + std::string(e.what()));
    }
    if (!j.is_object()) throw CLI::ConversionError("config must be a JSON object");
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : j.items()) {
      CLI::ConfigItem item;
      if (!section_.empty()) item.parents = {section_};
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
    return items;
  }

 private:
  static std::string scalar(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
  }

  std::string section_;
};

struct Options {
  std::string stimuli;
  std::string generator = "counterpart";
  std::string corrections;
  std::string candidate_sets;
  std::string lexicon;
  std::string word_vectors;
  std::size_t n_phonological = 100;
  std::size_t n_semantic = 100;
  std::size_t n_contextual = 100;
  double lambda = 1.0;
  double gamma = 8.0;
  double alpha = 1.0;
  double beta = 1.0;
  std::string backend;
  std::string out;
  std::size_t jobs = 8;
  unsigned long long seed = 0;

  std::string summary_out;
  std::string failures_out;
  std::string long_out;
  std::string erp;
  std::string svg;
  std::string item;
  std::string lambda_grid;
  std::string gamma_grid;
  std::vector<std::string> pattern;
  std::string data;
};

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Backend = std::unique_ptr<surpdec_backend, Deleter<surpdec_backend, surpdec_backend_free>>;
using Dataset = std::unique_ptr<surpdec_dataset, Deleter<surpdec_dataset, surpdec_dataset_free>>;
using Candidates = std::unique_ptr<surpdec_candidates, Deleter<surpdec_candidates, surpdec_candidates_free>>;
using Run = std::unique_ptr<surpdec_run, Deleter<surpdec_run, surpdec_run_free>>;

struct ConfigFailure {
  std::string message;
};

void check(surpdec_status status, const std::string& doing) {
  if (status != SURPDEC_OK) {
    throw ConfigFailure{doing + ": " + surpdec_last_error()};
  }
}

std::string take(char* s) {
  std::string out = s ? s : "";
  surpdec_string_free(s);
  return out;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigFailure{"cannot open " + path + " for writing"};
  f << text;
  if (!f) throw ConfigFailure{"failed writing " + path};
}

std::vector<double> grid(const std::string& text) {
  double* values = nullptr;
  std::size_t n = 0;
  check(surpdec_grid_parse(text.c_str(), &values, &n), "parsing grid '" + text + "'");
  std::vector<double> out(values, values + n);
  surpdec_doubles_free(values);
  return out;
}

std::vector<double> gamma_grid(const std::string& text) {
  if (!text.empty()) return grid(text);
  double* values = nullptr;
  std::size_t n = 0;
  check(surpdec_default_gamma_grid(&values, &n), "default gamma grid");
  std::vector<double> out(values, values + n);
  surpdec_doubles_free(values);
  return out;
}

std::string num(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

// '#'-prefixed provenance lines: no timestamps or host data, so reruns are byte-identical.
class Provenance {
 public:
  explicit Provenance(std::string command) : command_(std::move(command)) {}

  void flag(const std::string& name, const std::string& value) { flags_.emplace_back(name, value); }
  void backend(std::string identity) { backend_ = std::move(identity); }
  void seed(unsigned long long s) { seed_ = s; }

  std::string header() const {
    std::ostringstream out;
    out << "# surpdec " << surpdec_version() << '\n';
    out << "# command: " << command_ << '\n';
    for (const auto& [k, v] : flags_) out << "# flag " << k << '=' << v << '\n';
    out << "# schema_versions: stimulus=1 candidates=1 results=1\n";
    if (!backend_.empty()) out << "# backend: " << backend_ << '\n';
    out << "# seed: " << seed_ << '\n';
    return out.str();
  }

 private:
  std::string command_;
  std::vector<std::pair<std::string, std::string>> flags_;
  std::string backend_;
  unsigned long long seed_ = 0;
};

Backend open_backend(const Options& o, Provenance& prov) {
  if (o.backend.empty()) throw ConfigFailure{"--backend is required (mock:FILE or http:URL)"};
  surpdec_backend* b = nullptr;
  check(surpdec_backend_open(o.backend.c_str(), &b), "opening backend");
  Backend backend(b);
  char* id = nullptr;
  check(surpdec_backend_identity(b, &id), "backend identity");
  prov.backend(take(id));
  return backend;
}

Dataset load_dataset(const Options& o) {
  if (o.stimuli.empty()) throw ConfigFailure{"--stimuli is required"};
  surpdec_dataset* d = nullptr;
  check(surpdec_dataset_load(o.stimuli.c_str(), &d), "loading " + o.stimuli);
  return Dataset(d);
}

nlohmann::json dataset_info(const surpdec_dataset* d) {
  char* s = nullptr;
  check(surpdec_dataset_info_json(d, &s), "dataset info");
  return nlohmann::json::parse(take(s));
}

void validate_generator(const Options& o) {
  if (!o.candidate_sets.empty()) return;
  if (o.generator == "external") {
    if (o.corrections.empty()) throw ConfigFailure{"--generator external requires --candidates FILE"};
  } else if (o.generator == "sampler") {
    if (o.lexicon.empty()) throw ConfigFailure{"--generator sampler requires --lexicon FILE"};
  } else if (o.generator != "counterpart") {
    throw ConfigFailure{"unknown generator '" + o.generator + "' (external, counterpart, sampler)"};
  }
}

Candidates build_candidates(const Options& o, const surpdec_dataset* d, const surpdec_backend* b) {
  surpdec_candidates* c = nullptr;
  if (!o.candidate_sets.empty()) {
    check(surpdec_candidates_load(o.candidate_sets.c_str(), &c), "loading " + o.candidate_sets);
    return Candidates(c);
  }
  surpdec_generator_options g;
  surpdec_generator_options_init(&g);
  g.generator = o.generator.c_str();
  g.corrections_path = o.corrections.empty() ? nullptr : o.corrections.c_str();
  g.lexicon_path = o.lexicon.empty() ? nullptr : o.lexicon.c_str();
  g.word_vectors_path = o.word_vectors.empty() ? nullptr : o.word_vectors.c_str();
  g.n_phonological = o.n_phonological;
  g.n_semantic = o.n_semantic;
  g.n_contextual = o.n_contextual;
  g.jobs = o.jobs;
  check(surpdec_candidates_generate(d, b, &g, &c), "generating candidates");
  return Candidates(c);
}

void generator_flags(const Options& o, Provenance& prov) {
  if (!o.candidate_sets.empty()) {
    prov.flag("candidate-sets", o.candidate_sets);
    return;
  }
  prov.flag("generator", o.generator);
  if (!o.corrections.empty()) prov.flag("candidates", o.corrections);
  if (o.generator == "sampler") {
    prov.flag("lexicon", o.lexicon);
    if (!o.word_vectors.empty()) prov.flag("word-vectors", o.word_vectors);
    prov.flag("n-phonological", std::to_string(o.n_phonological));
    prov.flag("n-semantic", std::to_string(o.n_semantic));
    prov.flag("n-contextual", std::to_string(o.n_contextual));
  }
}

void report_failures(const std::string& csv, std::size_t count, const std::string& path) {
  if (count == 0) return;
  std::cerr << "surpdec: " << count << " item(s) failed\n";
  if (!path.empty()) {
    write_output(path, csv);
  } else {
    std::cerr << csv;
  }
}

int cmd_decompose(Options o, const CLI::App* sub) {
  validate_generator(o);
  Provenance prov("decompose");
  auto dataset = load_dataset(o);
  const auto info = dataset_info(dataset.get());
  if (sub->get_option("--lambda")->count() == 0 && !info["lambda"].is_null()) o.lambda = info["lambda"].get<double>();
  if (sub->get_option("--gamma")->count() == 0 && !info["gamma"].is_null()) o.gamma = info["gamma"].get<double>();
  auto backend = open_backend(o, prov);

  prov.flag("stimuli", o.stimuli);
  generator_flags(o, prov);
  prov.flag("lambda", num(o.lambda));
  prov.flag("gamma", num(o.gamma));
  prov.flag("alpha", num(o.alpha));
  prov.flag("beta", num(o.beta));
  prov.flag("backend", o.backend);
  prov.seed(o.seed);

  auto candidates = build_candidates(o, dataset.get(), backend.get());
  surpdec_decompose_options opts;
  surpdec_decompose_options_init(&opts);
  opts.lambda = o.lambda;
  opts.gamma = o.gamma;
  opts.alpha = o.alpha;
  opts.beta = o.beta;
  opts.jobs = o.jobs;
  surpdec_run* r = nullptr;
  check(surpdec_run_decompose(dataset.get(), candidates.get(), backend.get(), &opts, &r), "decomposing");
  Run run(r);

  char* s = nullptr;
  check(surpdec_run_items_csv(run.get(), &s), "items table");
  write_output(o.out, prov.header() + take(s));
  if (!o.summary_out.empty()) {
    check(surpdec_run_summary_csv(run.get(), &s), "summary table");
    write_output(o.summary_out, prov.header() + take(s));
  }
  if (!o.svg.empty()) {
    const std::string title = info["name"].get<std::string>() + " (lambda=" + num(o.lambda) +
                              ", gamma=" + num(o.gamma) + ")";
    check(surpdec_run_effects_svg(run.get(), title.c_str(), &s), "effects plot");
    write_output(o.svg, take(s));
  }
  if (!o.long_out.empty()) {
    check(surpdec_run_long_format_csv(run.get(), o.erp.empty() ? nullptr : o.erp.c_str(), &s), "long-format export");
    write_output(o.long_out, prov.header() + take(s));
  }
  const std::size_t n_failed = surpdec_run_failure_count(run.get());
  check(surpdec_run_failures_csv(run.get(), &s), "failure report");
  report_failures(take(s), n_failed, o.failures_out);
  return n_failed == 0 ? kExitOk : kExitItemFailure;
}

int cmd_frontier(const Options& o) {
  validate_generator(o);
  if (o.item.empty()) throw ConfigFailure{"--item is required"};
  Provenance prov("frontier");
  auto dataset = load_dataset(o);
  if (!surpdec_dataset_has_item(dataset.get(), o.item.c_str())) throw ConfigFailure{"unknown item id '" + o.item + "'"};
  const auto lambdas = grid(o.lambda_grid);
  auto backend = open_backend(o, prov);

  prov.flag("stimuli", o.stimuli);
  generator_flags(o, prov);
  prov.flag("item", o.item);
  prov.flag("lambda-grid", o.lambda_grid.empty() ? "default" : o.lambda_grid);
  prov.flag("gamma", num(o.gamma));
  prov.flag("backend", o.backend);
  prov.seed(o.seed);

  auto candidates = build_candidates(o, dataset.get(), backend.get());
  char* csv = nullptr;
  char* svg = nullptr;
  const auto status = surpdec_frontier(candidates.get(), o.item.c_str(), lambdas.data(), lambdas.size(), o.gamma,
                                       &csv, o.svg.empty() ? nullptr : &svg);
  if (status == SURPDEC_UNKNOWN_ITEM_ID && surpdec_candidates_failure_count(candidates.get()) > 0) {
    char* s = nullptr;
    check(surpdec_candidates_failures_csv(candidates.get(), &s), "failure report");
    report_failures(take(s), surpdec_candidates_failure_count(candidates.get()), o.failures_out);
    return kExitItemFailure;
  }
  check(status, "tracing frontier");
  write_output(o.out, prov.header() + take(csv));
  if (!o.svg.empty()) write_output(o.svg, take(svg));
  return kExitOk;
}

int cmd_gridsearch(const Options& o) {
  validate_generator(o);
  Provenance prov("gridsearch");
  auto dataset = load_dataset(o);
  const auto lambdas = grid(o.lambda_grid);
  const auto gammas = gamma_grid(o.gamma_grid);
  auto backend = open_backend(o, prov);

  prov.flag("stimuli", o.stimuli);
  generator_flags(o, prov);
  prov.flag("lambda-grid", o.lambda_grid.empty() ? "default" : o.lambda_grid);
  prov.flag("gamma-grid", o.gamma_grid.empty() ? "default" : o.gamma_grid);
  for (const auto& p : o.pattern) prov.flag("pattern", p);
  prov.flag("backend", o.backend);
  prov.seed(o.seed);

  auto candidates = build_candidates(o, dataset.get(), backend.get());
  std::vector<const char*> pattern;
  for (const auto& p : o.pattern) pattern.push_back(p.c_str());
  char* csv = nullptr;
  check(surpdec_gridsearch(dataset.get(), candidates.get(), backend.get(), lambdas.data(), lambdas.size(),
                           gammas.data(), gammas.size(), o.pattern.empty() ? nullptr : pattern.data(),
                           pattern.size(), o.jobs, &csv),
        "grid search");
  write_output(o.out, prov.header() + take(csv));
  const std::size_t n_failed = surpdec_candidates_failure_count(candidates.get());
  if (n_failed > 0) {
    char* s = nullptr;
    check(surpdec_candidates_failures_csv(candidates.get(), &s), "failure report");
    report_failures(take(s), n_failed, o.failures_out);
    return kExitItemFailure;
  }
  return kExitOk;
}

int cmd_stats(const Options& o) {
  if (o.data.empty()) throw ConfigFailure{"--data is required"};
  Provenance prov("stats");
  prov.flag("data", o.data);
  prov.seed(o.seed);
  char* report = nullptr;
  int all_match = 0;
  check(surpdec_stats_sign_check(o.data.c_str(), &report, &all_match), "sign check");
  write_output(o.out, prov.header() + take(report));
  return kExitOk;
}

int cmd_gen_candidates(const Options& o) {
  validate_generator(o);
  if (!o.candidate_sets.empty()) throw ConfigFailure{"gen-candidates does not take --candidate-sets"};
  Provenance prov("gen-candidates");
  auto dataset = load_dataset(o);
  auto backend = open_backend(o, prov);
  auto candidates = build_candidates(o, dataset.get(), backend.get());
  char* json = nullptr;
  check(surpdec_candidates_to_json(candidates.get(), &json), "serializing candidates");
  write_output(o.out, take(json));
  const std::size_t n_failed = surpdec_candidates_failure_count(candidates.get());
  if (n_failed > 0) {
    char* s = nullptr;
    check(surpdec_candidates_failures_csv(candidates.get(), &s), "failure report");
    report_failures(take(s), n_failed, o.failures_out);
    return kExitItemFailure;
  }
  return kExitOk;
}

void add_common(CLI::App* sub, Options& o) {
  sub->fallthrough();
  sub->add_option("--out", o.out, "Output file (default stdout)");
  sub->add_option("--seed", o.seed, "Seed echoed into output headers")->capture_default_str();
}

void add_inputs(CLI::App* sub, Options& o) {
  sub->add_option("--stimuli", o.stimuli, "Stimulus JSON file");
  sub->add_option("--generator", o.generator, "Candidate generator")
      ->check(CLI::IsMember({"external", "counterpart", "sampler"}))
      ->capture_default_str();
  sub->add_option("--candidates", o.corrections, "Corrections JSON {item_id: [sentences]} for the external generator");
  sub->add_option("--candidate-sets", o.candidate_sets, "Precomputed candidate sets (output of gen-candidates)");
  sub->add_option("--lexicon", o.lexicon, "Lexicon TSV (word, rank) for the sampler");
  sub->add_option("--word-vectors", o.word_vectors, "Alternate word-vector JSON for semantic competitors");
  sub->add_option("--n-phonological", o.n_phonological)->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--n-semantic", o.n_semantic)->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--n-contextual", o.n_contextual)->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--backend", o.backend, "mock:FILE or http:URL");
  sub->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--failures-out", o.failures_out, "Write the per-item failure report here (default stderr)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shallow/deep surprisal decomposition"};
  auto config = std::make_shared<JsonConfig>();
  app.config_formatter(config);
  app.set_config("--config", "", "JSON file supplying any flag; explicit flags win");
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(surpdec_version()));

  Options o;

  auto* decompose = app.add_subcommand("decompose", "Per-item shallow/deep decomposition");
  add_common(decompose, o);
  add_inputs(decompose, o);
  decompose->add_option("--lambda", o.lambda, "Processing depth multiplier")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  decompose->add_option("--gamma", o.gamma, "Semantic weight in the distortion")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  decompose->add_option("--alpha", o.alpha, "N400 scale")->check(CLI::PositiveNumber)->capture_default_str();
  decompose->add_option("--beta", o.beta, "P600 scale")->check(CLI::PositiveNumber)->capture_default_str();
  decompose->add_option("--summary-out", o.summary_out, "Per-condition summary CSV");
  decompose->add_option("--svg", o.svg, "Per-condition effects bar chart");
  decompose->add_option("--long-out", o.long_out, "Long-format export for mixed-effects analysis");
  decompose->add_option("--erp", o.erp, "Per-trial ERP amplitudes to join into --long-out");

  auto* frontier = app.add_subcommand("frontier", "Depth/distortion frontier of one item");
  add_common(frontier, o);
  add_inputs(frontier, o);
  frontier->add_option("--item", o.item, "Item id");
  frontier->add_option("--lambda-grid", o.lambda_grid, "start:stop:step or a,b,c");
  frontier->add_option("--gamma", o.gamma)->check(CLI::NonNegativeNumber)->capture_default_str();
  frontier->add_option("--svg", o.svg, "Frontier plot");

  auto* gridsearch = app.add_subcommand("gridsearch", "Rank (lambda, gamma) cells by expected-pattern score");
  add_common(gridsearch, o);
  add_inputs(gridsearch, o);
  gridsearch->add_option("--lambda-grid", o.lambda_grid, "start:stop:step or a,b,c");
  gridsearch->add_option("--gamma-grid", o.gamma_grid, "start:stop:step or a,b,c");
  gridsearch->add_option("--pattern", o.pattern, "Constraint such as 'A[Semantic] > A[Control]' (repeatable)");

  auto* stats = app.add_subcommand("stats", "Sign checks of the surprisal/N400/P600 regressions");
  add_common(stats, o);
  stats->add_option("--data", o.data, "CSV with columns n400, p600, surprisal");

  auto* gen = app.add_subcommand("gen-candidates", "Write candidate sets as JSON");
  add_common(gen, o);
  add_inputs(gen, o);

  for (int i = 1; i < argc; ++i) {
    if (app.get_subcommand_no_throw(argv[i]) != nullptr) {
      config->set_section(argv[i]);
      break;
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (decompose->parsed()) return cmd_decompose(o, decompose);
    if (frontier->parsed()) return cmd_frontier(o);
    if (gridsearch->parsed()) return cmd_gridsearch(o);
    if (stats->parsed()) return cmd_stats(o);
    if (gen->parsed()) return cmd_gen_candidates(o);
  } catch (const ConfigFailure& e) {
    std::cerr << "surpdec: " << e.message << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "surpdec: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}
