#include "surpdec/surpdec.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "surpdec/candidates.hpp"
#include "surpdec/experiment.hpp"
#include "surpdec/json_io.hpp"
#include "surpdec/lm_backend.hpp"
#include "surpdec/policy.hpp"
#include "surpdec/report.hpp"
#include "surpdec/stats.hpp"

struct surpdec_backend {
  std::shared_ptr<const surpdec::LanguageModel> lm;
};

struct surpdec_dataset {
  surpdec::Dataset data;
};

struct surpdec_candidates {
  std::vector<surpdec::CandidateSet> sets;
  std::vector<surpdec::ItemFailure> failures;
};

struct surpdec_run {
  surpdec::ExperimentRun run;
};

namespace {

thread_local std::string g_last_error;

template <class F>
surpdec_status guarded(F&& f) {
  g_last_error.clear();
  try {
    f();
    return SURPDEC_OK;
  } catch (const surpdec::Error& e) {
    g_last_error = e.what();
    return static_cast<surpdec_status>(static_cast<int>(e.code()));
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown exception";
  }
  return SURPDEC_INTERNAL;
}

void require(bool ok, const char* what) {
  if (!ok) throw surpdec::Error(surpdec::ErrorCode::InvalidArgument, what);
}

char* dup_string(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void emit(char** out, const std::string& s) {
  require(out != nullptr, "output pointer is null");
  *out = dup_string(s);
}

void emit_doubles(const std::vector<double>& v, double** values, std::size_t* n) {
  require(values && n, "output pointer is null");
  auto* buf = static_cast<double*>(std::malloc(std::max<std::size_t>(v.size(), 1) * sizeof(double)));
  if (!buf) throw std::bad_alloc();
  std::copy(v.begin(), v.end(), buf);
  *values = buf;
  *n = v.size();
}

surpdec::PreparedExperiment prepare_from(const surpdec_dataset* dataset, const surpdec_candidates* candidates,
                                         const surpdec_backend* backend, std::size_t jobs) {
  auto prepared = surpdec::prepare(dataset->data.stimuli, candidates->sets, *backend->lm, jobs);
  prepared.failures.insert(prepared.failures.end(), candidates->failures.begin(), candidates->failures.end());
  std::sort(prepared.failures.begin(), prepared.failures.end(),
            [](const auto& a, const auto& b) { return a.item_id < b.item_id; });
  return prepared;
}

}  // namespace

extern "C" {

const char* surpdec_version(void) { return "0.1.0"; }

const char* surpdec_status_name(surpdec_status status) {
  if (status == SURPDEC_OK) return "Ok";
  return surpdec::error_code_name(static_cast<surpdec::ErrorCode>(status));
}

const char* surpdec_last_error(void) { return g_last_error.c_str(); }

void surpdec_string_free(char* s) { std::free(s); }
void surpdec_doubles_free(double* values) { std::free(values); }

surpdec_status surpdec_backend_open(const char* spec, surpdec_backend** out) {
  return guarded([&] {
    require(spec && out, "null argument");
    auto handle = std::make_unique<surpdec_backend>();
    handle->lm = surpdec::open_backend(spec);
    *out = handle.release();
  });
}

void surpdec_backend_free(surpdec_backend* backend) { delete backend; }

surpdec_status surpdec_backend_identity(const surpdec_backend* backend, char** out) {
  return guarded([&] {
    require(backend, "null backend");
    emit(out, backend->lm->identity());
  });
}

surpdec_status surpdec_backend_logprob(const surpdec_backend* backend, const char* context, const char* continuation,
                                       double* out) {
  return guarded([&] {
    require(backend && context && continuation && out, "null argument");
    *out = backend->lm->logprob(context, continuation);
  });
}

surpdec_status surpdec_dataset_load(const char* path, surpdec_dataset** out) {
  return guarded([&] {
    require(path && out, "null argument");
    auto handle = std::make_unique<surpdec_dataset>();
    handle->data = surpdec::load_stimuli(path);
    *out = handle.release();
  });
}

void surpdec_dataset_free(surpdec_dataset* dataset) { delete dataset; }

size_t surpdec_dataset_size(const surpdec_dataset* dataset) { return dataset ? dataset->data.stimuli.size() : 0; }

int surpdec_dataset_has_item(const surpdec_dataset* dataset, const char* item_id) {
  if (!dataset || !item_id) return 0;
  const auto& s = dataset->data.stimuli;
  return std::any_of(s.begin(), s.end(), [&](const auto& st) { return st.item_id == item_id; }) ? 1 : 0;
}

surpdec_status surpdec_dataset_info_json(const surpdec_dataset* dataset, char** out) {
  return guarded([&] {
    require(dataset, "null dataset");
    const auto& d = dataset->data;
    std::set<std::string> conditions;
    for (const auto& s : d.stimuli) conditions.insert(s.condition);
    nlohmann::json j;
    j["name"] = d.name;
    j["n_items"] = d.stimuli.size();
    j["conditions"] = std::vector<std::string>(conditions.begin(), conditions.end());
    j["expected_pattern"] = d.expected_pattern;
    j["lambda"] = d.lambda ? nlohmann::json(*d.lambda) : nlohmann::json(nullptr);
    j["gamma"] = d.gamma ? nlohmann::json(*d.gamma) : nlohmann::json(nullptr);
    emit(out, j.dump());
  });
}

void surpdec_generator_options_init(surpdec_generator_options* options) {
  if (!options) return;
  surpdec::SamplerConfig defaults;
  options->generator = "counterpart";
  options->corrections_path = nullptr;
  options->lexicon_path = nullptr;
  options->word_vectors_path = nullptr;
  options->n_phonological = defaults.n_phonological;
  options->n_semantic = defaults.n_semantic;
  options->n_contextual = defaults.n_contextual;
  options->jobs = 8;
}

surpdec_status surpdec_candidates_generate(const surpdec_dataset* dataset, const surpdec_backend* backend,
                                           const surpdec_generator_options* options, surpdec_candidates** out) {
  return guarded([&] {
    require(dataset && backend && options && out, "null argument");
    surpdec::GeneratorConfig config;
    config.kind = surpdec::parse_generator(options->generator ? options->generator : "");
    if (options->corrections_path) config.corrections_path = options->corrections_path;
    if (options->lexicon_path) config.lexicon_path = options->lexicon_path;
    if (options->word_vectors_path) config.word_vectors_path = options->word_vectors_path;
    config.sampler = {options->n_phonological, options->n_semantic, options->n_contextual};
    auto outcome = surpdec::generate_candidates(dataset->data.stimuli, config, *backend->lm, options->jobs);
    auto handle = std::make_unique<surpdec_candidates>();
    handle->sets = std::move(outcome.sets);
    handle->failures = std::move(outcome.failures);
    *out = handle.release();
  });
}

surpdec_status surpdec_candidates_load(const char* path, surpdec_candidates** out) {
  return guarded([&] {
    require(path && out, "null argument");
    auto handle = std::make_unique<surpdec_candidates>();
    handle->sets = surpdec::candidate_sets_from_json(surpdec::read_text_file(path));
    *out = handle.release();
  });
}

void surpdec_candidates_free(surpdec_candidates* candidates) { delete candidates; }

size_t surpdec_candidates_count(const surpdec_candidates* candidates) {
  return candidates ? candidates->sets.size() : 0;
}

size_t surpdec_candidates_failure_count(const surpdec_candidates* candidates) {
  return candidates ? candidates->failures.size() : 0;
}

surpdec_status surpdec_candidates_to_json(const surpdec_candidates* candidates, char** out) {
  return guarded([&] {
    require(candidates, "null candidates");
    emit(out, surpdec::candidate_sets_to_json(candidates->sets));
  });
}

surpdec_status surpdec_candidates_failures_csv(const surpdec_candidates* candidates, char** out) {
  return guarded([&] {
    require(candidates, "null candidates");
    emit(out, surpdec::failures_csv(candidates->failures));
  });
}

void surpdec_decompose_options_init(surpdec_decompose_options* options) {
  if (!options) return;
  surpdec::PolicyParams defaults;
  options->lambda = defaults.lambda;
  options->gamma = defaults.gamma;
  options->alpha = 1.0;
  options->beta = 1.0;
  options->jobs = 8;
}

surpdec_status surpdec_run_decompose(const surpdec_dataset* dataset, const surpdec_candidates* candidates,
                                     const surpdec_backend* backend, const surpdec_decompose_options* options,
                                     surpdec_run** out) {
  return guarded([&] {
    require(dataset && candidates && backend && options && out, "null argument");
    const surpdec::PolicyParams params{options->lambda, options->gamma};
    surpdec::validate_params(params);
    require(options->alpha > 0 && options->beta > 0, "alpha and beta must be positive");
    const auto prepared = prepare_from(dataset, candidates, backend, options->jobs);
    auto handle = std::make_unique<surpdec_run>();
    handle->run = surpdec::decompose_prepared(prepared, params, options->alpha, options->beta, options->jobs);
    *out = handle.release();
  });
}

void surpdec_run_free(surpdec_run* run) { delete run; }

size_t surpdec_run_result_count(const surpdec_run* run) { return run ? run->run.results.size() : 0; }
size_t surpdec_run_failure_count(const surpdec_run* run) { return run ? run->run.failures.size() : 0; }

surpdec_status surpdec_run_items_csv(const surpdec_run* run, char** out) {
  return guarded([&] {
    require(run, "null run");
    emit(out, surpdec::items_csv(run->run.results));
  });
}

surpdec_status surpdec_run_summary_csv(const surpdec_run* run, char** out) {
  return guarded([&] {
    require(run, "null run");
    emit(out, surpdec::summary_csv(run->run.summaries));
  });
}

surpdec_status surpdec_run_failures_csv(const surpdec_run* run, char** out) {
  return guarded([&] {
    require(run, "null run");
    emit(out, surpdec::failures_csv(run->run.failures));
  });
}

surpdec_status surpdec_run_effects_svg(const surpdec_run* run, const char* title, char** out) {
  return guarded([&] {
    require(run, "null run");
    emit(out, surpdec::effects_svg(run->run.summaries, title ? title : ""));
  });
}

surpdec_status surpdec_run_long_format_csv(const surpdec_run* run, const char* erp_csv_path, char** out) {
  return guarded([&] {
    require(run, "null run");
    std::optional<std::vector<surpdec::ErpTrial>> trials;
    if (erp_csv_path) trials = surpdec::parse_erp_csv(surpdec::read_text_file(erp_csv_path));
    emit(out, surpdec::export_long_format(run->run.results, trials));
  });
}

surpdec_status surpdec_frontier(const surpdec_candidates* candidates, const char* item_id, const double* lambdas,
                                size_t n_lambdas, double gamma, char** csv_out, char** svg_out) {
  return guarded([&] {
    require(candidates && item_id && csv_out, "null argument");
    require(lambdas || n_lambdas == 0, "null lambda grid");
    require(n_lambdas > 0, "empty lambda grid");
    const auto it = std::find_if(candidates->sets.begin(), candidates->sets.end(),
                                 [&](const auto& s) { return s.item_id == item_id; });
    if (it == candidates->sets.end()) {
      throw surpdec::Error(surpdec::ErrorCode::UnknownItemId, std::string("no candidate set for item ") + item_id);
    }
    const auto points = surpdec::frontier(*it, std::span<const double>(lambdas, n_lambdas), gamma);
    std::string csv = surpdec::frontier_csv(points);
    std::string svg;
    if (svg_out) svg = surpdec::frontier_svg(points, std::string("Efficient frontier: ") + item_id);
    *csv_out = dup_string(csv);
    if (svg_out) *svg_out = dup_string(svg);
  });
}

surpdec_status surpdec_gridsearch(const surpdec_dataset* dataset, const surpdec_candidates* candidates,
                                  const surpdec_backend* backend, const double* lambdas, size_t n_lambdas,
                                  const double* gammas, size_t n_gammas, const char* const* pattern,
                                  size_t n_pattern, size_t jobs, char** csv_out) {
  return guarded([&] {
    require(dataset && candidates && backend, "null argument");
    require(lambdas && n_lambdas > 0 && gammas && n_gammas > 0, "grids must be nonempty");
    std::vector<std::string> constraints;
    if (pattern) {
      for (std::size_t i = 0; i < n_pattern; ++i) {
        require(pattern[i] != nullptr, "null pattern entry");
        constraints.emplace_back(pattern[i]);
      }
    } else {
      constraints = dataset->data.expected_pattern;
    }
    const auto prepared = prepare_from(dataset, candidates, backend, jobs);
    const auto rows = surpdec::grid_search(prepared, constraints, std::span<const double>(lambdas, n_lambdas),
                                           std::span<const double>(gammas, n_gammas), jobs);
    emit(csv_out, surpdec::grid_csv(rows));
  });
}

surpdec_status surpdec_grid_parse(const char* text, double** values, size_t* n) {
  return guarded([&] {
    const std::vector<double> grid =
        (text == nullptr || *text == '\0') ? surpdec::default_lambda_grid() : surpdec::parse_grid(text);
    emit_doubles(grid, values, n);
  });
}

surpdec_status surpdec_default_gamma_grid(double** values, size_t* n) {
  return guarded([&] { emit_doubles(surpdec::default_gamma_grid(), values, n); });
}

surpdec_status surpdec_stats_sign_check(const char* csv_path, char** report_out, int* all_match) {
  return guarded([&] {
    require(csv_path, "null path");
    const auto data = surpdec::parse_sign_csv(surpdec::read_text_file(csv_path));
    const auto report = surpdec::check_sign_predictions(data.n400, data.p600, data.surprisal);
    emit(report_out, surpdec::sign_report_text(report));
    if (all_match) *all_match = report.all_match ? 1 : 0;
  });
}

surpdec_status surpdec_lambda_presets_json(const char* generator, char** out) {
  return guarded([&] {
    require(generator, "null generator");
    nlohmann::json j = nlohmann::json::array();
    for (const auto& p : surpdec::lambda_presets(surpdec::parse_generator(generator))) {
      j.push_back({{"experiment", p.experiment}, {"lambda", p.lambda}});
    }
    emit(out, j.dump());
  });
}

}  // extern "C"
