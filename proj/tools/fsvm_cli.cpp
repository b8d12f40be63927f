#include "fsvm/config.hpp"
#include "fsvm/report.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <iostream>

namespace fs = std::filesystem;
using namespace fsvm;

namespace {

struct Common {
    std::string config;
    std::string data;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    std::string c_grid;
    std::string sigma_grid;
    std::string d_range;
};

int exit_code(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::configuration: return 1;
    case ErrorKind::convergence: return 3;
    default: return 2;
    }
}

std::string one_line(std::string s)
{
    for (char& c : s)
        if (c == '\n' || c == '\r')
            c = ' ';
    return s;
}

int report_error(const char* code, int status, const std::string& message, std::optional<std::size_t> index = {})
{
    std::cerr << "error code=" << code << " exit=" << status;
    if (index)
        std::cerr << " index=" << *index;
    std::cerr << " message=" << Json(one_line(message)).dump() << "\n";
    return status;
}

unsigned default_threads()
{
    if (const char* env = std::getenv("FSVM_THREADS")) {
        const double v = parse_double(env, "FSVM_THREADS");
        if (v < 1 || v != std::floor(v))
            throw Error(ErrorKind::configuration, "FSVM_THREADS must be a positive integer");
        return static_cast<unsigned>(v);
    }
    return 0;
}

/// Loads the configuration and applies command-line overrides.
RunConfig prepare(const Common& c)
{
    if (c.config.empty())
        throw Error(ErrorKind::configuration, "--config is required");
    RunConfig config = load_run_config(c.config);
    if (!c.data.empty()) {
        if (!config.dataset)
            config.dataset = DatasetDescriptor{};
        config.dataset->path = c.data;
    }
    if (!config.dataset)
        throw Error(ErrorKind::configuration, "no dataset: set 'dataset' in the configuration or pass --data");
    if (c.seed) {
        config.seed = *c.seed;
        config.split.seed = *c.seed;
        config.protocol.seed = *c.seed;
        config.protocol.inner.seed = *c.seed;
    }
    if (c.threads > 0)
        config.threads = c.threads;
    else if (const unsigned env = default_threads(); env > 0)
        config.threads = env;
    if (!c.c_grid.empty())
        override_c_grid(config.grid, parse_number_list(c.c_grid));
    if (!c.sigma_grid.empty())
        override_sigma_grid(config.grid, parse_number_list(c.sigma_grid));
    if (!c.d_range.empty())
        override_dimensions(config.grid, parse_int_list(c.d_range));
    return config;
}

SelectOptions select_options(const RunConfig& config)
{
    SelectOptions o;
    o.solver = config.solver;
    o.threads = config.threads;
    return o;
}

void print_warnings(const std::vector<std::string>& warnings)
{
    for (const auto& w : warnings)
        std::cerr << "warning: " << w << "\n";
}

double seconds_since(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int run_select(const Common& c, bool save, const std::string& command)
{
    const auto start = std::chrono::steady_clock::now();
    RunConfig config = prepare(c);
    const LabeledDataset data = load_dataset(*config.dataset);
    resolve_auto_spline(config, data);
    print_warnings(validate_grid(config.grid));
    const SelectionResult result = select(config.grid, data, config.split, select_options(config));
    print_warnings(result.warnings);
    const fs::path out = c.out;
    write_file_atomic(out / "selection.jsonl", selection_payload(result));
    write_file_atomic(out / "selection.txt", render_selection(result));
    write_file_atomic(out / "selection.meta.json", run_metadata(command, seconds_since(start)));
    if (save)
        save_model(result.model, out / "model.fsvm");
    std::cout << render_selection(result);
    return 0;
}

int run_train(const Common& c)
{
    const auto start = std::chrono::steady_clock::now();
    RunConfig config = prepare(c);
    if (config.grid.size() != 1)
        return run_select(c, true, "train");
    const LabeledDataset data = load_dataset(*config.dataset);
    resolve_auto_spline(config, data);
    const Candidate candidate = config.grid.enumerate().front();
    const TrainResult trained = train(candidate.kernel, data, candidate.C, config.solver, config.seed);
    const fs::path out = c.out;
    save_model(trained.model, out / "model.fsvm");

    Json summary;
    summary["type"] = "training";
    summary["candidate"] = to_json(candidate);
    summary["training_size"] = data.size();
    summary["support_vectors"] = trained.model.support().size();
    summary["bias"] = trained.model.bias();
    summary["objective"] = trained.solution.objective;
    summary["iterations"] = trained.solution.iterations;
    summary["training_error"] = empirical_error(trained.model, data);
    write_file_atomic(out / "train.jsonl", summary.dump() + "\n");
    write_file_atomic(out / "train.meta.json", run_metadata("train", seconds_since(start)));
    std::cout << "trained " << candidate.kernel.describe() << " C=" << format_double(candidate.C) << " on "
              << data.size() << " curves, " << trained.model.support().size() << " support vectors\n";
    return 0;
}

int run_evaluate(const Common& c)
{
    const auto start = std::chrono::steady_clock::now();
    RunConfig config = prepare(c);
    const LabeledDataset data = load_dataset(*config.dataset);
    resolve_auto_spline(config, data);
    print_warnings(validate_grid(config.grid));
    EvalOptions options;
    options.select = select_options(config);
    options.select.threads = 1;
    options.threads = config.threads;
    const EvaluationReport report = run_protocol(data, config.grid, config.protocol, options);
    const fs::path out = c.out;
    write_file_atomic(out / "evaluation.jsonl", evaluation_payload(report));
    write_file_atomic(out / "evaluation.txt", render_evaluation(report));
    write_file_atomic(out / "evaluation.meta.json", run_metadata("evaluate", seconds_since(start)));
    std::cout << render_evaluation(report);
    return 0;
}

int run_predict(const std::string& model_path, const std::string& data_path, const std::string& format,
                bool unlabeled, const std::string& out_dir)
{
    const SvmModel model = load_model(model_path);
    DatasetDescriptor d;
    d.path = data_path;
    d.format = dataset_format_from_string(format);
    d.unlabeled = unlabeled;
    d.fallback_grid = model.grid();

    std::vector<SampledFunction> curves;
    std::vector<int> labels;
    if (unlabeled) {
        curves = load_curves(d);
    } else {
        LabeledDataset data = load_dataset(d);
        curves = data.functions();
        labels = data.labels();
    }
    // Curves read with their own grid declaration must match the model grid exactly.
    if (!curves.empty() && !(*curves.front().grid() == *model.grid()))
        throw Error(ErrorKind::structural, "curve grid (" + std::to_string(curves.front().size())
                                               + " points) does not match the model grid ("
                                               + std::to_string(model.grid()->size()) + " points)");
    std::vector<SampledFunction> rebased;
    rebased.reserve(curves.size());
    for (const auto& u : curves)
        rebased.emplace_back(model.grid(), std::vector<double>(u.values().begin(), u.values().end()));

    const std::vector<double> values = model.decision_values(rebased);
    std::string csv = labels.empty() ? "index,decision,predicted\n" : "index,decision,predicted,label\n";
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const int p = SvmModel::sign_label(values[i]);
        csv += std::to_string(i) + "," + format_double(values[i]) + "," + std::to_string(p);
        if (!labels.empty()) {
            csv += "," + std::to_string(labels[i]);
            wrong += p != labels[i];
        }
        csv += "\n";
    }
    const fs::path out = out_dir;
    write_file_atomic(out / "predictions.csv", csv);
    Json metrics;
    metrics["count"] = values.size();
    if (!labels.empty()) {
        metrics["misclassified"] = wrong;
        metrics["test_error"] = static_cast<double>(wrong) / static_cast<double>(values.size());
        std::cout << "test error " << format_double(metrics["test_error"].get<double>()) << " (" << wrong << "/"
                  << values.size() << ")\n";
    }
    write_file_atomic(out / "metrics.json", metrics.dump(2) + "\n");
    return 0;
}

int run_synth(const SyntheticSpec& spec, std::uint64_t seed, const std::string& out)
{
    spec.validate();
    write_csv(generate_synthetic(spec, seed), out);
    return 0;
}

int run_inspect(const std::string& path)
{
    const std::string bytes = read_file(path);
    if (bytes.rfind("FSVM", 0) == 0) {
        const SvmModel model = deserialize_model(bytes);
        std::cout << "model format " << int(model_format_version) << "\n"
                  << "kernel " << model.kernel().describe() << "\n"
                  << "grid " << model.grid()->size() << " points on [" << format_double(model.grid()->start())
                  << ", " << format_double(model.grid()->end()) << "]\n"
                  << "C " << format_double(model.metadata().C) << ", trained on " << model.metadata().training_size
                  << " curves, seed " << model.metadata().seed << "\n"
                  << "support vectors " << model.support().size() << ", bias " << format_double(model.bias())
                  << "\n";
        return 0;
    }
    // JSON-lines report: pretty-print each line.
    std::size_t start = 0;
    while (start < bytes.size()) {
        std::size_t end = bytes.find('\n', start);
        if (end == std::string::npos)
            end = bytes.size();
        if (end > start) {
            try {
                std::cout << Json::parse(bytes.substr(start, end - start)).dump(2) << "\n";
            } catch (const Json::exception& e) {
                throw Error(ErrorKind::parse, path + ": not a model file or JSON-lines report: " + e.what());
            }
        }
        start = end + 1;
    }
    return 0;
}

void add_common(CLI::App* sub, Common& c, bool with_grid_overrides)
{
    sub->add_option("--config", c.config, "Run configuration (JSON)");
    sub->add_option("--data", c.data, "Dataset path, overriding the configuration");
    sub->add_option("--out", c.out, "Output directory");
    sub->add_option("--seed", c.seed, "Seed for splits and protocols");
    sub->add_option("--threads", c.threads, "Worker threads (default: FSVM_THREADS or the config)");
    if (with_grid_overrides) {
        sub->add_option("--c-grid", c.c_grid, "Comma-separated C values");
        sub->add_option("--sigma-grid", c.sigma_grid, "Comma-separated gaussian sigma values");
        sub->add_option("--d-range", c.d_range, "Projection dimensions: list or from:to");
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Support vector machines on sampled functional data"};
    app.require_subcommand(1);

    Common common;
    auto* train_cmd = app.add_subcommand("train", "Train a model (runs selection when the grid has several candidates)");
    add_common(train_cmd, common, true);
    auto* select_cmd = app.add_subcommand("select", "Penalized split-sample grid search");
    add_common(select_cmd, common, true);
    auto* eval_cmd = app.add_subcommand("evaluate", "Run an evaluation protocol");
    add_common(eval_cmd, common, true);

    std::string model_path, data_path, format = "csv_rows", out = ".";
    bool unlabeled = false;
    auto* predict_cmd = app.add_subcommand("predict", "Apply a saved model to curves");
    predict_cmd->add_option("--model", model_path, "Model file")->required();
    predict_cmd->add_option("--data", data_path, "Curves to classify")->required();
    predict_cmd->add_option("--format", format, "csv_rows, tecator or phoneme");
    predict_cmd->add_flag("--unlabeled", unlabeled, "The file has no label column");
    predict_cmd->add_option("--out", out, "Output directory");

    SyntheticSpec spec;
    std::uint64_t synth_seed = 0;
    std::string synth_out = "synthetic.csv";
    auto* synth_cmd = app.add_subcommand("synth", "Generate the noisy sinusoid benchmark as CSV");
    synth_cmd->add_option("--size", spec.size, "Number of curves");
    synth_cmd->add_option("--grid-length", spec.grid_length, "Sampling points on [0, 1]");
    synth_cmd->add_option("--noise", spec.noise_sigma, "White-noise standard deviation");
    synth_cmd->add_option("--label-noise", spec.label_noise, "Label flip probability");
    synth_cmd->add_option("--freq-pos", spec.frequency_positive, "Frequency of class +1");
    synth_cmd->add_option("--freq-neg", spec.frequency_negative, "Frequency of class -1");
    synth_cmd->add_option("--amplitude", spec.amplitude, "Sinusoid amplitude");
    synth_cmd->add_option("--seed", synth_seed, "Random seed");
    synth_cmd->add_option("--out", synth_out, "Output CSV file");

    std::string inspect_path;
    auto* inspect_cmd = app.add_subcommand("inspect", "Pretty-print a model file or report");
    inspect_cmd->add_option("path", inspect_path, "Model or JSON-lines report")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return report_error("usage", 1, e.what());
    }

    try {
        if (*train_cmd)
            return run_train(common);
        if (*select_cmd)
            return run_select(common, true, "select");
        if (*eval_cmd)
            return run_evaluate(common);
        if (*predict_cmd)
            return run_predict(model_path, data_path, format, unlabeled, out);
        if (*synth_cmd)
            return run_synth(spec, synth_seed, synth_out);
        if (*inspect_cmd)
            return run_inspect(inspect_path);
    } catch (const Error& e) {
        return report_error(to_string(e.kind()), exit_code(e.kind()), e.what(), e.index());
    } catch (const fs::filesystem_error& e) {
        return report_error("data", 2, e.what());
    } catch (const std::exception& e) {
        return report_error("internal", 2, e.what());
    }
    return 1;
}
