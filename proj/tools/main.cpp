// structboost command line: train/predict/eval plus the synthetic data
// generators and the 1-slack vs m-slack AUC benchmark harness.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "structboost/structboost.hpp"

namespace {

using namespace structboost;

constexpr int kExitInvalidInput = 2;
constexpr int kExitConvergence = 3;
constexpr int kExitCapacity = 4;

struct DataBundle {
    Dataset tabular;
    SegDataset seg;
    std::optional<Taxonomy> taxonomy;
};

Dataset to_class_dataset(const RawDataset& raw, int dim) {
    Dataset data;
    data.features = raw.dense(dim);
    for (double label : raw.labels) {
        int c = static_cast<int>(label);
        if (c != label || c < 1)
            throw InvalidInputError("class labels must be integers starting at 1");
        data.labels.emplace_back(ClassLabel{c});
    }
    return data;
}

Dataset to_binary_dataset(const RawDataset& raw, int dim) {
    Dataset data;
    data.features = raw.dense(dim);
    for (double label : raw.labels) data.labels.emplace_back(ClassLabel{label > 0.0 ? 1 : 2});
    return data;
}

Dataset to_ordinal_dataset(const RawDataset& raw, int dim) {
    Dataset data;
    data.features = raw.dense(dim);
    for (double label : raw.labels) data.labels.emplace_back(OrdinalRank{label});
    return data;
}

DataBundle load_for_task(TaskKind kind, const std::string& data_path,
                         const std::string& taxonomy_path) {
    DataBundle out;
    if (kind == TaskKind::crf) {
        out.seg = load_seg_dataset(data_path);
        return out;
    }
    RawDataset raw = parse_libsvm(data_path);
    if (raw.size() == 0) throw InvalidInputError("dataset is empty: " + data_path);
    switch (kind) {
        case TaskKind::binary:
            out.tabular = to_binary_dataset(raw, 0);
            break;
        case TaskKind::ranking:
            out.tabular = to_ordinal_dataset(raw, 0);
            break;
        case TaskKind::multiclass:
            out.tabular = to_class_dataset(raw, 0);
            break;
        case TaskKind::tree:
            if (taxonomy_path.empty())
                throw InvalidInputError("--taxonomy is required for the tree task");
            out.taxonomy = load_taxonomy(taxonomy_path);
            out.tabular = to_class_dataset(raw, 0);
            break;
        default:
            throw InvalidInputError("unsupported task");
    }
    return out;
}

std::unique_ptr<Task> make_task(TaskKind kind, const DataBundle& bundle, int num_classes) {
    switch (kind) {
        case TaskKind::binary:
            return std::make_unique<BinaryTask>(bundle.tabular);
        case TaskKind::multiclass:
            return std::make_unique<MulticlassTask>(bundle.tabular, num_classes, std::nullopt);
        case TaskKind::tree:
            return std::make_unique<MulticlassTask>(bundle.tabular, num_classes, bundle.taxonomy);
        case TaskKind::ranking:
            return std::make_unique<RankingTask>(RankingTask::from_labels(bundle.tabular));
        case TaskKind::crf:
            return std::make_unique<CrfTask>(bundle.seg);
    }
    throw InvalidInputError("unsupported task");
}

std::vector<double> parse_grid(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(std::stod(tok));
    }
    if (out.empty()) throw InvalidInputError("empty numeric grid: " + csv);
    return out;
}

int run_train(const std::string& task_name, const std::string& data_path,
              const std::string& taxonomy_path, const TrainParams& params,
              const std::string& out_path, const std::string& trace_path,
              const std::string& cp_log_path, const std::string& dump_lp_path) {
    TaskKind kind = detail::task_kind_from(task_name);
    DataBundle bundle = load_for_task(kind, data_path, taxonomy_path);
    int num_classes = 0;
    if (kind == TaskKind::multiclass) {
        for (const auto& y : bundle.tabular.labels)
            num_classes = std::max(num_classes, class_of(y));
        num_classes = std::max(num_classes, 2);
    } else if (kind == TaskKind::tree) {
        num_classes = bundle.taxonomy->num_classes();
    }
    auto task = make_task(kind, bundle, num_classes);

    std::ofstream cp_log;
    TrainHooks hooks;
    if (!cp_log_path.empty()) {
        cp_log.open(cp_log_path, std::ios::binary);
        if (!cp_log) throw InvalidInputError("cannot open cutting-plane log: " + cp_log_path);
        hooks.cp_log = &cp_log;
    }

    TrainResult res = train(*task, params, hooks);
    save_model(res.model, out_path);

    if (!trace_path.empty()) {
        std::ofstream trace(trace_path, std::ios::binary);
        if (!trace) throw InvalidInputError("cannot open trace file: " + trace_path);
        res.trace.write_csv(trace);
    }
    if (!dump_lp_path.empty()) {
        std::ofstream dump(dump_lp_path, std::ios::binary);
        if (!dump) throw InvalidInputError("cannot open LP dump file: " + dump_lp_path);
        if (params.solver == SolverKind::m_slack) {
            auto built = build_primal_lp(*task, res.model.columns, params.C);
            lp::dump(built.prog, dump);
        } else {
            lp::dump(build_restricted_lp(*task, res.model.size(), res.working_set, params.C),
                     dump);
        }
    }

    std::cout << "trained " << res.model.size() << " columns in "
              << res.model.metadata.iterations_run << " iterations\n";
    return 0;
}

int run_predict(const std::string& model_path, const std::string& data_path,
                const std::string& out_path) {
    StrongModel model = load_model(model_path);
    std::ostringstream out;
    if (model.task.kind == TaskKind::crf) {
        SegDataset seg = load_seg_dataset(data_path);
        for (const auto& inst : seg) {
            GridLabeling y = predict_labels(inst, model);
            for (auto v : y) out << (v ? '1' : '0');
            out << '\n';
        }
    } else {
        RawDataset raw = parse_libsvm(data_path);
        Matrix x = raw.dense(model.task.feature_dim);
        for (int i = 0; i < x.rows(); ++i) {
            StructuredLabel y = predict_sample(model, x.row(i));
            if (model.task.kind == TaskKind::ranking)
                out << format_double(std::get<OrdinalRank>(y).value) << '\n';
            else if (model.task.kind == TaskKind::binary)
                out << (class_of(y) == 1 ? "+1" : "-1") << '\n';
            else
                out << class_of(y) << '\n';
        }
    }
    if (out_path.empty()) {
        std::cout << out.str();
    } else {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) throw InvalidInputError("cannot open output: " + out_path);
        f << out.str();
    }
    return 0;
}

int run_eval(const std::string& model_path, const std::string& data_path,
             const std::string& out_path) {
    StrongModel model = load_model(model_path);
    MetricsRecord rec;
    if (model.task.kind == TaskKind::crf) {
        rec = eval_crf(model, load_seg_dataset(data_path));
    } else {
        RawDataset raw = parse_libsvm(data_path);
        if (model.task.kind == TaskKind::ranking)
            rec = eval_ranking(model, to_ordinal_dataset(raw, model.task.feature_dim));
        else if (model.task.kind == TaskKind::binary)
            rec = eval_classification(model, to_binary_dataset(raw, model.task.feature_dim));
        else
            rec = eval_classification(model, to_class_dataset(raw, model.task.feature_dim));
    }
    if (out_path.empty()) {
        rec.write_csv(std::cout);
    } else {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) throw InvalidInputError("cannot open output: " + out_path);
        rec.write_csv(f);
    }
    return 0;
}

int run_bench(const std::string& data_path, const std::string& c_grid_csv,
              const std::string& split_csv, const TrainParams& base,
              const std::string& out_path, const std::string& trace_prefix) {
    RawDataset raw = parse_libsvm(data_path);
    Dataset all = to_ordinal_dataset(raw, 0);
    auto fractions = parse_grid(split_csv);
    if (fractions.size() != 3) throw InvalidInputError("--split needs three fractions");
    auto idx = split_dataset(all.size(), fractions[0], fractions[1], fractions[2], base.seed);
    Dataset train_data = subset(all, idx.train);
    // the harness reports both solvers on every C instead of selecting one,
    // so validation and test merge into the held-out evaluation set
    std::vector<int> eval_idx = idx.val;
    eval_idx.insert(eval_idx.end(), idx.test.begin(), idx.test.end());
    Dataset test_data = subset(all, eval_idx);

    BenchReport report = bench_auc(train_data, test_data, parse_grid(c_grid_csv), base);
    if (out_path.empty()) {
        report.write_csv(std::cout);
    } else {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) throw InvalidInputError("cannot open output: " + out_path);
        report.write_csv(f);
    }
    if (!trace_prefix.empty()) {
        std::ofstream one(trace_prefix + "one_slack.csv", std::ios::binary);
        write_trace_csv(report.trace_one_slack, one);
        std::ofstream ms(trace_prefix + "m_slack.csv", std::ios::binary);
        write_trace_csv(report.trace_m_slack, ms);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"structured-output boosting toolkit"};
    app.require_subcommand(1);

    TrainParams params;
    std::string task_name = "multiclass", data_path, taxonomy_path, out_path, trace_path;
    std::string cp_log_path, dump_lp_path, model_path;
    std::string solver_name = "one-slack", weak_name = "stump";

    auto add_param_flags = [&](CLI::App* cmd) {
        cmd->add_option("--c", params.C, "regularization trade-off");
        cmd->add_option("--iters", params.max_iters, "maximum boosting iterations");
        cmd->add_option("--eps-cg", params.eps_cg, "column-generation stopping precision");
        cmd->add_option("--eps-cp", params.eps_cp, "cutting-plane stopping precision");
        cmd->add_option("--seed", params.seed, "random seed");
    };

    auto* train_cmd = app.add_subcommand("train", "train a model");
    train_cmd->add_option("--task", task_name, "binary|multiclass|tree|ranking|crf")->required();
    train_cmd->add_option("--data", data_path, "dataset path")->required();
    train_cmd->add_option("--taxonomy", taxonomy_path, "taxonomy file (tree task)");
    add_param_flags(train_cmd);
    train_cmd->add_option("--weak", weak_name, "stump|perceptron");
    train_cmd->add_option("--solver", solver_name, "one-slack|m-slack");
    train_cmd->add_option("--out", out_path, "model output path")->required();
    train_cmd->add_option("--trace", trace_path, "training trace CSV");
    train_cmd->add_option("--cp-log", cp_log_path, "cutting-plane round log CSV");
    train_cmd->add_option("--dump-lp", dump_lp_path, "dump the final master LP as text");

    auto* predict_cmd = app.add_subcommand("predict", "predict labels");
    predict_cmd->add_option("--model", model_path, "model path")->required();
    predict_cmd->add_option("--data", data_path, "dataset path")->required();
    predict_cmd->add_option("--out", out_path, "predictions output (default stdout)");

    auto* eval_cmd = app.add_subcommand("eval", "evaluate a model");
    eval_cmd->add_option("--model", model_path, "model path")->required();
    eval_cmd->add_option("--data", data_path, "dataset path")->required();
    eval_cmd->add_option("--out", out_path, "metrics CSV output (default stdout)");

    std::string c_grid = "10,100,1000", split_csv = "0.5,0.25,0.25", trace_prefix;
    auto* bench_cmd = app.add_subcommand("bench-auc", "compare 1-slack and m-slack on AUC");
    bench_cmd->add_option("--data", data_path, "ordinal/binary dataset path")->required();
    bench_cmd->add_option("--c-grid", c_grid, "comma-separated C values");
    bench_cmd->add_option("--split", split_csv, "train,val,test fractions");
    add_param_flags(bench_cmd);
    bench_cmd->add_option("--out", out_path, "report CSV output (default stdout)");
    bench_cmd->add_option("--trace-prefix", trace_prefix, "per-iteration trace CSV prefix");

    std::string synth_kind = "gaussians", tax_out;
    int samples = 200, classes = 3, dim = 4, width = 8, height = 8, instances = 10;
    int positives = 50, negatives = 150;
    double noise = 0.5;
    auto* synth_cmd = app.add_subcommand("synth", "generate synthetic datasets");
    synth_cmd->add_option("--kind", synth_kind, "gaussians|taxonomy|ranking|crf")->required();
    synth_cmd->add_option("--out", out_path, "output path")->required();
    synth_cmd->add_option("--samples", samples, "sample count");
    synth_cmd->add_option("--classes", classes, "class count (gaussians)");
    synth_cmd->add_option("--dim", dim, "feature dimension");
    synth_cmd->add_option("--noise", noise, "noise level");
    synth_cmd->add_option("--seed", params.seed, "random seed");
    synth_cmd->add_option("--width", width, "grid width (crf)");
    synth_cmd->add_option("--height", height, "grid height (crf)");
    synth_cmd->add_option("--instances", instances, "instance count (crf)");
    synth_cmd->add_option("--positives", positives, "positive count (ranking)");
    synth_cmd->add_option("--negatives", negatives, "negative count (ranking)");
    synth_cmd->add_option("--tax-out", tax_out, "taxonomy output path (taxonomy kind)");

    // the cutting-plane default tightens for the benchmark harness
    bench_cmd->parse_complete_callback([&] {
        if (bench_cmd->count("--eps-cp") == 0) params.eps_cp = 0.001;
    });

    CLI11_PARSE(app, argc, argv);

    try {
        if (solver_name != "one-slack" && solver_name != "m-slack")
            throw InvalidInputError("unknown solver: " + solver_name);
        if (weak_name != "stump" && weak_name != "perceptron")
            throw InvalidInputError("unknown weak learner: " + weak_name);
        params.solver =
            solver_name == "one-slack" ? SolverKind::one_slack : SolverKind::m_slack;
        params.weak = weak_name == "stump" ? WeakKind::stump : WeakKind::perceptron;

        if (train_cmd->parsed())
            return run_train(task_name, data_path, taxonomy_path, params, out_path, trace_path,
                             cp_log_path, dump_lp_path);
        if (predict_cmd->parsed()) return run_predict(model_path, data_path, out_path);
        if (eval_cmd->parsed()) return run_eval(model_path, data_path, out_path);
        if (bench_cmd->parsed())
            return run_bench(data_path, c_grid, split_csv, params, out_path, trace_prefix);
        if (synth_cmd->parsed()) {
            if (synth_kind == "gaussians") {
                Dataset d = synth_gaussians(samples, classes, dim, noise, params.seed);
                std::vector<double> labels;
                for (const auto& y : d.labels) labels.push_back(class_of(y));
                std::ofstream f(out_path, std::ios::binary);
                if (!f) throw InvalidInputError("cannot open output: " + out_path);
                f << write_libsvm_text(d.features, labels);
            } else if (synth_kind == "taxonomy") {
                auto ts = synth_taxonomy_data(samples, noise, params.seed);
                std::vector<double> labels;
                for (const auto& y : ts.data.labels) labels.push_back(class_of(y));
                std::ofstream f(out_path, std::ios::binary);
                if (!f) throw InvalidInputError("cannot open output: " + out_path);
                f << write_libsvm_text(ts.data.features, labels);
                if (!tax_out.empty()) {
                    std::ofstream tf(tax_out, std::ios::binary);
                    if (!tf) throw InvalidInputError("cannot open output: " + tax_out);
                    tf << write_taxonomy_text(ts.taxonomy);
                }
            } else if (synth_kind == "ranking") {
                Dataset d =
                    synth_imbalanced_binary(positives, negatives, dim, noise, params.seed);
                std::vector<double> labels;
                for (const auto& y : d.labels)
                    labels.push_back(std::get<OrdinalRank>(y).value);
                std::ofstream f(out_path, std::ios::binary);
                if (!f) throw InvalidInputError("cannot open output: " + out_path);
                f << write_libsvm_text(d.features, labels);
            } else if (synth_kind == "crf") {
                save_seg_dataset(
                    synth_seg_dataset(instances, width, height, noise, params.seed), out_path);
            } else {
                throw InvalidInputError("unknown synth kind: " + synth_kind);
            }
            return 0;
        }
    } catch (const CapacityError& e) {
        std::cerr << "capacity error: " << e.what() << "\n";
        return kExitCapacity;
    } catch (const ConvergenceError& e) {
        std::cerr << "convergence failure: " << e.what() << " (last gap " << e.last_gap()
                  << ")\n";
        return kExitConvergence;
    } catch (const SolverFailure& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return kExitConvergence;
    } catch (const InvalidInputError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return kExitInvalidInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInvalidInput;
    }
    return 0;
}
