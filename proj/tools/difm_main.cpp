#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "difm/data_model.hpp"
#include "difm/explain.hpp"
#include "difm/kvconfig.hpp"
#include "difm/metrics.hpp"
#include "difm/model.hpp"
#include "difm/synth.hpp"
#include "difm/train.hpp"

namespace fs = std::filesystem;
using namespace difm;

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void override_str(KvConfig& cfg, const std::string& key, const std::optional<std::string>& v) {
    if (v) cfg.set(key, *v);
}
void override_int(KvConfig& cfg, const std::string& key, const std::optional<int64_t>& v) {
    if (v) cfg.set(key, std::to_string(*v));
}
void override_dbl(KvConfig& cfg, const std::string& key, const std::optional<double>& v) {
    if (v) cfg.set(key, fmt_double(*v));
}

KvConfig base_config(const std::optional<std::string>& config_path) {
    return config_path ? KvConfig::parse_file(*config_path) : KvConfig{};
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open file for writing: " + path);
    out << text;
    if (!out) throw DataError("failed writing file: " + path);
}

std::vector<int> parse_hidden(const std::string& s) {
    std::vector<int> dims;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            dims.push_back(std::stoi(item));
        } catch (const std::exception&) {
            throw ConfigError("bad hidden layer list: " + s);
        }
    }
    return dims;
}

Activation parse_activation(const std::string& s) {
    if (s == "relu") return Activation::relu;
    if (s == "linear") return Activation::linear;
    throw ConfigError("unknown activation: " + s + " (expected relu|linear)");
}

// ---- gen-data ----

struct GenArgs {
    std::optional<std::string> config, out, manifest;
    std::optional<int64_t> seed, users, fields, vocab, noise_fields, min_events, max_events, pairs;
    std::optional<double> fraud_rate, variation, interaction, contamination;
};

int cmd_gen_data(const GenArgs& a) {
    KvConfig cfg = base_config(a.config);
    override_int(cfg, "gen.seed", a.seed);
    override_int(cfg, "gen.users", a.users);
    override_dbl(cfg, "gen.fraud_rate", a.fraud_rate);
    override_int(cfg, "gen.fields", a.fields);
    override_int(cfg, "gen.vocab", a.vocab);
    override_int(cfg, "gen.noise_fields", a.noise_fields);
    override_int(cfg, "gen.min_events", a.min_events);
    override_int(cfg, "gen.max_events", a.max_events);
    override_dbl(cfg, "gen.variation_strength", a.variation);
    override_dbl(cfg, "gen.interaction_strength", a.interaction);
    override_dbl(cfg, "gen.contamination", a.contamination);
    override_int(cfg, "gen.pairs", a.pairs);
    override_str(cfg, "out.data", a.out);
    override_str(cfg, "out.manifest", a.manifest);

    if (!cfg.has("gen.seed")) throw ConfigError("gen.seed is required (no implicit nondeterminism)");
    std::string data_path = cfg.get_string("out.data");

    GeneratorConfig gen;
    gen.seed = cfg.get_uint("gen.seed");
    gen.n_users = static_cast<int>(cfg.get_int("gen.users", gen.n_users));
    gen.fraud_rate = cfg.get_double("gen.fraud_rate", gen.fraud_rate);
    gen.n_fields = static_cast<int>(cfg.get_int("gen.fields", gen.n_fields));
    gen.vocab_size = static_cast<int>(cfg.get_int("gen.vocab", gen.vocab_size));
    gen.noise_fields = static_cast<int>(cfg.get_int("gen.noise_fields", gen.noise_fields));
    gen.min_events = static_cast<int>(cfg.get_int("gen.min_events", gen.min_events));
    gen.max_events = static_cast<int>(cfg.get_int("gen.max_events", gen.max_events));
    gen.variation_strength = cfg.get_double("gen.variation_strength", gen.variation_strength);
    gen.interaction_strength = cfg.get_double("gen.interaction_strength", gen.interaction_strength);
    gen.contamination = cfg.get_double("gen.contamination", gen.contamination);
    gen.n_pairs = static_cast<int>(cfg.get_int("gen.pairs", gen.n_pairs));
    gen.with_amount = cfg.get_bool("gen.amount", gen.with_amount);

    std::string manifest_path = cfg.get_string("out.manifest", data_path + ".manifest.json");
    cfg.set("out.manifest", manifest_path);

    generate(gen, data_path, manifest_path);
    write_text_file(data_path + ".config", cfg.serialize());
    std::cout << to_string(describe(data_path)) << "\n";
    return 0;
}

// ---- train ----

struct TrainArgs {
    std::optional<std::string> config, data, val, dict, out_dir, variant, hidden, im_act, mlp_act;
    std::optional<int64_t> k, max_events, min_count, batch, epochs, patience, seed;
    std::optional<double> val_frac, dropout, lr, l2, val_max_fpr;
};

int cmd_train(const TrainArgs& a) {
    KvConfig cfg = base_config(a.config);
    override_str(cfg, "data.train", a.data);
    override_str(cfg, "data.val", a.val);
    override_dbl(cfg, "data.val_frac", a.val_frac);
    override_str(cfg, "dict.path", a.dict);
    override_int(cfg, "dict.min_count", a.min_count);
    override_str(cfg, "out.dir", a.out_dir);
    override_int(cfg, "model.k", a.k);
    override_int(cfg, "model.max_events", a.max_events);
    override_str(cfg, "model.variant", a.variant);
    override_str(cfg, "model.hidden", a.hidden);
    override_dbl(cfg, "model.dropout", a.dropout);
    override_str(cfg, "model.im_activation", a.im_act);
    override_str(cfg, "model.mlp_activation", a.mlp_act);
    override_int(cfg, "train.batch_size", a.batch);
    override_dbl(cfg, "train.lr", a.lr);
    override_dbl(cfg, "train.l2", a.l2);
    override_int(cfg, "train.max_epochs", a.epochs);
    override_int(cfg, "train.patience", a.patience);
    override_int(cfg, "train.seed", a.seed);
    override_dbl(cfg, "train.val_max_fpr", a.val_max_fpr);

    if (!cfg.has("train.seed")) throw ConfigError("train.seed is required (no implicit nondeterminism)");
    std::string data_path = cfg.get_string("data.train");
    std::string out_dir = cfg.get_string("out.dir");
    fs::create_directories(out_dir);

    uint64_t seed = cfg.get_uint("train.seed");

    std::vector<RawRecord> train_raw = load_dataset(data_path);
    std::vector<RawRecord> val_raw;
    if (cfg.has("data.val")) {
        val_raw = load_dataset(cfg.get_string("data.val"));
    } else {
        double frac = cfg.get_double("data.val_frac", 0.2);
        if (!(frac > 0.0 && frac < 1.0)) throw ConfigError("data.val_frac must be in (0, 1)");
        cfg.set("data.val_frac", fmt_double(frac));
        Rng split_rng(derive_seed(seed, 0x5b11));
        std::vector<size_t> order(train_raw.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        split_rng.shuffle(order);
        size_t n_val = static_cast<size_t>(frac * static_cast<double>(train_raw.size()));
        if (n_val == 0 || n_val >= train_raw.size()) throw ConfigError("validation split would be empty");
        std::vector<RawRecord> tr, va;
        for (size_t i = 0; i < order.size(); ++i)
            (i < n_val ? va : tr).push_back(std::move(train_raw[order[i]]));
        train_raw = std::move(tr);
        val_raw = std::move(va);
    }

    std::string dict_path = cfg.get_string("dict.path", out_dir + "/dict.json");
    cfg.set("dict.path", dict_path);
    FieldValueDictionary dict;
    if (fs::exists(dict_path)) {
        dict = FieldValueDictionary::load(dict_path);
    } else {
        int min_count = static_cast<int>(cfg.get_int("dict.min_count", 1));
        dict = build_dictionary(train_raw, infer_schema(train_raw), min_count);
        dict.save(dict_path);
    }
    IndexLayout layout = IndexLayout::from_dictionary(dict);

    ModelConfig mcfg;
    mcfg.k = static_cast<int>(cfg.get_int("model.k", 64));
    mcfg.max_events = static_cast<int>(cfg.get_int("model.max_events", 20));
    mcfg.n_fields = dict.field_count();
    mcfg.variant = variant_from_string(cfg.get_string("model.variant", "full"));
    mcfg.mlp_hidden = parse_hidden(cfg.get_string("model.hidden", "64"));
    mcfg.dropout = cfg.get_double("model.dropout", 0.2);
    mcfg.im_activation = parse_activation(cfg.get_string("model.im_activation", "relu"));
    mcfg.mlp_activation = parse_activation(cfg.get_string("model.mlp_activation", "relu"));

    TrainConfig tcfg;
    tcfg.batch_size = static_cast<int>(cfg.get_int("train.batch_size", 256));
    tcfg.learning_rate = cfg.get_double("train.lr", 0.0005);
    tcfg.l2 = cfg.get_double("train.l2", 1e-6);
    tcfg.max_epochs = static_cast<int>(cfg.get_int("train.max_epochs", 50));
    tcfg.patience = static_cast<int>(cfg.get_int("train.patience", 5));
    tcfg.seed = seed;
    tcfg.val_max_fpr = cfg.get_double("train.val_max_fpr", 0.01);

    // echo every resolved value so the run can be replayed from this file
    cfg.set("model.k", std::to_string(mcfg.k));
    cfg.set("model.max_events", std::to_string(mcfg.max_events));
    cfg.set("model.variant", to_string(mcfg.variant));
    cfg.set("model.hidden", cfg.get_string("model.hidden", "64"));
    cfg.set("model.dropout", fmt_double(mcfg.dropout));
    cfg.set("model.im_activation", cfg.get_string("model.im_activation", "relu"));
    cfg.set("model.mlp_activation", cfg.get_string("model.mlp_activation", "relu"));
    cfg.set("train.batch_size", std::to_string(tcfg.batch_size));
    cfg.set("train.lr", fmt_double(tcfg.learning_rate));
    cfg.set("train.l2", fmt_double(tcfg.l2));
    cfg.set("train.max_epochs", std::to_string(tcfg.max_epochs));
    cfg.set("train.patience", std::to_string(tcfg.patience));
    cfg.set("train.val_max_fpr", fmt_double(tcfg.val_max_fpr));
    cfg.set("dict.min_count", std::to_string(cfg.get_int("dict.min_count", 1)));
    write_text_file(out_dir + "/resolved.config", cfg.serialize());

    std::vector<EventSequence> train_set, val_set;
    train_set.reserve(train_raw.size());
    for (const auto& r : train_raw) train_set.push_back(encode_sample(r, dict, mcfg.max_events));
    val_set.reserve(val_raw.size());
    for (const auto& r : val_raw) val_set.push_back(encode_sample(r, dict, mcfg.max_events));

    std::ofstream log(out_dir + "/train.log");
    if (!log) throw DataError("cannot open training log for writing");
    TrainResult result = train(train_set, val_set, mcfg, tcfg, layout, &log);

    ModelFile model;
    model.config = mcfg;
    model.dict_hash = dict.hash();
    model.seed = seed;
    model.params = std::move(result.best_params);
    save_model(out_dir + "/model.bin", model);

    std::string metrics;
    metrics += "epochs_run = " + std::to_string(result.history.size()) + "\n";
    metrics += "best_epoch = " + std::to_string(result.best_epoch) + "\n";
    metrics += "best_val_pauc = " + fmt_double(result.best_metric) + "\n";
    metrics += "val_max_fpr = " + fmt_double(tcfg.val_max_fpr) + "\n";
    write_text_file(out_dir + "/metrics.txt", metrics);

    std::cout << "trained variant=" << to_string(mcfg.variant) << " epochs=" << result.history.size()
              << " best_epoch=" << result.best_epoch << " best_val_pauc=" << fmt_double(result.best_metric) << "\n";
    return 0;
}

// ---- shared scoring for eval/predict ----

struct Scored {
    std::vector<double> scores;
    std::vector<int> labels;
    std::vector<std::string> user_ids;
};

Scored score_file(const std::string& data_path, const ModelFile& model, const FieldValueDictionary& dict,
                  const IndexLayout& layout) {
    Scored out;
    for_each_record(data_path, [&](const RawRecord& rec) {
        EventSequence enc = encode_sample(rec, dict, model.config.max_events);
        ForwardTrace tr = forward(enc, model.params, model.config, layout, Mode::eval);
        out.scores.push_back(tr.y_hat);
        out.labels.push_back(rec.label);
        out.user_ids.push_back(rec.user_id);
    });
    return out;
}

// ---- eval ----

struct EvalArgs {
    std::optional<std::string> config, data, dict, out;
    std::vector<std::string> models;
    std::optional<double> max_fpr;
};

int cmd_eval(const EvalArgs& a) {
    KvConfig cfg = base_config(a.config);
    override_str(cfg, "eval.data", a.data);
    override_str(cfg, "eval.dict", a.dict);
    override_dbl(cfg, "eval.max_fpr", a.max_fpr);
    override_str(cfg, "out.metrics", a.out);
    if (!a.models.empty()) {
        std::string joined;
        for (const auto& m : a.models) joined += (joined.empty() ? "" : ",") + m;
        cfg.set("eval.models", joined);
    }

    std::string data_path = cfg.get_string("eval.data");
    FieldValueDictionary dict = FieldValueDictionary::load(cfg.get_string("eval.dict"));
    IndexLayout layout = IndexLayout::from_dictionary(dict);
    double max_fpr = cfg.get_double("eval.max_fpr", 0.01);

    std::vector<std::string> model_paths;
    {
        std::stringstream ss(cfg.get_string("eval.models"));
        std::string item;
        while (std::getline(ss, item, ','))
            if (!item.empty()) model_paths.push_back(item);
    }
    if (model_paths.empty()) throw ConfigError("eval needs at least one model");

    std::string pauc_key = "pauc_at_" + std::string(fmt_double(max_fpr));
    std::string text;
    std::vector<double> paucs;
    for (size_t i = 0; i < model_paths.size(); ++i) {
        ModelFile model = load_model_checked(model_paths[i], dict);
        Scored s = score_file(data_path, model, dict, layout);
        MetricReport rep = partial_auc(s.scores, s.labels, max_fpr);
        paucs.push_back(rep.partial_auc_standardized);
        std::string prefix = model_paths.size() > 1 ? "run" + std::to_string(i) + "." : "";
        if (i == 0) {
            text += "n_pos = " + std::to_string(rep.n_pos) + "\n";
            text += "n_neg = " + std::to_string(rep.n_neg) + "\n";
            text += "max_fpr = " + fmt_double(max_fpr) + "\n";
        }
        text += prefix + "auc = " + fmt_double(rep.auc) + "\n";
        text += prefix + pauc_key + " = " + fmt_double(rep.partial_auc_standardized) + "\n";
    }
    if (model_paths.size() > 1) {
        CiReport ci = confidence_interval(paucs);
        text += "runs = " + std::to_string(ci.n) + "\n";
        text += "mean = " + fmt_double(ci.mean) + "\n";
        text += "ci95 = " + fmt_double(ci.half_width) + "\n";
        text += "summary = " + format_ci(ci) + "\n";
    }

    std::cout << text;
    if (cfg.has("out.metrics")) write_text_file(cfg.get_string("out.metrics"), text);
    return 0;
}

// ---- predict ----

struct PredictArgs {
    std::optional<std::string> config, model, data, dict, out;
};

int cmd_predict(const PredictArgs& a) {
    KvConfig cfg = base_config(a.config);
    override_str(cfg, "predict.model", a.model);
    override_str(cfg, "predict.data", a.data);
    override_str(cfg, "predict.dict", a.dict);
    override_str(cfg, "out.scores", a.out);

    FieldValueDictionary dict = FieldValueDictionary::load(cfg.get_string("predict.dict"));
    IndexLayout layout = IndexLayout::from_dictionary(dict);
    ModelFile model = load_model_checked(cfg.get_string("predict.model"), dict);

    std::ostream* out = &std::cout;
    std::ofstream file;
    if (cfg.has("out.scores")) {
        file.open(cfg.get_string("out.scores"));
        if (!file) throw DataError("cannot open score file for writing");
        out = &file;
    }
    // streaming: one record in memory at a time
    for_each_record(cfg.get_string("predict.data"), [&](const RawRecord& rec) {
        EventSequence enc = encode_sample(rec, dict, model.config.max_events);
        ForwardTrace tr = forward(enc, model.params, model.config, layout, Mode::eval);
        (*out) << rec.user_id << "\t" << fmt_double(tr.y_hat) << "\n";
    });
    return 0;
}

// ---- explain ----

struct ExplainArgs {
    std::optional<std::string> config, model, data, dict, out, sample;
    std::optional<int64_t> top_k, min_support;
};

int cmd_explain(const ExplainArgs& a) {
    KvConfig cfg = base_config(a.config);
    override_str(cfg, "explain.model", a.model);
    override_str(cfg, "explain.data", a.data);
    override_str(cfg, "explain.dict", a.dict);
    override_int(cfg, "explain.top_k", a.top_k);
    override_int(cfg, "explain.min_support", a.min_support);
    override_str(cfg, "explain.sample", a.sample);
    override_str(cfg, "out.report", a.out);

    FieldValueDictionary dict = FieldValueDictionary::load(cfg.get_string("explain.dict"));
    IndexLayout layout = IndexLayout::from_dictionary(dict);
    ModelFile model = load_model_checked(cfg.get_string("explain.model"), dict);
    std::vector<RawRecord> dataset = load_dataset(cfg.get_string("explain.data"));

    std::ostringstream report;
    GlobalReport global = rank_wide_weights(model.params, dict, static_cast<int>(cfg.get_int("explain.top_k", 4)),
                                            cfg.get_int("explain.min_support", 1), dataset);
    write_report(report, global);

    if (cfg.has("explain.sample")) {
        std::string uid = cfg.get_string("explain.sample");
        const RawRecord* found = nullptr;
        for (const auto& r : dataset)
            if (r.user_id == uid) found = &r;
        if (!found) throw DataError("unknown user_id: " + uid);
        EventSequence enc = encode_sample(*found, dict, model.config.max_events);
        write_report(report, sample_importance(enc, model.params, model.config, layout, dict));
    }

    std::cout << report.str();
    if (cfg.has("out.report")) write_text_file(cfg.get_string("out.report"), report.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DIFM: dual importance-aware factorization machines for transaction fraud detection"};
    app.require_subcommand(1);

    GenArgs gen;
    auto* sub_gen = app.add_subcommand("gen-data", "Generate a synthetic labeled event-sequence dataset");
    sub_gen->add_option("--config", gen.config, "key=value config file");
    sub_gen->add_option("--out", gen.out, "output dataset file (JSON lines)");
    sub_gen->add_option("--manifest", gen.manifest, "planted-signal manifest path");
    sub_gen->add_option("--seed", gen.seed, "generator seed (required here or in the config)");
    sub_gen->add_option("--users", gen.users, "number of users");
    sub_gen->add_option("--fraud-rate", gen.fraud_rate, "fraction of fraud users");
    sub_gen->add_option("--fields", gen.fields, "signal field count (2 pair hosts + stable fields)");
    sub_gen->add_option("--vocab", gen.vocab, "tokens per categorical field");
    sub_gen->add_option("--noise-fields", gen.noise_fields, "label-independent noise fields");
    sub_gen->add_option("--min-events", gen.min_events, "events per user, lower bound");
    sub_gen->add_option("--max-events", gen.max_events, "events per user, upper bound");
    sub_gen->add_option("--variation-strength", gen.variation, "stable-field churn signal in [0,1]");
    sub_gen->add_option("--interaction-strength", gen.interaction, "high-risk pair signal in [0,1]");
    sub_gen->add_option("--contamination", gen.contamination, "baseline signal rate for all users");
    sub_gen->add_option("--pairs", gen.pairs, "number of planted high-risk pairs");

    TrainArgs tr;
    auto* sub_train = app.add_subcommand("train", "Train a DIFM model");
    sub_train->add_option("--config", tr.config, "key=value config file");
    sub_train->add_option("--data", tr.data, "training dataset (JSON lines)");
    sub_train->add_option("--val", tr.val, "validation dataset; omit to split from --data");
    sub_train->add_option("--val-frac", tr.val_frac, "validation fraction when splitting");
    sub_train->add_option("--dict", tr.dict, "dictionary file; built from the train split if absent");
    sub_train->add_option("--min-count", tr.min_count, "dictionary token frequency threshold");
    sub_train->add_option("--out", tr.out_dir, "output run directory");
    sub_train->add_option("--k", tr.k, "embedding dimension");
    sub_train->add_option("--max-events", tr.max_events, "sequence window T");
    sub_train->add_option("--variant", tr.variant, "full|same|alpha|beta");
    sub_train->add_option("--hidden", tr.hidden, "MLP hidden dims, comma separated");
    sub_train->add_option("--dropout", tr.dropout, "dropout rate in [0,1)");
    sub_train->add_option("--im-activation", tr.im_act, "importance net activation: relu|linear");
    sub_train->add_option("--mlp-activation", tr.mlp_act, "MLP activation: relu|linear");
    sub_train->add_option("--batch", tr.batch, "mini-batch size");
    sub_train->add_option("--lr", tr.lr, "learning rate");
    sub_train->add_option("--l2", tr.l2, "L2 weight penalty");
    sub_train->add_option("--epochs", tr.epochs, "epoch cap");
    sub_train->add_option("--patience", tr.patience, "early-stopping patience in epochs");
    sub_train->add_option("--seed", tr.seed, "training seed (required here or in the config)");
    sub_train->add_option("--val-max-fpr", tr.val_max_fpr, "FPR cut of the early-stopping metric");

    EvalArgs ev;
    auto* sub_eval = app.add_subcommand("eval", "Score a labeled dataset and report AUC metrics");
    sub_eval->add_option("--config", ev.config, "key=value config file");
    sub_eval->add_option("--model", ev.models, "model file; repeat to aggregate runs into mean and CI");
    sub_eval->add_option("--data", ev.data, "labeled dataset");
    sub_eval->add_option("--dict", ev.dict, "dictionary file");
    sub_eval->add_option("--max-fpr", ev.max_fpr, "partial AUC cut, in (0,1]");
    sub_eval->add_option("--out", ev.out, "metrics output file");

    PredictArgs pr;
    auto* sub_predict = app.add_subcommand("predict", "Write one fraud probability per sample");
    sub_predict->add_option("--config", pr.config, "key=value config file");
    sub_predict->add_option("--model", pr.model, "model file");
    sub_predict->add_option("--data", pr.data, "dataset to score");
    sub_predict->add_option("--dict", pr.dict, "dictionary file");
    sub_predict->add_option("--out", pr.out, "score file (default stdout)");

    ExplainArgs ex;
    auto* sub_explain = app.add_subcommand("explain", "Wide-weight rankings and per-sample importance");
    sub_explain->add_option("--config", ex.config, "key=value config file");
    sub_explain->add_option("--model", ex.model, "model file");
    sub_explain->add_option("--data", ex.data, "dataset for support counts and samples");
    sub_explain->add_option("--dict", ex.dict, "dictionary file");
    sub_explain->add_option("--top-k", ex.top_k, "values listed per field and direction");
    sub_explain->add_option("--min-support", ex.min_support, "minimum per-sample support to rank a value");
    sub_explain->add_option("--sample", ex.sample, "user_id for the per-sample section");
    sub_explain->add_option("--out", ex.out, "report file (default stdout)");

    int rc = 0;
    sub_gen->callback([&] { rc = cmd_gen_data(gen); });
    sub_train->callback([&] { rc = cmd_train(tr); });
    sub_eval->callback([&] { rc = cmd_eval(ev); });
    sub_predict->callback([&] { rc = cmd_predict(pr); });
    sub_explain->callback([&] { rc = cmd_explain(ex); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;  // 2 = bad configuration/usage
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 4;
    }
    return rc;
}
