#include "cfml/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "cfml/c2f.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace cfml {

namespace {

// Stage seed tags hung off the master seed.
enum : std::uint64_t {
    kSeedData = 1,
    kSeedBde = 2,
    kSeedPseudo = 3,
    kSeedMeta = 4,
    kSeedEval1 = 5,
    kSeedEval5 = 6,
    kSeedBaseline = 7,
};

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << j.dump(2) << "\n";
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::FormatError, path + ": " + e.what());
    }
}

template <typename F>
auto run_stage(const char* name, F&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        throw Error(e.code(), std::string("stage ") + name + ": " + e.what());
    }
}

struct StageData {
    CoarseDataset train;
    FineDataset val, test;
};

StageData stage_data(const ExperimentConfig& cfg, const std::string& dir) {
    if (!cfg.data_path.empty())
        return {load_dataset(cfg.data_path + "/train.csv"),
                load_fine_dataset(cfg.data_path + "/val.csv"),
                load_fine_dataset(cfg.data_path + "/test.csv")};
    const std::string train_csv = dir + "/train.csv";
    const std::string val_csv = dir + "/val.csv";
    const std::string test_csv = dir + "/test.csv";
    if (fs::exists(train_csv) && fs::exists(val_csv) && fs::exists(test_csv))
        return {load_dataset(train_csv), load_fine_dataset(val_csv),
                load_fine_dataset(test_csv)};

    SynthSpec spec = cfg.synth;
    spec.seed = SeededRng::derive(cfg.master_seed, kSeedData);
    const CoarseDataset full = generate_hierarchical(spec);
    std::vector<int> tr = cfg.train_coarse, va = cfg.val_coarse, te = cfg.test_coarse;
    if (tr.empty()) default_split(spec.num_coarse, tr, va, te);
    MetaSplit split = split_meta(full, tr, va, te);
    save_dataset(split.train, train_csv);
    save_fine_dataset(split.val, val_csv);
    save_fine_dataset(split.test, test_csv);
    return {std::move(split.train), std::move(split.val), std::move(split.test)};
}

Checkpoint stage_bde(const ExperimentConfig& cfg, const CoarseDataset& train,
                     const std::string& dir, std::uint64_t hash) {
    const std::string base = dir + "/checkpoint";
    if (fs::exists(base + ".json") && fs::exists(base + ".bin")) return load_checkpoint(base);

    BdeConfig model = cfg.bde;
    model.encoder = cfg.encoder;
    if (!cfg.visual_on) model.visual_weight = 0.0;
    if (!cfg.semantic_on) model.semantic_weight = 0.0;
    TrainConfig tc = cfg.bde_train;
    tc.seed = SeededRng::derive(cfg.master_seed, kSeedBde);
    TrainResult res = train_bde(train, model, tc, cfg.augment);

    Checkpoint ck;
    ck.kind = "bde";
    ck.model = model;
    ck.encoder = res.params.encoder;
    ck.classifier = res.params.classifier;
    ck.epoch = tc.epochs;
    ck.seed = tc.seed;
    save_checkpoint(ck, base);
    write_json_file(dir + "/loss_trace.json",
                    json{{"config_hash", hex64(hash)},
                         {"master_seed", cfg.master_seed},
                         {"epoch_loss", res.epoch_loss},
                         {"clamp_events", res.clamp_events},
                         {"selected_epoch", res.selected_epoch},
                         {"selected_score", res.selected_score}});
    return ck;
}

struct PseudoStage {
    PseudoDataset data;
    double ari = std::numeric_limits<double>::quiet_NaN();
};

PseudoStage stage_pseudo(const ExperimentConfig& cfg, const CoarseDataset& train,
                         const FineDataset& val, const Checkpoint* embed_ckpt,
                         const std::string& dir, std::uint64_t hash) {
    const std::string csv = dir + "/pseudo.csv";
    const std::string report_path = dir + "/ari_report.json";
    if (fs::exists(csv)) {
        PseudoStage out{load_pseudo_dataset(csv), std::numeric_limits<double>::quiet_NaN()};
        if (fs::exists(report_path)) {
            const json report = read_json_file(report_path);
            if (report.contains("ari") && report["ari"].is_number())
                out.ari = report["ari"].get<double>();
        }
        return out;
    }

    const int ns = cfg.ns_override > 0 ? cfg.ns_override : compute_ns_from_validation(val);
    EmbedFn embed;
    std::string embed_id;
    if (cfg.c2f_embed == "pixels") {
        embed = pixels_embed;
        embed_id = "pixels";
    } else {
        const Encoder enc = embed_ckpt->encoder;
        embed = [enc](const Vector& x) { return encode(enc, x); };
        embed_id = "bde:" + hex64(hash);
    }
    SeededRng rng(SeededRng::derive(cfg.master_seed, kSeedPseudo));
    PseudoStage out;
    out.data = pseudo_label(train, embed, ns, rng);
    out.data.embedding_id = embed_id;
    save_pseudo_dataset(out.data, csv);

    // Diagnostic only: agreement with the hidden fine labels. Training
    // never reads them; this report is the one artifact that may.
    json ari_value = nullptr;
    const std::vector<int>& hidden = train.hidden_fine_labels();
    if (hidden.size() == train.samples.size() && out.data.samples.size() >= 2) {
        bool usable = true;
        for (const PseudoSample& s : out.data.samples)
            if (hidden[s.source_index] < 0) usable = false;
        if (usable) {
            std::vector<int> pseudo_labels, fine_labels;
            pseudo_labels.reserve(out.data.samples.size());
            for (const PseudoSample& s : out.data.samples) {
                pseudo_labels.push_back(s.pseudo_fine_label);
                fine_labels.push_back(hidden[s.source_index]);
            }
            out.ari = adjusted_rand_index(pseudo_labels, fine_labels);
            ari_value = out.ari;
        }
    }
    write_json_file(report_path, json{{"config_hash", hex64(hash)},
                                      {"master_seed", cfg.master_seed},
                                      {"group_size", out.data.group_size},
                                      {"dropped_count", out.data.dropped_count},
                                      {"num_pseudo_classes", out.data.num_pseudo_classes},
                                      {"embedding_id", embed_id},
                                      {"ari", ari_value}});
    return out;
}

Checkpoint stage_meta(const ExperimentConfig& cfg, const SamplePool& pool,
                      const std::string& dir, std::uint64_t hash, std::uint64_t seed_tag,
                      const std::string& bde_base) {
    const std::string base = dir + "/checkpoint";
    if (fs::exists(base + ".json") && fs::exists(base + ".bin")) return load_checkpoint(base);

    MetaTrainConfig mc = cfg.meta;
    mc.encoder = cfg.encoder;
    mc.seed = SeededRng::derive(cfg.master_seed, seed_tag);
    if (mc.warm_start == "bde") {
        // Special value: warm-start from this run's embedding checkpoint.
        if (bde_base.empty())
            throw Error(ErrorCode::ConfigError,
                        "meta.warm_start = \"bde\" needs the embedding stage");
        mc.warm_start = bde_base;
    }
    MetaTrainResult res = meta_train(pool, mc);

    Checkpoint ck;
    ck.kind = "meta";
    ck.model.encoder = cfg.encoder;
    ck.encoder = res.encoder;
    ck.classifier = Matrix();
    ck.epoch = mc.epochs;
    ck.seed = mc.seed;
    save_checkpoint(ck, base);
    write_json_file(dir + "/train_trace.json",
                    json{{"config_hash", hex64(hash)},
                         {"master_seed", cfg.master_seed},
                         {"epoch_loss", res.epoch_loss},
                         {"epoch_accuracy", res.epoch_accuracy}});
    return ck;
}

EvalReport report_from_json(const json& j) {
    EvalReport r;
    r.n_way = j.at("n_way").get<int>();
    r.k_shot = j.at("k_shot").get<int>();
    r.q_query = j.at("q_query").get<int>();
    r.episodes = j.at("episodes").get<std::size_t>();
    r.mean_accuracy = j.at("mean_accuracy").get<double>();
    r.ci95 = j.at("ci95").get<double>();
    r.seed = j.at("seed").get<std::uint64_t>();
    return r;
}

EvalReport stage_eval_one(const ExperimentConfig& cfg, const Encoder& enc,
                          const SamplePool& pool, int k_shot, std::uint64_t seed_tag,
                          const std::string& path, std::uint64_t hash) {
    if (fs::exists(path)) return report_from_json(read_json_file(path).at("report"));
    EvalReport r = meta_eval(enc, pool, cfg.eval_n_way, k_shot, cfg.eval_q_query,
                             cfg.eval_episodes, SeededRng::derive(cfg.master_seed, seed_tag));
    write_json_file(path, json{{"config_hash", hex64(hash)},
                               {"master_seed", cfg.master_seed},
                               {"report", json::parse(r.to_json())}});
    return r;
}

} // namespace

void default_split(int num_coarse, std::vector<int>& train, std::vector<int>& val,
                   std::vector<int>& test) {
    const int n_test = std::max(1, num_coarse / 4);
    const int n_val = std::max(1, num_coarse / 8);
    const int n_train = num_coarse - n_test - n_val;
    if (n_train < 1)
        throw Error(ErrorCode::ConfigError,
                    "too few coarse classes for a train/val/test split");
    train.clear();
    val.clear();
    test.clear();
    for (int c = 0; c < n_train; ++c) train.push_back(c);
    for (int c = n_train; c < n_train + n_val; ++c) val.push_back(c);
    for (int c = n_train + n_val; c < num_coarse; ++c) test.push_back(c);
}

int compute_ns_from_validation(const FineDataset& val) {
    if (val.samples.empty()) throw Error(ErrorCode::EmptyInput, "validation split is empty");
    std::vector<std::size_t> sizes;
    {
        std::vector<std::size_t> counts;
        for (const FineSample& s : val.samples) {
            if (s.fine_label < 0) throw Error(ErrorCode::InvalidLabel, "negative fine label");
            if (static_cast<std::size_t>(s.fine_label) >= counts.size())
                counts.resize(static_cast<std::size_t>(s.fine_label) + 1, 0);
            ++counts[static_cast<std::size_t>(s.fine_label)];
        }
        for (std::size_t c : counts)
            if (c > 0) sizes.push_back(c);
    }
    double mean = 0.0;
    for (std::size_t c : sizes) mean += static_cast<double>(c);
    mean /= static_cast<double>(sizes.size());
    const int rounded = static_cast<int>(std::floor(mean + 0.5)); // half up
    return std::max(2, rounded);
}

std::string config_to_json(const ExperimentConfig& cfg) {
    json milestones = json::array();
    for (const auto& [epoch, factor] : cfg.bde_train.lr_milestones)
        milestones.push_back(json::array({epoch, factor}));
    json j{
        {"schema_version", cfg.schema_version},
        {"master_seed", cfg.master_seed},
        {"out_dir", cfg.out_dir},
        {"data",
         {{"path", cfg.data_path},
          {"num_coarse", cfg.synth.num_coarse},
          {"fine_per_coarse", cfg.synth.fine_per_coarse},
          {"samples_per_fine", cfg.synth.samples_per_fine},
          {"input_dim", cfg.synth.input_dim},
          {"coarse_spread", cfg.synth.coarse_spread},
          {"fine_spread", cfg.synth.fine_spread},
          {"noise_sigma", cfg.synth.noise_sigma},
          {"train_coarse", cfg.train_coarse},
          {"val_coarse", cfg.val_coarse},
          {"test_coarse", cfg.test_coarse}}},
        {"encoder",
         {{"input_dim", cfg.encoder.input_dim},
          {"hidden_dim", cfg.encoder.hidden_dim},
          {"embed_dim", cfg.encoder.embed_dim}}},
        {"bde",
         {{"tau", cfg.bde.tau},
          {"visual_weight", cfg.bde.visual_weight},
          {"semantic_weight", cfg.bde.semantic_weight},
          {"visual_on", cfg.visual_on},
          {"semantic_on", cfg.semantic_on},
          {"epochs", cfg.bde_train.epochs},
          {"batch_size", cfg.bde_train.batch_size},
          {"base_lr", cfg.bde_train.base_lr},
          {"lr_milestones", milestones},
          {"momentum", cfg.bde_train.momentum},
          {"weight_decay", cfg.bde_train.weight_decay},
          {"model_selection", cfg.bde_train.model_selection},
          {"holdout_frac", cfg.bde_train.holdout_frac},
          {"probe_interval", cfg.bde_train.probe_interval},
          {"probe_k", cfg.bde_train.probe_k},
          {"augment",
           {{"noise_sigma", cfg.augment.noise_sigma},
            {"dropout_prob", cfg.augment.dropout_prob},
            {"scale_jitter", cfg.augment.scale_jitter}}}}},
        {"c2f", {{"ns_override", cfg.ns_override}, {"embed", cfg.c2f_embed}}},
        {"meta",
         {{"epochs", cfg.meta.epochs},
          {"episodes_per_epoch", cfg.meta.episodes_per_epoch},
          {"n_way", cfg.meta.n_way},
          {"k_shot", cfg.meta.k_shot},
          {"q_query", cfg.meta.q_query},
          {"lr", cfg.meta.lr},
          {"momentum", cfg.meta.momentum},
          {"weight_decay", cfg.meta.weight_decay},
          {"warm_start", cfg.meta.warm_start}}},
        {"eval",
         {{"n_way", cfg.eval_n_way},
          {"q_query", cfg.eval_q_query},
          {"episodes", cfg.eval_episodes}}},
    };
    return j.dump(2);
}

ExperimentConfig config_from_json(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("config parse: ") + e.what());
    }
    ExperimentConfig cfg;
    try {
        cfg.schema_version = j.at("schema_version").get<int>();
        cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
        cfg.out_dir = j.at("out_dir").get<std::string>();
        const json& d = j.at("data");
        cfg.data_path = d.at("path").get<std::string>();
        cfg.synth.num_coarse = d.at("num_coarse").get<int>();
        cfg.synth.fine_per_coarse = d.at("fine_per_coarse").get<int>();
        cfg.synth.samples_per_fine = d.at("samples_per_fine").get<int>();
        cfg.synth.input_dim = d.at("input_dim").get<std::size_t>();
        cfg.synth.coarse_spread = d.at("coarse_spread").get<double>();
        cfg.synth.fine_spread = d.at("fine_spread").get<double>();
        cfg.synth.noise_sigma = d.at("noise_sigma").get<double>();
        cfg.train_coarse = d.at("train_coarse").get<std::vector<int>>();
        cfg.val_coarse = d.at("val_coarse").get<std::vector<int>>();
        cfg.test_coarse = d.at("test_coarse").get<std::vector<int>>();
        const json& e = j.at("encoder");
        cfg.encoder.input_dim = e.at("input_dim").get<std::size_t>();
        cfg.encoder.hidden_dim = e.at("hidden_dim").get<std::size_t>();
        cfg.encoder.embed_dim = e.at("embed_dim").get<std::size_t>();
        const json& b = j.at("bde");
        cfg.bde.tau = b.at("tau").get<double>();
        cfg.bde.visual_weight = b.at("visual_weight").get<double>();
        cfg.bde.semantic_weight = b.at("semantic_weight").get<double>();
        cfg.visual_on = b.at("visual_on").get<bool>();
        cfg.semantic_on = b.at("semantic_on").get<bool>();
        cfg.bde_train.epochs = b.at("epochs").get<int>();
        cfg.bde_train.batch_size = b.at("batch_size").get<int>();
        cfg.bde_train.base_lr = b.at("base_lr").get<double>();
        cfg.bde_train.lr_milestones.clear();
        for (const json& pair : b.at("lr_milestones"))
            cfg.bde_train.lr_milestones.emplace_back(pair.at(0).get<int>(),
                                                     pair.at(1).get<double>());
        cfg.bde_train.momentum = b.at("momentum").get<double>();
        cfg.bde_train.weight_decay = b.at("weight_decay").get<double>();
        cfg.bde_train.model_selection = b.at("model_selection").get<bool>();
        cfg.bde_train.holdout_frac = b.at("holdout_frac").get<double>();
        cfg.bde_train.probe_interval = b.at("probe_interval").get<int>();
        cfg.bde_train.probe_k = b.at("probe_k").get<int>();
        const json& a = b.at("augment");
        cfg.augment.noise_sigma = a.at("noise_sigma").get<double>();
        cfg.augment.dropout_prob = a.at("dropout_prob").get<double>();
        cfg.augment.scale_jitter = a.at("scale_jitter").get<double>();
        const json& c = j.at("c2f");
        cfg.ns_override = c.at("ns_override").get<int>();
        cfg.c2f_embed = c.at("embed").get<std::string>();
        const json& m = j.at("meta");
        cfg.meta.epochs = m.at("epochs").get<int>();
        cfg.meta.episodes_per_epoch = m.at("episodes_per_epoch").get<int>();
        cfg.meta.n_way = m.at("n_way").get<int>();
        cfg.meta.k_shot = m.at("k_shot").get<int>();
        cfg.meta.q_query = m.at("q_query").get<int>();
        cfg.meta.lr = m.at("lr").get<double>();
        cfg.meta.momentum = m.at("momentum").get<double>();
        cfg.meta.weight_decay = m.at("weight_decay").get<double>();
        cfg.meta.warm_start = m.at("warm_start").get<std::string>();
        const json& ev = j.at("eval");
        cfg.eval_n_way = ev.at("n_way").get<int>();
        cfg.eval_q_query = ev.at("q_query").get<int>();
        cfg.eval_episodes = ev.at("episodes").get<std::size_t>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, std::string("config field: ") + e.what());
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return config_from_json(text);
}

void save_config(const ExperimentConfig& cfg, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << config_to_json(cfg) << "\n";
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
    const std::string canonical = config_to_json(cfg);
    std::uint64_t h = 1469598103934665603ull; // FNV-1a 64
    for (unsigned char ch : canonical) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

void validate_config(const ExperimentConfig& cfg) {
    if (cfg.schema_version != 1)
        throw Error(ErrorCode::ConfigError,
                    "unsupported schema_version " + std::to_string(cfg.schema_version));
    if (cfg.out_dir.empty()) throw Error(ErrorCode::ConfigError, "out_dir is empty");
    if (cfg.c2f_embed != "bde" && cfg.c2f_embed != "pixels")
        throw Error(ErrorCode::ConfigError, "c2f embed must be \"bde\" or \"pixels\"");
    if (cfg.ns_override < 0) throw Error(ErrorCode::ConfigError, "ns_override must be >= 0");
    if (cfg.eval_n_way < 2 || cfg.eval_q_query < 1 || cfg.eval_episodes < 1)
        throw Error(ErrorCode::ConfigError, "bad eval shape");
    const bool any_split =
        !cfg.train_coarse.empty() || !cfg.val_coarse.empty() || !cfg.test_coarse.empty();
    const bool all_split =
        !cfg.train_coarse.empty() && !cfg.val_coarse.empty() && !cfg.test_coarse.empty();
    if (any_split && !all_split)
        throw Error(ErrorCode::ConfigError, "set all three coarse splits or none");
    if (cfg.data_path.empty()) {
        if (cfg.synth.num_coarse <= 0 || cfg.synth.fine_per_coarse <= 0 ||
            cfg.synth.samples_per_fine <= 0 || cfg.synth.input_dim == 0)
            throw Error(ErrorCode::ConfigError, "bad synthetic dataset shape");
        if (cfg.encoder.input_dim != cfg.synth.input_dim)
            throw Error(ErrorCode::ConfigError, "encoder input_dim != dataset input_dim");
    }
    if (cfg.c2f_embed == "pixels" && cfg.meta.warm_start == "bde")
        throw Error(ErrorCode::ConfigError,
                    "meta.warm_start = \"bde\" requires c2f embed = \"bde\"");
}

RunResult run_pipeline(const ExperimentConfig& cfg) {
    validate_config(cfg);
    const std::uint64_t hash = config_hash(cfg);
    fs::create_directories(cfg.out_dir + "/data");
    fs::create_directories(cfg.out_dir + "/pseudo");
    fs::create_directories(cfg.out_dir + "/meta");
    fs::create_directories(cfg.out_dir + "/eval");
    save_config(cfg, cfg.out_dir + "/config.json");

    StageData data = run_stage("data", [&] { return stage_data(cfg, cfg.out_dir + "/data"); });

    Checkpoint bde_ck;
    std::string bde_base;
    if (cfg.c2f_embed == "bde") {
        fs::create_directories(cfg.out_dir + "/bde");
        bde_base = cfg.out_dir + "/bde/checkpoint";
        bde_ck = run_stage("bde",
                           [&] { return stage_bde(cfg, data.train, cfg.out_dir + "/bde", hash); });
    }

    PseudoStage pseudo = run_stage("pseudo", [&] {
        return stage_pseudo(cfg, data.train, data.val, bde_base.empty() ? nullptr : &bde_ck,
                            cfg.out_dir + "/pseudo", hash);
    });

    const SamplePool pool = SamplePool::from_pseudo(pseudo.data);
    Checkpoint meta_ck = run_stage("meta", [&] {
        return stage_meta(cfg, pool, cfg.out_dir + "/meta", hash, kSeedMeta, bde_base);
    });

    RunResult result;
    result.dir = cfg.out_dir;
    result.hash = hash;
    result.ns_used = pseudo.data.group_size;
    result.pseudo_ari = pseudo.ari;
    const SamplePool test_pool = SamplePool::from_fine(data.test);
    result.one_shot = run_stage("eval", [&] {
        return stage_eval_one(cfg, meta_ck.encoder, test_pool, 1, kSeedEval1,
                              cfg.out_dir + "/eval/report_1shot.json", hash);
    });
    result.five_shot = run_stage("eval", [&] {
        return stage_eval_one(cfg, meta_ck.encoder, test_pool, 5, kSeedEval5,
                              cfg.out_dir + "/eval/report_5shot.json", hash);
    });
    return result;
}

RunResult run_baseline_coarse_direct(const ExperimentConfig& cfg) {
    validate_config(cfg);
    const std::uint64_t hash = config_hash(cfg);
    fs::create_directories(cfg.out_dir + "/data");
    fs::create_directories(cfg.out_dir + "/meta");
    fs::create_directories(cfg.out_dir + "/eval");
    save_config(cfg, cfg.out_dir + "/config.json");

    StageData data = run_stage("data", [&] { return stage_data(cfg, cfg.out_dir + "/data"); });
    const SamplePool pool = SamplePool::from_coarse(data.train);
    Checkpoint meta_ck = run_stage("meta", [&] {
        return stage_meta(cfg, pool, cfg.out_dir + "/meta", hash, kSeedBaseline, "");
    });

    RunResult result;
    result.dir = cfg.out_dir;
    result.hash = hash;
    const SamplePool test_pool = SamplePool::from_fine(data.test);
    result.one_shot = run_stage("eval", [&] {
        return stage_eval_one(cfg, meta_ck.encoder, test_pool, 1, kSeedEval1,
                              cfg.out_dir + "/eval/report_1shot.json", hash);
    });
    result.five_shot = run_stage("eval", [&] {
        return stage_eval_one(cfg, meta_ck.encoder, test_pool, 5, kSeedEval5,
                              cfg.out_dir + "/eval/report_5shot.json", hash);
    });
    return result;
}

std::vector<VariantResult> run_compare(const ExperimentConfig& cfg,
                                       const std::vector<std::string>& variants) {
    std::vector<VariantResult> out;
    for (const std::string& name : variants) {
        ExperimentConfig v = cfg;
        v.out_dir = cfg.out_dir + "/" + name;
        if (name == "bde") {
            out.push_back({name, run_pipeline(v)});
        } else if (name == "pixels") {
            v.c2f_embed = "pixels";
            out.push_back({name, run_pipeline(v)});
        } else if (name == "coarse-direct") {
            out.push_back({name, run_baseline_coarse_direct(v)});
        } else if (name == "visual-only") {
            v.semantic_on = false;
            out.push_back({name, run_pipeline(v)});
        } else if (name == "semantic-only") {
            v.visual_on = false;
            out.push_back({name, run_pipeline(v)});
        } else {
            throw Error(ErrorCode::ConfigError, "unknown variant \"" + name + "\"");
        }
    }
    return out;
}

std::string render_table(const std::vector<VariantResult>& rows) {
    std::size_t width = 7; // "variant"
    for (const VariantResult& r : rows) width = std::max(width, r.name.size());
    auto cell = [](const EvalReport& r) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%6.2f %s %4.2f", 100.0 * r.mean_accuracy, "+/-",
                      100.0 * r.ci95);
        return std::string(buf);
    };
    std::string text;
    char line[256];
    std::snprintf(line, sizeof(line), "%-*s  %-16s  %-16s\n", static_cast<int>(width), "variant",
                  "1-shot", "5-shot");
    text += line;
    for (const VariantResult& r : rows) {
        std::snprintf(line, sizeof(line), "%-*s  %-16s  %-16s\n", static_cast<int>(width),
                      r.name.c_str(), cell(r.run.one_shot).c_str(),
                      cell(r.run.five_shot).c_str());
        text += line;
    }
    return text;
}

} // namespace cfml
