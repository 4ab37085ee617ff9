// Command-line front end: generate data, train the embedding, group
// pseudo-classes, meta-train, evaluate, or run the whole pipeline.

#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cfml/c2f.hpp"
#include "cfml/pipeline.hpp"

using namespace cfml;

namespace {

int exit_code_for(const Error& e) {
    return e.code() == ErrorCode::ConfigError || e.code() == ErrorCode::InvalidSpec ? 2 : 3;
}

void print_report(const char* tag, const EvalReport& r) {
    std::printf("%-8s %d-way %d-shot  %6.2f +/- %4.2f %%  (%zu episodes)\n", tag, r.n_way,
                r.k_shot, 100.0 * r.mean_accuracy, 100.0 * r.ci95, r.episodes);
}

ExperimentConfig load_or_default(const std::string& config_path) {
    if (config_path.empty()) return ExperimentConfig{};
    return load_config(config_path);
}

int cmd_gen_data(const ExperimentConfig& base, const std::string& out_dir) {
    ExperimentConfig cfg = base;
    cfg.out_dir = out_dir;
    validate_config(cfg);
    SynthSpec spec = cfg.synth;
    spec.seed = SeededRng::derive(cfg.master_seed, 1);
    const CoarseDataset full = generate_hierarchical(spec);
    std::vector<int> tr = cfg.train_coarse, va = cfg.val_coarse, te = cfg.test_coarse;
    if (tr.empty()) default_split(spec.num_coarse, tr, va, te);
    MetaSplit split = split_meta(full, tr, va, te);
    save_dataset(split.train, out_dir + "/train.csv");
    save_fine_dataset(split.val, out_dir + "/val.csv");
    save_fine_dataset(split.test, out_dir + "/test.csv");
    std::printf("wrote %s/{train,val,test}.csv  (%zu train, %zu val, %zu test samples)\n",
                out_dir.c_str(), split.train.samples.size(), split.val.samples.size(),
                split.test.samples.size());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"coarse-to-fine pseudo-labeled meta-learning pipeline"};
    app.require_subcommand(1);

    std::string config_path, out, data_csv, val_csv, test_csv, ckpt, pseudo_csv, warm;
    std::uint64_t seed = 0;
    bool seed_set = false, use_pixels = false;
    int ns = 0, epochs = -1, batch_size = -1, n_way = 5, k_shot = 1, q_query = 15;
    std::size_t episodes = 1000;
    double lr = -1.0;
    std::vector<std::string> variants{"bde", "pixels", "coarse-direct", "visual-only",
                                      "semantic-only"};

    auto add_seed = [&](CLI::App* cmd) {
        cmd->add_option("--seed", seed, "master seed")->each([&](const std::string&) {
            seed_set = true;
        });
    };

    CLI::App* init = app.add_subcommand("init-config", "write a default config JSON");
    init->add_option("--out", out, "output path")->required();

    CLI::App* gen = app.add_subcommand("gen-data", "generate a synthetic dataset split");
    gen->add_option("--config", config_path, "config JSON");
    gen->add_option("--out", out, "output directory")->required();
    add_seed(gen);

    CLI::App* tb = app.add_subcommand("train-bde", "train the discriminative embedding");
    tb->add_option("--config", config_path, "config JSON");
    tb->add_option("--data", data_csv, "training CSV (coarse labels)")->required();
    tb->add_option("--out", ckpt, "checkpoint base path")->required();
    tb->add_option("--epochs", epochs, "override epochs");
    tb->add_option("--batch-size", batch_size, "override batch size");
    tb->add_option("--lr", lr, "override base learning rate");
    add_seed(tb);

    CLI::App* pl = app.add_subcommand("pseudo-label", "group samples into pseudo-classes");
    pl->add_option("--config", config_path, "config JSON");
    pl->add_option("--data", data_csv, "training CSV (coarse labels)")->required();
    pl->add_option("--ckpt", ckpt, "embedding checkpoint base path");
    pl->add_flag("--pixels", use_pixels, "use normalized raw features instead of a checkpoint");
    pl->add_option("--ns", ns, "samples per pseudo-class (0 = from --val)");
    pl->add_option("--val", val_csv, "validation CSV for the group-size estimate");
    pl->add_option("--out", pseudo_csv, "output CSV")->required();
    add_seed(pl);

    CLI::App* mt = app.add_subcommand("meta-train", "train the meta backbone on pseudo-tasks");
    mt->add_option("--config", config_path, "config JSON");
    mt->add_option("--pseudo", pseudo_csv, "pseudo-labeled CSV")->required();
    mt->add_option("--out", ckpt, "checkpoint base path")->required();
    mt->add_option("--epochs", epochs, "override epochs");
    mt->add_option("--lr", lr, "override learning rate");
    mt->add_option("--warm", warm, "warm-start checkpoint base path");
    add_seed(mt);

    CLI::App* ev = app.add_subcommand("evaluate", "episodic evaluation on a fine-labeled split");
    ev->add_option("--ckpt", ckpt, "checkpoint base path")->required();
    ev->add_option("--test", test_csv, "test CSV (fine labels)")->required();
    ev->add_option("--n", n_way, "ways");
    ev->add_option("--k", k_shot, "shots");
    ev->add_option("--q", q_query, "queries per class");
    ev->add_option("--episodes", episodes, "episode count");
    ev->add_option("--out", out, "optional report JSON path");
    add_seed(ev);

    CLI::App* ra = app.add_subcommand("run-all", "run the full pipeline");
    ra->add_option("--config", config_path, "config JSON");
    ra->add_option("--out", out, "output directory (overrides config)");
    add_seed(ra);

    CLI::App* cp = app.add_subcommand("compare", "run the variant matrix");
    cp->add_option("--config", config_path, "config JSON");
    cp->add_option("--out", out, "output directory (overrides config)");
    cp->add_option("--variants", variants, "variants to run");
    add_seed(cp);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // help output
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    }

    const std::string stage_name = app.get_subcommands().front()->get_name();
    try {
        ExperimentConfig cfg = load_or_default(config_path);
        if (seed_set) cfg.master_seed = seed;

        if (init->parsed()) {
            save_config(ExperimentConfig{}, out);
            std::printf("wrote %s\n", out.c_str());
            return 0;
        }
        if (gen->parsed()) return cmd_gen_data(cfg, out);

        if (tb->parsed()) {
            const CoarseDataset train = load_dataset(data_csv);
            BdeConfig model = cfg.bde;
            model.encoder = cfg.encoder;
            model.encoder.input_dim = train.input_dim;
            if (!cfg.visual_on) model.visual_weight = 0.0;
            if (!cfg.semantic_on) model.semantic_weight = 0.0;
            TrainConfig tc = cfg.bde_train;
            if (epochs >= 0) tc.epochs = epochs;
            if (batch_size > 0) tc.batch_size = batch_size;
            if (lr >= 0) tc.base_lr = lr;
            tc.seed = SeededRng::derive(cfg.master_seed, 2);
            TrainResult res = train_bde(train, model, tc, cfg.augment);
            Checkpoint ck;
            ck.kind = "bde";
            ck.model = model;
            ck.encoder = res.params.encoder;
            ck.classifier = res.params.classifier;
            ck.epoch = tc.epochs;
            ck.seed = tc.seed;
            save_checkpoint(ck, ckpt);
            std::printf("trained %d epochs, final loss %.6g, wrote %s.{json,bin}\n", tc.epochs,
                        res.epoch_loss.empty() ? 0.0 : res.epoch_loss.back(), ckpt.c_str());
            return 0;
        }

        if (pl->parsed()) {
            const CoarseDataset train = load_dataset(data_csv);
            EmbedFn embed;
            std::string embed_id;
            if (use_pixels) {
                embed = pixels_embed;
                embed_id = "pixels";
            } else {
                if (ckpt.empty())
                    throw Error(ErrorCode::ConfigError, "need --ckpt or --pixels");
                const Encoder enc = load_checkpoint(ckpt).encoder;
                embed = [enc](const Vector& x) { return encode(enc, x); };
                embed_id = ckpt;
            }
            int group_size = ns > 0 ? ns : cfg.ns_override;
            if (group_size <= 0) {
                if (val_csv.empty())
                    throw Error(ErrorCode::ConfigError, "need --ns or --val");
                group_size = compute_ns_from_validation(load_fine_dataset(val_csv));
            }
            SeededRng rng(SeededRng::derive(cfg.master_seed, 3));
            PseudoDataset pd = pseudo_label(train, embed, group_size, rng);
            pd.embedding_id = embed_id;
            save_pseudo_dataset(pd, pseudo_csv);
            std::printf("N_s = %d: %d pseudo-classes, %zu samples kept, %zu dropped -> %s\n",
                        pd.group_size, pd.num_pseudo_classes, pd.samples.size(),
                        pd.dropped_count, pseudo_csv.c_str());
            return 0;
        }

        if (mt->parsed()) {
            const PseudoDataset pd = load_pseudo_dataset(pseudo_csv);
            MetaTrainConfig mc = cfg.meta;
            mc.encoder = cfg.encoder;
            mc.encoder.input_dim = pd.input_dim;
            if (epochs >= 0) mc.epochs = epochs;
            if (lr >= 0) mc.lr = lr;
            if (!warm.empty()) mc.warm_start = warm;
            mc.seed = SeededRng::derive(cfg.master_seed, 4);
            MetaTrainResult res = meta_train(SamplePool::from_pseudo(pd), mc);
            Checkpoint ck;
            ck.kind = "meta";
            ck.model.encoder = res.encoder.config();
            ck.encoder = res.encoder;
            ck.epoch = mc.epochs;
            ck.seed = mc.seed;
            save_checkpoint(ck, ckpt);
            std::printf("trained %d epochs, final loss %.4f, train-episode acc %.3f -> %s\n",
                        mc.epochs, res.epoch_loss.empty() ? 0.0 : res.epoch_loss.back(),
                        res.epoch_accuracy.empty() ? 0.0 : res.epoch_accuracy.back(),
                        ckpt.c_str());
            return 0;
        }

        if (ev->parsed()) {
            const Encoder enc = load_checkpoint(ckpt).encoder;
            const FineDataset test = load_fine_dataset(test_csv);
            EvalReport r = meta_eval(enc, SamplePool::from_fine(test), n_way, k_shot, q_query,
                                     episodes, SeededRng::derive(seed, 5));
            print_report("test", r);
            if (!out.empty()) {
                std::FILE* f = std::fopen(out.c_str(), "w");
                if (!f) throw Error(ErrorCode::IoError, "cannot write " + out);
                std::fprintf(f, "%s\n", r.to_json().c_str());
                std::fclose(f);
            }
            return 0;
        }

        if (ra->parsed()) {
            if (!out.empty()) cfg.out_dir = out;
            RunResult res = run_pipeline(cfg);
            std::printf("run dir: %s  (config hash %016llx)\n", res.dir.c_str(),
                        static_cast<unsigned long long>(res.hash));
            std::printf("N_s = %d", res.ns_used);
            if (res.pseudo_ari == res.pseudo_ari) // not NaN
                std::printf(", pseudo vs hidden-fine ARI = %.4f", res.pseudo_ari);
            std::printf("\n");
            print_report("1-shot", res.one_shot);
            print_report("5-shot", res.five_shot);
            return 0;
        }

        if (cp->parsed()) {
            if (!out.empty()) cfg.out_dir = out;
            std::vector<VariantResult> rows = run_compare(cfg, variants);
            std::printf("%s", render_table(rows).c_str());
            return 0;
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "stage %s: %s\n", stage_name.c_str(), e.what());
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "stage %s: %s\n", stage_name.c_str(), e.what());
        return 3;
    }
    return 0;
}
