// Timing comparison between the OpenMP kernels and their serial reference
// twins, with a bitwise equality check on every output.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>

#include "cfml/bde.hpp"
#include "cfml/c2f.hpp"
#include "cfml/metrics.hpp"
#include "cfml/protonet.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace cfml;

namespace {

double time_ms(const std::function<void()>& fn, int reps) {
    fn(); // warmup
    const auto start = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) fn();
    const auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(stop - start).count() / reps;
}

void row(const char* name, double serial_ms, double parallel_ms, bool match) {
    std::printf("%-18s %10.3f %12.3f %9.2fx   %s\n", name, serial_ms, parallel_ms,
                serial_ms / parallel_ms, match ? "bitwise-equal" : "MISMATCH");
}

Matrix random_unit_columns(std::size_t dim, std::size_t count, SeededRng& rng) {
    Matrix m(dim, count);
    for (std::size_t c = 0; c < count; ++c) {
        Vector v(dim);
        for (double& x : v) x = rng.gaussian();
        v = l2_normalize(v);
        for (std::size_t d = 0; d < dim; ++d) m.at(d, c) = v[d];
    }
    return m;
}

} // namespace

int main(int argc, char** argv) {
    int reps = 5;
    for (int i = 1; i < argc; ++i)
        if (std::strcmp(argv[i], "--reps") == 0 && i + 1 < argc) reps = std::atoi(argv[i + 1]);

#ifdef _OPENMP
    std::printf("threads: %d, reps: %d\n", omp_get_max_threads(), reps);
#else
    std::printf("built without OpenMP, reps: %d\n", reps);
#endif
    std::printf("%-18s %10s %12s %10s\n", "kernel", "serial ms", "parallel ms", "speedup");

    SeededRng rng(7);

    { // gram: 64 x 600
        const Matrix f = random_unit_columns(64, 600, rng);
        Matrix a, b;
        const double ts = time_ms([&] { a = ref::gram(f); }, reps);
        const double tp = time_ms([&] { b = gram(f); }, reps);
        row("gram", ts, tp, a == b);
    }

    EncoderConfig ecfg{32, 64, 32};
    const Encoder enc = Encoder::init(ecfg, rng);
    std::vector<Vector> inputs(2000, Vector(32));
    for (Vector& v : inputs)
        for (double& x : v) x = rng.gaussian();
    std::vector<const Vector*> ptrs;
    for (const Vector& v : inputs) ptrs.push_back(&v);

    { // encode_batch: 2000 items
        std::vector<Vector> a, b;
        const double ts = time_ms([&] { a = ref::encode_batch(enc, ptrs); }, reps);
        const double tp = time_ms([&] { b = encode_batch(enc, ptrs); }, reps);
        row("encode_batch", ts, tp, a == b);
    }

    { // joint loss: batch of 128, 8 coarse classes
        BdeConfig model;
        model.encoder = ecfg;
        SeededRng init_rng(11);
        const BdeParams params = BdeParams::init(model, 8, init_rng);
        std::vector<const Vector*> batch(ptrs.begin(), ptrs.begin() + 128);
        std::vector<int> labels(128);
        for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 8);
        const AugmentConfig aug;
        JointLoss a, b;
        const double ts = time_ms(
            [&] {
                SeededRng r(3);
                a = ref::loss_joint(params, batch, labels, aug, r);
            },
            reps);
        const double tp = time_ms(
            [&] {
                SeededRng r(3);
                b = loss_joint(params, batch, labels, aug, r);
            },
            reps);
        row("loss_joint", ts, tp, a.value == b.value && a.grad == b.grad);
    }

    { // knn: 500 train points, 200 probes, k = 200
        const Matrix train = random_unit_columns(32, 500, rng);
        std::vector<Vector> train_emb(500, Vector(32));
        std::vector<int> train_labels(500);
        for (std::size_t i = 0; i < 500; ++i) {
            for (std::size_t d = 0; d < 32; ++d) train_emb[i][d] = train.at(d, i);
            train_labels[i] = static_cast<int>(i % 10);
        }
        const Matrix probes_m = random_unit_columns(32, 200, rng);
        std::vector<Vector> probes(200, Vector(32));
        for (std::size_t i = 0; i < 200; ++i)
            for (std::size_t d = 0; d < 32; ++d) probes[i][d] = probes_m.at(d, i);
        KnnConfig knn;
        std::vector<int> a, b;
        const double ts =
            time_ms([&] { a = ref::knn_predict_batch(train_emb, train_labels, probes, knn); },
                    reps);
        const double tp =
            time_ms([&] { b = knn_predict_batch(train_emb, train_labels, probes, knn); }, reps);
        row("knn_batch", ts, tp, a == b);
    }

    // Shared synthetic dataset for the two grouping/episode kernels.
    SynthSpec spec;
    spec.num_coarse = 8;
    spec.fine_per_coarse = 4;
    spec.samples_per_fine = 40;
    spec.seed = 21;
    const CoarseDataset ds = generate_hierarchical(spec);

    { // pseudo-label: 8 classes x 160 samples
        const EmbedFn embed = [&](const Vector& x) { return encode(enc, x); };
        PseudoDataset a, b;
        const double ts = time_ms(
            [&] {
                SeededRng r(5);
                a = ref::pseudo_label(ds, embed, 40, r);
            },
            reps);
        const double tp = time_ms(
            [&] {
                SeededRng r(5);
                b = pseudo_label(ds, embed, 40, r);
            },
            reps);
        row("pseudo_label", ts, tp, a == b);
    }

    { // episode evaluation: 200 episodes, 5-way 1-shot
        const SamplePool pool = SamplePool::from_coarse(ds);
        std::vector<double> a, b;
        const double ts = time_ms(
            [&] { a = ref::eval_episode_accuracies(enc, pool, 5, 1, 15, 200, 9); }, reps);
        const double tp =
            time_ms([&] { b = eval_episode_accuracies(enc, pool, 5, 1, 15, 200, 9); }, reps);
        row("eval_episodes", ts, tp, a == b);
    }

    return 0;
}
