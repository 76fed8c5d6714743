#include <doctest.h>

#include <fstream>
#include <iterator>
#include <random>

#include "egoact/checkpoint.hpp"
#include "egoact/error.hpp"
#include "egoact/optim.hpp"
#include "egoact/train.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace egoact;
using namespace egoact::testing;

namespace {

std::string read_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

NetConfig toy_net() {
    NetConfig cfg = NetConfig::h2o();
    cfg.num_classes = 3;
    return cfg;
}

// Four short clips, three classes, separable by where the right hand sits.
TrainData toy_data() {
    TrainData d;
    d.layout = DatasetLayout::two_hands(3, 8);
    for (int i = 0; i < 4; ++i) {
        ActionSample s;
        s.action_label = i % 3;
        s.sequence_id = "toy_" + std::to_string(i);
        for (int f = 0; f < 8 + i; ++f) {
            FramePose fr = make_frame(f);
            fr.right = make_hand(0.2f + 0.25f * static_cast<float>(s.action_label), 0.3f + 0.01f * f);
            s.frames.push_back(fr);
        }
        d.train.push_back(s);
    }
    d.val = d.train;
    return d;
}

TrainConfig toy_train(int epochs) {
    TrainConfig c;
    c.epochs = epochs;
    c.seeds = {0};
    c.augment = AugmentConfig::none();
    c.schedule.kind = ScheduleKind::Constant;
    c.checkpoint_every = 2;
    return c;
}

} // namespace

TEST_CASE("AdamW first step closed form") {
    double theta = 1.0, g = 1.0, m = 0.0, v = 0.0;
    AdamWConfig cfg;
    cfg.weight_decay = 0.0;
    adamw_update<double>({&theta, 1}, {&g, 1}, {&m, 1}, {&v, 1}, 1, 0.1, cfg);
    CHECK(std::abs(theta - (1.0 - 0.1 * (1.0 / (1.0 + 1e-8)))) < 1e-12);
    CHECK(m == doctest::Approx(0.1));
    CHECK(v == doctest::Approx(0.001));
}

TEST_CASE("AdamW on a one-dimensional quadratic") {
    // loss = 0.5 * a * (theta - c)^2, gradient a * (theta - c).
    const double a = 3.0, c = -0.4, lr = 0.01;
    double theta = 0.7, m = 0.0, v = 0.0;
    AdamWConfig cfg;
    cfg.weight_decay = 0.05;
    double ref_theta = theta, ref_m = 0.0, ref_v = 0.0;
    for (int step = 1; step <= 5; ++step) {
        double g = a * (theta - c);
        adamw_update<double>({&theta, 1}, {&g, 1}, {&m, 1}, {&v, 1}, step, lr, cfg);

        const double rg = a * (ref_theta - c);
        ref_theta *= 1.0 - lr * cfg.weight_decay;
        ref_m = 0.9 * ref_m + 0.1 * rg;
        ref_v = 0.999 * ref_v + 0.001 * rg * rg;
        const double mh = ref_m / (1.0 - std::pow(0.9, step));
        const double vh = ref_v / (1.0 - std::pow(0.999, step));
        ref_theta -= lr * mh / (std::sqrt(vh) + 1e-8);
        CHECK(std::abs(theta - ref_theta) < 1e-12);
    }
}

TEST_CASE("AdamW with zero gradient") {
    AdamWConfig cfg;
    cfg.weight_decay = 0.0;
    double theta = 2.5, g = 0.0, m = 0.4, v = 0.3;
    adamw_update<double>({&theta, 1}, {&g, 1}, {&m, 1}, {&v, 1}, 3, 0.1, cfg);
    CHECK(m == doctest::Approx(0.36));
    CHECK(v == doctest::Approx(0.2997));
    CHECK(m < 0.4);

    double t2 = 2.5, m2 = 0.0, v2 = 0.0;
    adamw_update<double>({&t2, 1}, {&g, 1}, {&m2, 1}, {&v2, 1}, 1, 0.1, cfg);
    CHECK(t2 == 2.5);

    cfg.weight_decay = 0.01;
    double t3 = 2.5, m3 = 0.0, v3 = 0.0;
    adamw_update<double>({&t3, 1}, {&g, 1}, {&m3, 1}, {&v3, 1}, 1, 0.1, cfg);
    CHECK(t3 == 2.5 - 0.1 * 0.01 * 2.5);
}

TEST_CASE("adamw_step rejects non-finite gradients") {
    const NetConfig cfg = toy_net();
    auto params = init_params(cfg, 0);
    const auto before = params;
    auto grads = zero_params<float>(cfg);
    grads.layers[1].mlp1_weight(2, 3) = std::numeric_limits<float>::quiet_NaN();
    AdamWState state = AdamWState::zeros(cfg);
    try {
        adamw_step(params, grads, state, 1e-3, {});
        FAIL("expected rejection");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("layers.1.mlp.fc1.weight") != std::string::npos);
    }
    CHECK(state.step == 0);
    CHECK(params.head_weight == before.head_weight);
    CHECK(params.version == before.version);

    grads = zero_params<float>(cfg);
    adamw_step(params, grads, state, 1e-3, {});
    CHECK(state.step == 1);
    CHECK(params.version == before.version + 1);
}

TEST_CASE("learning-rate schedules") {
    LrSchedule h2o;
    CHECK(lr_at(0, h2o) == 0.001);
    CHECK(lr_at(899, h2o) == 0.001);
    CHECK(lr_at(900, h2o) == 0.0005);
    CHECK(lr_at(1099, h2o) == 0.0005);
    CHECK(lr_at(1100, h2o) == 0.00025);
    LrSchedule fpha{ScheduleKind::FPHA, 0.001};
    CHECK(lr_at(99, fpha) == 0.001);
    CHECK(lr_at(100, fpha) == 0.0005);
    CHECK(lr_at(1000, fpha) == 0.00025);
    for (const auto& s : {h2o, fpha, LrSchedule{ScheduleKind::Constant, 0.01}}) {
        double prev = lr_at(0, s);
        for (int e = 1; e < 2000; ++e) {
            const double cur = lr_at(e, s);
            CHECK(cur <= prev);
            prev = cur;
        }
    }
    CHECK_THROWS_AS(lr_at(-1, h2o), InvalidInput);
    CHECK(schedule_kind_from_string(to_string(ScheduleKind::FPHA)) == ScheduleKind::FPHA);
}

TEST_CASE("multi-seed report") {
    const std::vector<double> same{90, 90, 90};
    const auto s0 = multi_seed_report(same);
    CHECK(s0.mean == 90.0);
    CHECK(s0.std == 0.0);

    const std::vector<double> pair{88, 92};
    const auto s1 = multi_seed_report(pair);
    CHECK(s1.mean == doctest::Approx(90.0));
    CHECK(s1.std == doctest::Approx(std::sqrt(8.0)));
    CHECK(s1.best == 92.0);

    CHECK(format_summary({89.17, 1.56, 91.32, 5}) == "89.17% ± 1.56 (best 91.32%, n=5)");
    const std::vector<double> one{90};
    CHECK_THROWS_AS(multi_seed_report(one), InvalidInput);
}

TEST_CASE("train config validation") {
    TrainConfig c;
    CHECK_NOTHROW(c.validate());
    c.batch_size = 0;
    CHECK_THROWS_AS(c.validate(), InvalidInput);
    c = TrainConfig{};
    c.schedule.lr0 = 0.0;
    CHECK_THROWS_AS(c.validate(), InvalidInput);
}

TEST_CASE("two epochs on a toy set") {
    const auto dir = scratch_dir("train_toy");
    TrainRunOptions opts;
    opts.out_dir = dir;
    const auto r = train_run(toy_data(), toy_net(), toy_train(2), 0, opts);
    CHECK(r.history.size() == 2);
    CHECK(r.history[1].epoch == 1);
    REQUIRE(std::filesystem::exists(dir / "best.ckpt"));
    REQUIRE(std::filesystem::exists(dir / "last.ckpt"));

    const std::string bytes = read_bytes(dir / "last.ckpt");
    const Checkpoint loaded = load_checkpoint(dir / "last.ckpt");
    CHECK(serialize_checkpoint(loaded) == bytes);
    CHECK(loaded.params.config == toy_net());
    CHECK(loaded.rng_next_epoch == 2);
    CHECK(loaded.optimizer.has_value());

    save_checkpoint(loaded, dir / "again.ckpt");
    CHECK(read_bytes(dir / "again.ckpt") == bytes);

    std::ifstream hist(dir / "history.jsonl");
    std::string line;
    int lines = 0;
    while (std::getline(hist, line)) {
        const auto e = history_entry_from_json_line(line);
        CHECK(e == r.history[static_cast<std::size_t>(lines)]);
        ++lines;
    }
    CHECK(lines == 2);
}

TEST_CASE("training is reproducible for a fixed seed") {
    const auto a = train_run(toy_data(), toy_net(), toy_train(3), 5);
    const auto b = train_run(toy_data(), toy_net(), toy_train(3), 5);
    const auto c = train_run(toy_data(), toy_net(), toy_train(3), 6);
    CHECK(a.history == b.history);
    CHECK(a.final_params.head_weight == b.final_params.head_weight);
    CHECK(a.history != c.history);
}

TEST_CASE("resume continues an interrupted run exactly") {
    const auto full_dir = scratch_dir("resume_full");
    const auto part_dir = scratch_dir("resume_part");
    TrainRunOptions full_opts;
    full_opts.out_dir = full_dir;
    const auto full = train_run(toy_data(), toy_net(), toy_train(6), 3, full_opts);

    TrainRunOptions part_opts;
    part_opts.out_dir = part_dir;
    train_run(toy_data(), toy_net(), toy_train(4), 3, part_opts);
    part_opts.resume = true;
    const auto resumed = train_run(toy_data(), toy_net(), toy_train(6), 3, part_opts);

    CHECK(resumed.history == full.history);
    CHECK(resumed.best_epoch == full.best_epoch);
    CHECK(read_bytes(part_dir / "history.jsonl") == read_bytes(full_dir / "history.jsonl"));
    CHECK(read_bytes(part_dir / "last.ckpt") == read_bytes(full_dir / "last.ckpt"));
    CHECK(read_bytes(part_dir / "best.ckpt") == read_bytes(full_dir / "best.ckpt"));

    TrainRunOptions other = part_opts;
    CHECK_THROWS_AS(train_run(toy_data(), toy_net(), toy_train(6), 4, other), InvalidInput);
}

TEST_CASE("model selection keeps the earliest best epoch") {
    const auto r = train_run(toy_data(), toy_net(), toy_train(12), 1);
    double best = -1.0;
    int epoch = -1;
    for (const auto& e : r.history) {
        if (e.val_acc > best) {
            best = e.val_acc;
            epoch = e.epoch;
        }
    }
    CHECK(r.best_epoch == epoch);
    CHECK(r.best_val_acc == best);
    CHECK(evaluate_accuracy(r.best_params, toy_data().val, toy_data().layout) == doctest::Approx(best));

    TrainData no_val = toy_data();
    no_val.val.clear();
    const auto last = train_run(no_val, toy_net(), toy_train(3), 1);
    CHECK(last.best_epoch == 2);
}

TEST_CASE("loss on a repeated batch decreases") {
    const NetConfig cfg = reduced_config();
    auto params = cast_params<float>(random_double_params(cfg, 21, 0.02));
    params.final_norm_scale.setOnes();
    for (auto& l : params.layers) {
        l.norm1_scale.setOnes();
        l.norm2_scale.setOnes();
    }
    std::mt19937_64 rng(22);
    std::uniform_real_distribution<float> u(0.0f, 1.0f);
    std::vector<Matrix<float>> batch;
    std::vector<int> labels;
    for (int i = 0; i < 8; ++i) {
        Matrix<float> x(cfg.seq_len, cfg.input_dim);
        for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = u(rng);
        batch.push_back(x);
        labels.push_back(i % cfg.num_classes);
    }
    AdamWState state = AdamWState::zeros(cfg);
    std::vector<double> losses;
    for (int epoch = 0; epoch < 50; ++epoch) {
        auto grads = zero_params<float>(cfg);
        double loss = 0.0;
        for (std::size_t i = 0; i < batch.size(); ++i) {
            const auto cache = forward(params, batch[i]);
            const std::span<const float> logits(cache.logits.data(), static_cast<std::size_t>(cache.logits.size()));
            const auto ce = cross_entropy<float>(logits, labels[i]);
            loss += ce.loss / static_cast<double>(batch.size());
            const Eigen::Matrix<float, 1, Eigen::Dynamic> up = ce.grad / static_cast<float>(batch.size());
            backward_accumulate(params, cache, up, grads);
        }
        losses.push_back(loss);
        adamw_step(params, grads, state, 1e-3, {});
    }
    int increases = 0;
    for (std::size_t i = 1; i < losses.size(); ++i) increases += losses[i] > losses[i - 1] ? 1 : 0;
    CHECK(increases <= 5);
    CHECK(losses.back() < losses.front());
}

TEST_CASE("layout mismatch is rejected") {
    NetConfig wrong = toy_net();
    wrong.num_classes = 4;
    CHECK_THROWS_AS(train_run(toy_data(), wrong, toy_train(1), 0), InvalidInput);
    wrong = NetConfig::fpha();
    wrong.num_classes = 3;
    CHECK_THROWS_AS(train_run(toy_data(), wrong, toy_train(1), 0), InvalidInput);
}

TEST_CASE("threaded training matches in accuracy bookkeeping") {
    TrainConfig c = toy_train(2);
    c.threads = 3;
    const auto r = train_run(toy_data(), toy_net(), c, 0);
    CHECK(r.history.size() == 2);
    for (const auto& e : r.history) CHECK(std::isfinite(e.train_loss));
}

TEST_CASE("checkpoint rejects corrupted bytes") {
    Checkpoint ck;
    ck.params = init_params(toy_net(), 4);
    ck.epoch = 7;
    ck.seed = 9;
    ck.rng_next_epoch = 8;
    const std::string bytes = serialize_checkpoint(ck);
    const Checkpoint back = deserialize_checkpoint(bytes);
    CHECK(back.epoch == 7);
    CHECK(back.seed == 9);
    CHECK_FALSE(back.optimizer.has_value());
    CHECK(serialize_checkpoint(back) == bytes);

    CHECK_THROWS_AS(deserialize_checkpoint(bytes.substr(0, bytes.size() - 3)), InvalidInput);
    CHECK_THROWS_AS(deserialize_checkpoint(bytes + "x"), InvalidInput);
    std::string magic = bytes;
    magic[0] = 'X';
    CHECK_THROWS_AS(deserialize_checkpoint(magic), InvalidInput);
}

TEST_CASE("derived seeds separate streams") {
    CHECK(derive_seed(1, 2, 3, 4) == derive_seed(1, 2, 3, 4));
    CHECK(derive_seed(1, 2, 3, 4) != derive_seed(1, 2, 3, 5));
    CHECK(derive_seed(1, 2, 3, 4) != derive_seed(1, 2, 4, 4));
    CHECK(derive_seed(1, 2, 3, 4) != derive_seed(1, 3, 3, 4));
    CHECK(derive_seed(1, 2, 3, 4) != derive_seed(2, 2, 3, 4));
}
