#include "egoact/train.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "egoact/checkpoint.hpp"

namespace egoact {

using nlohmann::json;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

enum Stream : std::uint64_t { kInit = 0, kShuffle = 1, kAugment = 2, kSubsample = 3, kDropout = 4 };

struct ChunkResult {
    Gradients<float> grads;
    double loss = 0.0;
    int correct = 0;
};

template <typename T>
void add_into(Gradients<T>& dst, const Gradients<T>& src) {
    std::vector<const Matrix<T>*> from;
    for_each_tensor(src, [&](const std::string&, const Matrix<T>& m) { from.push_back(&m); });
    std::size_t i = 0;
    for_each_tensor(dst, [&](const std::string&, Matrix<T>& m) { m += *from[i++]; });
}

void write_history(const std::filesystem::path& path, const std::vector<HistoryEntry>& history) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    for (const auto& e : history) out << to_json_line(e) << '\n';
}

std::vector<HistoryEntry> read_history(const std::filesystem::path& path) {
    std::vector<HistoryEntry> out;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) out.push_back(history_entry_from_json_line(line));
    }
    return out;
}

} // namespace

std::string to_string(ScheduleKind k) {
    switch (k) {
    case ScheduleKind::H2O: return "h2o";
    case ScheduleKind::FPHA: return "fpha";
    case ScheduleKind::Constant: return "constant";
    }
    return "?";
}

ScheduleKind schedule_kind_from_string(const std::string& s) {
    if (s == "h2o") return ScheduleKind::H2O;
    if (s == "fpha") return ScheduleKind::FPHA;
    if (s == "constant") return ScheduleKind::Constant;
    throw InvalidInput("unknown schedule '" + s + "' (expected h2o, fpha or constant)");
}

double lr_at(int epoch, const LrSchedule& schedule) {
    if (epoch < 0) throw InvalidInput("epoch must be >= 0");
    int halvings = 0;
    switch (schedule.kind) {
    case ScheduleKind::H2O:
        if (epoch >= 900) halvings = 1 + (epoch - 900) / 200;
        break;
    case ScheduleKind::FPHA: halvings = (epoch >= 100 ? 1 : 0) + (epoch >= 1000 ? 1 : 0); break;
    case ScheduleKind::Constant: break;
    }
    return std::ldexp(schedule.lr0, -halvings);
}

void TrainConfig::validate() const {
    if (batch_size < 1) throw InvalidInput("batch_size must be >= 1");
    if (!(schedule.lr0 > 0.0)) throw InvalidInput("lr0 must be > 0");
    if (epochs < 0) throw InvalidInput("epochs must be >= 0");
    if (threads < 1) throw InvalidInput("threads must be >= 1");
    if (checkpoint_every < 1) throw InvalidInput("checkpoint_every must be >= 1");
    if (seeds.empty()) throw InvalidInput("seed list must not be empty");
    augment.validate();
}

std::string to_json_line(const HistoryEntry& e) {
    json j;
    j["epoch"] = e.epoch;
    j["train_loss"] = e.train_loss;
    j["train_acc"] = e.train_acc;
    j["val_acc"] = e.val_acc;
    j["lr"] = e.lr;
    return j.dump();
}

HistoryEntry history_entry_from_json_line(const std::string& line) {
    try {
        const json j = json::parse(line);
        return {j.at("epoch").get<int>(), j.at("train_loss").get<double>(), j.at("train_acc").get<double>(),
                j.at("val_acc").get<double>(), j.at("lr").get<double>()};
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("malformed history record: ") + e.what());
    }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t epoch, std::uint64_t purpose, std::uint64_t index) {
    std::uint64_t h = splitmix64(seed);
    h = splitmix64(h ^ epoch);
    h = splitmix64(h ^ purpose);
    return splitmix64(h ^ index);
}

std::vector<int> predict_labels(const ClassifierParams<float>& params, std::span<const ActionSample> samples,
                                const DatasetLayout& layout) {
    std::vector<int> out;
    out.reserve(samples.size());
    for (const auto& s : samples) {
        out.push_back(
            predict_label(params, build_sequence(s, layout, params.config.seq_len, SubsampleMode::Uniform, 0)));
    }
    return out;
}

double evaluate_accuracy(const ClassifierParams<float>& params, std::span<const ActionSample> samples,
                         const DatasetLayout& layout) {
    if (samples.empty()) return 0.0;
    const auto pred = predict_labels(params, samples, layout);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) correct += pred[i] == samples[i].action_label ? 1 : 0;
    return static_cast<double>(correct) / static_cast<double>(samples.size());
}

TrainResult train_run(const TrainData& data, const NetConfig& net_cfg, const TrainConfig& cfg, std::uint64_t seed,
                      const TrainRunOptions& opts) {
    cfg.validate();
    net_cfg.validate();
    if (data.layout.frame_dim() != net_cfg.input_dim) {
        throw InvalidInput("dataset frame dimension " + std::to_string(data.layout.frame_dim()) +
                           " does not match network input_dim " + std::to_string(net_cfg.input_dim));
    }
    if (data.layout.num_classes != net_cfg.num_classes) {
        throw InvalidInput("dataset has " + std::to_string(data.layout.num_classes) + " classes, network " +
                           std::to_string(net_cfg.num_classes));
    }
    if (data.train.empty()) throw InvalidInput("training split is empty");

    TrainResult result;
    ClassifierParams<float> params = init_params(net_cfg, derive_seed(seed, 0, kInit, 0));
    AdamWState state = AdamWState::zeros(net_cfg);
    int start_epoch = 0;
    result.best_params = params;

    std::filesystem::path history_path;
    if (opts.out_dir) {
        std::filesystem::create_directories(*opts.out_dir);
        history_path = *opts.out_dir / "history.jsonl";
        const auto last_path = *opts.out_dir / "last.ckpt";
        if (opts.resume && std::filesystem::exists(last_path)) {
            Checkpoint last = load_checkpoint(last_path);
            if (!(last.params.config == net_cfg) || last.seed != seed || !last.optimizer) {
                throw InvalidInput("cannot resume: '" + last_path.string() + "' belongs to a different run");
            }
            params = std::move(last.params);
            state = std::move(*last.optimizer);
            start_epoch = last.rng_next_epoch;
            const json extra = json::parse(last.extra);
            result.best_epoch = extra.value("best_epoch", -1);
            result.best_val_acc = extra.value("best_val_acc", 0.0);
            if (result.best_epoch >= 0) result.best_params = load_checkpoint(*opts.out_dir / "best.ckpt").params;
            for (auto& e : read_history(history_path)) {
                if (e.epoch < start_epoch) result.history.push_back(e);
            }
        }
        write_history(history_path, result.history);
    }

    const int n_train = static_cast<int>(data.train.size());
    const int threads = std::max(1, std::min(cfg.threads, cfg.batch_size));
    std::vector<int> order(static_cast<std::size_t>(n_train));

    auto run_chunk = [&](std::span<const int> ids, int epoch, int batch_n) {
        ChunkResult r{zero_params<float>(net_cfg)};
        const auto e = static_cast<std::uint64_t>(epoch);
        for (int idx : ids) {
            const auto ui = static_cast<std::uint64_t>(idx);
            const ActionSample& raw = data.train[static_cast<std::size_t>(idx)];
            const ActionSample aug = apply_augmentations(raw, cfg.augment, derive_seed(seed, e, kAugment, ui));
            const SequenceTensor seq = build_sequence(aug, data.layout, net_cfg.seq_len, SubsampleMode::Random,
                                                      derive_seed(seed, e, kSubsample, ui));
            const auto cache = forward(params, seq, {RunMode::Train, derive_seed(seed, e, kDropout, ui)});
            const std::span<const float> logits(cache.logits.data(), static_cast<std::size_t>(cache.logits.size()));
            const auto ce = cross_entropy<float>(logits, raw.action_label);
            r.loss += ce.loss;
            const auto pred = std::max_element(logits.begin(), logits.end()) - logits.begin();
            r.correct += pred == raw.action_label ? 1 : 0;
            const Eigen::Matrix<float, 1, Eigen::Dynamic> upstream = ce.grad / static_cast<float>(batch_n);
            backward_accumulate(params, cache, upstream, r.grads);
        }
        return r;
    };

    for (int epoch = start_epoch; epoch < cfg.epochs; ++epoch) {
        const double lr = lr_at(epoch, cfg.schedule);
        std::iota(order.begin(), order.end(), 0);
        std::mt19937_64 shuffle_rng(derive_seed(seed, static_cast<std::uint64_t>(epoch), kShuffle, 0));
        std::shuffle(order.begin(), order.end(), shuffle_rng);

        double loss_sum = 0.0;
        int correct = 0;
        for (int begin = 0; begin < n_train; begin += cfg.batch_size) {
            const int end = std::min(n_train, begin + cfg.batch_size);
            const int batch_n = end - begin;
            const std::span<const int> batch(order.data() + begin, static_cast<std::size_t>(batch_n));

            std::vector<ChunkResult> parts;
            if (threads == 1) {
                parts.push_back(run_chunk(batch, epoch, batch_n));
            } else {
                const int chunks = std::min(threads, batch_n);
                parts.resize(static_cast<std::size_t>(chunks));
                std::vector<std::thread> workers;
                for (int c = 0; c < chunks; ++c) {
                    const int lo = batch_n * c / chunks;
                    const int hi = batch_n * (c + 1) / chunks;
                    workers.emplace_back([&, c, lo, hi] {
                        parts[static_cast<std::size_t>(c)] =
                            run_chunk(batch.subspan(static_cast<std::size_t>(lo), static_cast<std::size_t>(hi - lo)),
                                      epoch, batch_n);
                    });
                }
                for (auto& w : workers) w.join();
            }
            // Fixed reduction order.
            for (std::size_t c = 1; c < parts.size(); ++c) add_into(parts[0].grads, parts[c].grads);
            for (const auto& p : parts) {
                loss_sum += p.loss;
                correct += p.correct;
            }
            adamw_step(params, parts[0].grads, state, lr, cfg.adamw);
        }

        HistoryEntry entry;
        entry.epoch = epoch;
        entry.train_loss = loss_sum / n_train;
        entry.train_acc = static_cast<double>(correct) / n_train;
        entry.val_acc = evaluate_accuracy(params, data.val, data.layout);
        entry.lr = lr;
        result.history.push_back(entry);

        const bool improved = data.val.empty() || result.best_epoch < 0 || entry.val_acc > result.best_val_acc;
        if (improved) {
            result.best_epoch = epoch;
            result.best_val_acc = entry.val_acc;
            result.best_params = params;
        }

        if (opts.out_dir) {
            {
                std::ofstream out(history_path, std::ios::binary | std::ios::app);
                out << to_json_line(entry) << '\n';
            }
            json extra = {{"best_epoch", result.best_epoch}, {"best_val_acc", result.best_val_acc}};
            if (improved) {
                Checkpoint best{params, epoch, seed, epoch + 1, std::nullopt, extra.dump()};
                save_checkpoint(best, *opts.out_dir / "best.ckpt");
            }
            if ((epoch + 1) % cfg.checkpoint_every == 0 || epoch + 1 == cfg.epochs) {
                Checkpoint last{params, epoch, seed, epoch + 1, state, extra.dump()};
                save_checkpoint(last, *opts.out_dir / "last.ckpt");
            }
        }
        if (opts.on_epoch) opts.on_epoch(entry);
    }

    result.final_params = params;
    return result;
}

SeedSummary multi_seed_report(std::span<const double> accuracies) {
    if (accuracies.size() < 2) throw InvalidInput("multi-seed report needs at least two runs");
    SeedSummary s;
    s.n = accuracies.size();
    const double n = static_cast<double>(s.n);
    s.mean = std::accumulate(accuracies.begin(), accuracies.end(), 0.0) / n;
    double ss = 0.0;
    for (double a : accuracies) ss += (a - s.mean) * (a - s.mean);
    s.std = std::sqrt(ss / (n - 1.0));
    s.best = *std::max_element(accuracies.begin(), accuracies.end());
    return s;
}

std::string format_summary(const SeedSummary& s) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(2);
    os << s.mean << "% ± " << s.std << " (best " << s.best << "%, n=" << s.n << ")";
    return os.str();
}

} // namespace egoact
