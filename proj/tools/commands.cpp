#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include <sys/utsname.h>

#include <CLI11.hpp>

#include "egoact/augment.hpp"
#include "egoact/checkpoint.hpp"
#include "egoact/config_json.hpp"
#include "egoact/dataset.hpp"
#include "egoact/error.hpp"
#include "egoact/heatmap.hpp"
#include "egoact/importers.hpp"
#include "egoact/metrics.hpp"
#include "egoact/synth.hpp"

namespace egoact::cli {

using nlohmann::json;

namespace {

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
    try {
        return fn();
    } catch (const InvalidInput& e) {
        err << "error: " << e.what() << "\n";
        return kInvalidInput;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kRuntimeFailure;
    }
}

json read_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InvalidInput(path.string() + ": " + e.what());
    }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << text << "\n";
}

std::string percent(double fraction) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << fraction * 100.0;
    return os.str();
}

NetConfig resolve_net_config(const json& overrides, const DatasetLayout& layout) {
    NetConfig base = NetConfig::h2o();
    base.input_dim = layout.frame_dim();
    base.num_classes = layout.num_classes;
    NetConfig cfg = net_config_from_json(overrides, base);
    if (cfg.input_dim != layout.frame_dim() || cfg.num_classes != layout.num_classes) {
        throw InvalidInput("net config (input_dim " + std::to_string(cfg.input_dim) + ", classes " +
                           std::to_string(cfg.num_classes) + ") does not match the dataset layout (frame_dim " +
                           std::to_string(layout.frame_dim()) + ", classes " + std::to_string(layout.num_classes) +
                           ")");
    }
    return cfg;
}

void check_compatible(const NetConfig& cfg, const DatasetLayout& layout) {
    if (cfg.input_dim != layout.frame_dim()) {
        throw InvalidInput("checkpoint expects frame dimension " + std::to_string(cfg.input_dim) +
                           " but the dataset provides " + std::to_string(layout.frame_dim()));
    }
    if (cfg.num_classes != layout.num_classes) {
        throw InvalidInput("checkpoint predicts " + std::to_string(cfg.num_classes) + " classes but the dataset has " +
                           std::to_string(layout.num_classes));
    }
}

std::vector<int> labels_of(const std::vector<ActionSample>& samples) {
    std::vector<int> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.action_label);
    return out;
}

MetricReport classification_report(const ClassifierParams<float>& params, const std::vector<ActionSample>& samples,
                                   const DatasetLayout& layout) {
    MetricReport r;
    r.n = samples.size();
    const auto pred = predict_labels(params, samples, layout);
    const auto truth = labels_of(samples);
    if (!samples.empty()) r.accuracy = accuracy(pred, truth);
    r.confusion = confusion(pred, truth, layout.num_classes);
    return r;
}

// EPE/PCK/AUC of the predicted hand stream against ground truth, in pixels.
void add_pose_metrics(MetricReport& report, const DatasetManifest& manifest, const std::string& split) {
    std::vector<PoseEvalRecord> records;
    for (const auto& id : manifest.split(split)) {
        const ClipRecord clip = load_clip_record(manifest.clip_path(id));
        for (const auto& f : clip.frames) {
            auto add = [&](const HandPose& gt, const std::optional<HandPose>& pred) {
                if (!pred || !gt.present || !pred->present) return;
                const double width = hand_bbox_width(gt);
                if (width <= 0.0) return;
                records.push_back({*pred, gt, width});
            };
            add(f.left, f.predicted_left);
            add(f.right, f.predicted_right);
        }
    }
    if (records.empty()) return;
    report.epe = epe(records);
    report.pck02 = pck(records, 0.2);
    report.auc = auc(records);
}

json machine_descriptor() {
    json m;
    utsname u{};
    if (uname(&u) == 0) {
        m["system"] = u.sysname;
        m["release"] = u.release;
        m["machine"] = u.machine;
    }
    m["hardware_threads"] = std::thread::hardware_concurrency();
#if defined(__VERSION__)
    m["compiler"] = __VERSION__;
#endif
#if defined(NDEBUG)
    m["optimized_build"] = true;
#else
    m["optimized_build"] = false;
#endif
    return m;
}

} // namespace

TrainFileConfig load_train_config(const std::filesystem::path& path) {
    const json doc = read_json(path);
    if (!doc.is_object()) throw InvalidInput(path.string() + ": config must be a JSON object");
    if (doc.value("format_version", 0) != kTrainConfigFormatVersion) {
        throw InvalidInput(path.string() + ": unsupported or missing format_version");
    }
    TrainFileConfig cfg;
    try {
        for (const auto& [key, _] : doc.items()) {
            if (key != "format_version" && key != "manifest" && key != "net" && key != "train" && key != "splits") {
                throw InvalidInput("unknown key '" + key + "'");
            }
        }
        std::filesystem::path manifest = doc.at("manifest").get<std::string>();
        cfg.manifest = std::filesystem::absolute(manifest.is_absolute() ? manifest : path.parent_path() / manifest);
        if (doc.contains("net")) cfg.net_overrides = doc["net"];
        if (doc.contains("splits")) {
            const auto& s = doc["splits"];
            cfg.train_split = s.value("train", cfg.train_split);
            cfg.val_split = s.value("val", cfg.val_split);
            cfg.test_split = s.value("test", cfg.test_split);
        }
        const json t = doc.value("train", json::object());
        TrainConfig& tc = cfg.train;
        for (const auto& [key, value] : t.items()) {
            if (key == "batch_size") {
                tc.batch_size = value.get<int>();
            } else if (key == "lr0") {
                tc.schedule.lr0 = value.get<double>();
            } else if (key == "schedule") {
                tc.schedule.kind = schedule_kind_from_string(value.get<std::string>());
            } else if (key == "epochs") {
                tc.epochs = value.get<int>();
            } else if (key == "weight_decay") {
                tc.adamw.weight_decay = value.get<double>();
            } else if (key == "betas") {
                const auto b = value.get<std::vector<double>>();
                if (b.size() != 2) throw InvalidInput("train.betas must be [beta1, beta2]");
                tc.adamw.beta1 = b[0];
                tc.adamw.beta2 = b[1];
            } else if (key == "eps") {
                tc.adamw.eps = value.get<double>();
            } else if (key == "seeds") {
                tc.seeds = value.get<std::vector<std::uint64_t>>();
            } else if (key == "threads") {
                tc.threads = value.get<int>();
            } else if (key == "checkpoint_every") {
                tc.checkpoint_every = value.get<int>();
            } else if (key == "train_pose_source") {
                tc.train_pose_source = pose_source_from_string(value.get<std::string>());
            } else if (key == "eval_pose_source") {
                tc.eval_pose_source = pose_source_from_string(value.get<std::string>());
            } else if (key == "augment") {
                tc.augment = augment_config_from_json(value);
            } else {
                throw InvalidInput("unknown key 'train." + key + "'");
            }
        }
        tc.validate();
    } catch (const json::exception& e) {
        throw InvalidInput(path.string() + ": " + e.what());
    } catch (const InvalidInput& e) {
        throw InvalidInput(path.string() + ": " + e.what());
    }
    return cfg;
}

json to_json(const TrainFileConfig& cfg) {
    const TrainConfig& t = cfg.train;
    return {
        {"format_version", kTrainConfigFormatVersion},
        {"manifest", cfg.manifest.string()},
        {"net", cfg.net_overrides},
        {"splits", {{"train", cfg.train_split}, {"val", cfg.val_split}, {"test", cfg.test_split}}},
        {"train",
         {
             {"batch_size", t.batch_size},
             {"lr0", t.schedule.lr0},
             {"schedule", to_string(t.schedule.kind)},
             {"epochs", t.epochs},
             {"weight_decay", t.adamw.weight_decay},
             {"betas", {t.adamw.beta1, t.adamw.beta2}},
             {"eps", t.adamw.eps},
             {"seeds", t.seeds},
             {"threads", t.threads},
             {"checkpoint_every", t.checkpoint_every},
             {"train_pose_source", to_string(t.train_pose_source)},
             {"eval_pose_source", to_string(t.eval_pose_source)},
             {"augment", egoact::to_json(t.augment)},
         }},
    };
}

int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        TrainFileConfig cfg = load_train_config(args.config);
        if (args.seed) cfg.train.seeds = {*args.seed};
        if (args.deterministic) cfg.train.threads = 1;

        const DatasetManifest manifest = load_manifest(cfg.manifest);
        const NetConfig net_cfg = resolve_net_config(cfg.net_overrides, manifest.layout);

        TrainData data;
        data.layout = manifest.layout;
        data.train = load_samples(manifest, cfg.train_split, cfg.train.train_pose_source);
        if (manifest.splits.contains(cfg.val_split)) {
            data.val = load_samples(manifest, cfg.val_split, cfg.train.eval_pose_source);
        }
        std::vector<ActionSample> test;
        if (manifest.splits.contains(cfg.test_split)) {
            test = load_samples(manifest, cfg.test_split, cfg.train.eval_pose_source);
        }

        std::filesystem::create_directories(args.out);
        json snapshot = to_json(cfg);
        snapshot["net"] = egoact::to_json(net_cfg);
        write_text(args.out / "config.json", snapshot.dump(2));
        json env = {
            {"machine", machine_descriptor()},
            {"seeds", cfg.train.seeds},
            {"threads", cfg.train.threads},
            {"deterministic", args.deterministic},
            {"format_versions",
             {{"dataset", kDatasetFormatVersion},
              {"checkpoint", kCheckpointFormatVersion},
              {"train_config", kTrainConfigFormatVersion}}},
        };
        write_text(args.out / "environment.json", env.dump(2));

        out << "training " << param_count(net_cfg) << " parameters on " << data.train.size() << " clips ("
            << data.val.size() << " val, " << test.size() << " test), " << cfg.train.seeds.size() << " seed(s)\n";

        std::vector<double> accuracies;
        json runs = json::array();
        for (const auto seed : cfg.train.seeds) {
            const auto run_dir = args.out / ("seed_" + std::to_string(seed));
            TrainRunOptions opts;
            opts.out_dir = run_dir;
            opts.resume = args.resume;
            const TrainResult result = train_run(data, net_cfg, cfg.train, seed, opts);

            MetricReport report = classification_report(result.best_params, test, manifest.layout);
            write_text(run_dir / "report.json", report.to_json());
            const double acc = report.accuracy.value_or(0.0);
            accuracies.push_back(acc * 100.0);
            runs.push_back({{"seed", seed},
                            {"best_epoch", result.best_epoch},
                            {"best_val_acc", result.best_val_acc},
                            {"test_acc", acc}});
            out << "seed " << seed << ": best epoch " << result.best_epoch << ", val " << percent(result.best_val_acc)
                << "%, test " << percent(acc) << "%\n";
        }

        json summary = {{"runs", runs}, {"n", accuracies.size()}};
        if (accuracies.size() >= 2) {
            const SeedSummary s = multi_seed_report(accuracies);
            summary["mean"] = s.mean;
            summary["std"] = s.std;
            summary["best"] = s.best;
            out << "test accuracy: " << format_summary(s) << "\n";
        } else {
            summary["mean"] = accuracies.front();
            summary["best"] = accuracies.front();
            out << "test accuracy: " << std::fixed << std::setprecision(2) << accuracies.front() << "% (n=1)\n";
        }
        write_text(args.out / "report.json", summary.dump(2));
        return kOk;
    });
}

int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (!std::filesystem::exists(args.checkpoint)) {
            throw InvalidInput("checkpoint not found: '" + args.checkpoint.string() + "'");
        }
        const Checkpoint ckpt = load_checkpoint(args.checkpoint);
        const DatasetManifest manifest = load_manifest(args.manifest);
        check_compatible(ckpt.params.config, manifest.layout);
        const auto samples = load_samples(manifest, args.split, pose_source_from_string(args.pose_source));
        MetricReport report = classification_report(ckpt.params, samples, manifest.layout);
        add_pose_metrics(report, manifest, args.split);

        out << "split " << args.split << " (" << args.pose_source << "), n=" << report.n << "\n";
        out << "accuracy  " << (report.accuracy ? percent(*report.accuracy) + "%" : "n/a") << "\n";
        if (report.epe) {
            out << "EPE       " << std::fixed << std::setprecision(3) << *report.epe << " px\n";
            out << "PCK@0.2   " << percent(*report.pck02) << "%\n";
            out << "AUC       " << std::setprecision(4) << *report.auc << "\n";
        }
        if (args.report) write_text(*args.report, report.to_json());
        return kOk;
    });
}

std::string render_ablation_table(const std::vector<AblationRow>& rows) {
    std::size_t name_w = std::string("Method").size();
    for (const auto& r : rows) name_w = std::max(name_w, r.name.size());
    auto mark = [](bool on) { return on ? "yes" : "no "; };
    std::ostringstream os;
    os << std::left << std::setw(static_cast<int>(name_w)) << "Method"
       << " | Left Hand | Right Hand | Obj Pose | Acc. [%]\n";
    os << std::string(name_w, '-') << "-|-----------|------------|----------|---------\n";
    for (const auto& r : rows) {
        os << std::left << std::setw(static_cast<int>(name_w)) << r.name << " | " << std::setw(9) << mark(r.left)
           << " | " << std::setw(10) << mark(r.right) << " | " << std::setw(8) << mark(r.object) << " | "
           << std::right << std::fixed << std::setprecision(2) << std::setw(8) << r.accuracy_percent << "\n";
    }
    return os.str();
}

int cmd_ablate(const AblateArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (args.masks.empty()) throw InvalidInput("ablate needs at least one --mask configuration");
        std::vector<std::vector<MaskTarget>> configs;
        for (const auto& spec : args.masks) {
            std::vector<MaskTarget> targets;
            std::stringstream ss(spec);
            std::string item;
            while (std::getline(ss, item, ',')) {
                if (!item.empty()) targets.push_back(mask_target_from_string(item));
            }
            if (targets.empty()) throw InvalidInput("empty mask configuration '" + spec + "'");
            configs.push_back(std::move(targets));
        }
        if (!std::filesystem::exists(args.checkpoint)) {
            throw InvalidInput("checkpoint not found: '" + args.checkpoint.string() + "'");
        }
        const Checkpoint ckpt = load_checkpoint(args.checkpoint);
        const DatasetManifest manifest = load_manifest(args.manifest);
        check_compatible(ckpt.params.config, manifest.layout);
        const auto samples = load_samples(manifest, args.split, pose_source_from_string(args.pose_source));

        std::vector<AblationRow> rows;
        json reports = json::array();
        auto evaluate = [&](const std::string& name, const std::vector<MaskTarget>& targets) {
            std::vector<ActionSample> masked = samples;
            for (auto& s : masked) {
                for (auto& f : s.frames) {
                    for (auto t : targets) f = mask_part(f, t);
                }
            }
            const MetricReport r = classification_report(ckpt.params, masked, manifest.layout);
            AblationRow row{name};
            json names = json::array();
            for (auto t : targets) {
                names.push_back(to_string(t));
                if (t == MaskTarget::Left) row.left = false;
                if (t == MaskTarget::Right) row.right = false;
                if (t == MaskTarget::Object) row.object = false;
            }
            row.accuracy_percent = r.accuracy.value_or(0.0) * 100.0;
            rows.push_back(row);
            json rj = json::parse(r.to_json());
            rj["name"] = name;
            rj["masked"] = names;
            reports.push_back(rj);
        };
        evaluate("full", {});
        for (std::size_t i = 0; i < configs.size(); ++i) evaluate("mask:" + args.masks[i], configs[i]);

        out << render_ablation_table(rows);
        if (args.report) write_text(*args.report, reports.dump(2));
        return kOk;
    });
}

LatencyStats measure_forward_latency(const ClassifierParams<float>& params, int trials, int warmup,
                                     std::uint64_t seed) {
    if (trials < 1) throw InvalidInput("trials must be >= 1");
    if (warmup < 0) throw InvalidInput("warmup must be >= 0");
    const NetConfig& cfg = params.config;
    SequenceTensor seq(cfg.seq_len, cfg.input_dim);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> unit(0.0f, 1.0f);
    for (auto& v : seq.data) v = unit(rng);
    seq.valid_frames = cfg.seq_len;

    float sink = 0.0f;
    for (int i = 0; i < warmup; ++i) sink += predict_logits(params, seq)[0];
    std::vector<double> ms;
    ms.reserve(static_cast<std::size_t>(trials));
    for (int i = 0; i < trials; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        sink += predict_logits(params, seq)[0];
        const auto t1 = std::chrono::steady_clock::now();
        ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    if (!std::isfinite(sink)) throw Error("forward produced non-finite logits");

    LatencyStats s;
    s.n = ms.size();
    s.mean_ms = pairwise_sum(ms) / static_cast<double>(s.n);
    double ss = 0.0;
    for (double v : ms) ss += (v - s.mean_ms) * (v - s.mean_ms);
    s.std_ms = s.n > 1 ? std::sqrt(ss / static_cast<double>(s.n - 1)) : 0.0;
    s.min_ms = *std::min_element(ms.begin(), ms.end());
    s.max_ms = *std::max_element(ms.begin(), ms.end());
    return s;
}

int cmd_bench(const BenchArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (!std::filesystem::exists(args.checkpoint)) {
            throw InvalidInput("checkpoint not found: '" + args.checkpoint.string() + "'");
        }
        const Checkpoint ckpt = load_checkpoint(args.checkpoint);
        const LatencyStats s = measure_forward_latency(ckpt.params, args.trials, args.warmup, args.seed);
        const std::string note = "reference: classifier-only forward reported at 6.2 ms on an NVIDIA RTX 3090 GPU";
        json report = {
            {"n", s.n},
            {"warmup", args.warmup},
            {"mean_ms", s.mean_ms},
            {"std_ms", s.std_ms},
            {"min_ms", s.min_ms},
            {"max_ms", s.max_ms},
            {"parameters", param_count(ckpt.params.config)},
            {"machine", machine_descriptor()},
            {"note", note},
        };
        out << "single-sequence eval forward, n=" << s.n << " (warmup " << args.warmup << ")\n";
        out << std::fixed << std::setprecision(4) << "mean " << s.mean_ms << " ms ± " << s.std_ms << " ms  (min "
            << s.min_ms << ", max " << s.max_ms << ")\n";
        out << note << "\n";
        if (args.report) write_text(*args.report, report.dump(2));
        return kOk;
    });
}

int cmd_convert(const ConvertArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const ConversionLog log = convert_dataset(args.layout, args.src, args.out);
        out << "converted " << log.converted << " clip(s) into " << args.out.string() << "\n";
        for (const auto& s : log.skipped) out << "  skipped " << s << "\n";
        return kOk;
    });
}

int cmd_synth(const SynthArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const SynthSpec spec = args.spec ? synth_spec_from_json(read_json(*args.spec)) : SynthSpec{};
        const SynthDataset ds = generate(spec);
        write_dataset(ds.manifest, ds.clips, args.out);
        write_text(args.out / "synth_spec.json", to_json(spec).dump(2));
        out << "wrote " << ds.clips.size() << " clips, " << spec.num_classes << " classes to " << args.out.string()
            << "\n";
        return kOk;
    });
}

int cmd_decode(const DecodeArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const HeatmapFile file = load_heatmaps(args.heatmaps);
        json hands = json::array();
        std::vector<HandPose> poses;
        for (const auto& hm : file.hands) {
            const DecodedHand d = decode(hm, args.image_width, args.image_height);
            json pts = json::array();
            for (const auto& p : d.pose.keypoints) pts.push_back({p.x, p.y});
            hands.push_back({{"keypoints", pts}, {"low_confidence", d.low_confidence}});
            poses.push_back(d.pose);
        }
        json doc = {{"hands", hands}};
        if (file.handness && poses.size() == 2) {
            const FramePose f = gate(poses[0], poses[1], *file.handness);
            doc["left_present"] = f.left.present;
            doc["right_present"] = f.right.present;
        }
        out << doc.dump(2) << "\n";
        return kOk;
    });
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"egoact: egocentric action recognition from 2D hand and object keypoints"};
    app.require_subcommand(1);

    TrainArgs train;
    auto* train_cmd = app.add_subcommand("train", "Train the classifier for every configured seed");
    train_cmd->add_option("config", train.config, "Training config file")->required();
    train_cmd->add_option("--seed", train.seed, "Train a single seed instead of the configured list");
    train_cmd->add_option("--out", train.out, "Run directory")->required();
    train_cmd->add_flag("--deterministic", train.deterministic, "Force single-threaded execution");
    train_cmd->add_flag("--resume", train.resume, "Continue from last.ckpt in each seed directory");

    EvalArgs eval;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset split");
    eval_cmd->add_option("checkpoint", eval.checkpoint)->required();
    eval_cmd->add_option("manifest", eval.manifest)->required();
    eval_cmd->add_option("split", eval.split);
    eval_cmd->add_option("--pose-source", eval.pose_source)->check(CLI::IsMember({"ground_truth", "predicted"}));
    eval_cmd->add_option("--report", eval.report, "Write the metric report here");

    AblateArgs ablate;
    auto* ablate_cmd = app.add_subcommand("ablate", "Evaluate with input parts zeroed at test time");
    ablate_cmd->add_option("checkpoint", ablate.checkpoint)->required();
    ablate_cmd->add_option("manifest", ablate.manifest)->required();
    ablate_cmd->add_option("--split", ablate.split);
    ablate_cmd->add_option("--pose-source", ablate.pose_source)->check(CLI::IsMember({"ground_truth", "predicted"}));
    ablate_cmd->add_option("--mask", ablate.masks, "Mask configuration, e.g. object or left,object (repeatable)");
    ablate_cmd->add_option("--report", ablate.report);

    BenchArgs bench;
    auto* bench_cmd = app.add_subcommand("bench", "Measure single-sequence inference latency");
    bench_cmd->add_option("checkpoint", bench.checkpoint)->required();
    bench_cmd->add_option("--trials", bench.trials)->check(CLI::PositiveNumber);
    bench_cmd->add_option("--warmup", bench.warmup)->check(CLI::NonNegativeNumber);
    bench_cmd->add_option("--seed", bench.seed);
    bench_cmd->add_option("--report", bench.report);

    ConvertArgs convert;
    auto* convert_cmd = app.add_subcommand("convert", "Convert an H2O or FPHA tree into the neutral format");
    convert_cmd->add_option("layout", convert.layout, "h2o or fpha")->required();
    convert_cmd->add_option("src", convert.src)->required();
    convert_cmd->add_option("out", convert.out)->required();

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate the synthetic keypoint-action dataset");
    synth_cmd->add_option("--spec", synth.spec, "Synthetic spec file (defaults apply when omitted)");
    synth_cmd->add_option("out", synth.out)->required();

    DecodeArgs decode_args;
    auto* decode_cmd = app.add_subcommand("decode", "Decode a heatmap file into pixel keypoints");
    decode_cmd->add_option("heatmaps", decode_args.heatmaps)->required();
    decode_cmd->add_option("--image-width", decode_args.image_width);
    decode_cmd->add_option("--image-height", decode_args.image_height);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kOk;
        }
        err << "error: " << e.what() << "\n";
        return kInvalidInput;
    }

    if (*train_cmd) return cmd_train(train, out, err);
    if (*eval_cmd) return cmd_eval(eval, out, err);
    if (*ablate_cmd) return cmd_ablate(ablate, out, err);
    if (*bench_cmd) return cmd_bench(bench, out, err);
    if (*convert_cmd) return cmd_convert(convert, out, err);
    if (*synth_cmd) return cmd_synth(synth, out, err);
    if (*decode_cmd) return cmd_decode(decode_args, out, err);
    return kInvalidInput;
}

} // namespace egoact::cli
