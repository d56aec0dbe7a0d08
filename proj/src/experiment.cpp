#include "flopsd/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "flopsd/errors.hpp"
#include "flopsd/hash.hpp"

namespace fs = std::filesystem;

namespace flopsd {

namespace {

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw UsageError("cannot create output directory: " + dir);
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw UsageError("cannot open for writing: " + path);
    f << content;
    if (!f) throw UsageError("short write: " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw UsageError("cannot open: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::string cell(double v) { return std::isnan(v) ? "" : format_double(v); }

void write_manifest(const std::string& path, const std::string& stage, const RunConfig& cfg,
                    const std::map<std::string, uint64_t>& inputs,
                    const std::map<std::string, uint64_t>& outputs) {
    nlohmann::json j;
    j["stage"] = stage;
    j["config_hash"] = hex64(cfg.hash());
    j["seed"] = cfg.seed;
    nlohmann::json in = nlohmann::json::object();
    for (const auto& [name, h] : inputs) in[name] = hex64(h);
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [name, h] : outputs) out[name] = hex64(h);
    j["inputs"] = in;
    j["outputs"] = out;
    write_file(path, j.dump(2) + "\n");
}

OpsdOptions options_from_config(const RunConfig& cfg) {
    OpsdOptions opt;
    opt.teacher_cond =
        cfg.teacher_cond == "student" ? BranchSource::kStudent : BranchSource::kTeacher;
    opt.teacher_params =
        cfg.teacher_params == "student" ? BranchSource::kStudent : BranchSource::kTeacher;
    return opt;
}

TuneConfig tune_config_from(const RunConfig& cfg) {
    TuneConfig tc;
    tc.iters = cfg.tune_iters;
    tc.batch = cfg.tune_batch;
    tc.lr = cfg.tune_lr;
    tc.lr_end = cfg.tune_lr_end;
    tc.adam_eps = cfg.tune_eps;
    tc.eval_period = cfg.eval_period;
    tc.sft_teacher_refresh = cfg.sft_teacher_refresh;
    tc.offpolicy_random_t = cfg.offpolicy_random_t;
    return tc;
}

}  // namespace

std::string hex64(uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string resolve_out_dir(const RunConfig& cfg) {
    const char* root = std::getenv("FLOPSD_RUNDIR");
    fs::path out(cfg.out_dir);
    if (root != nullptr && root[0] != '\0' && out.is_relative()) {
        return (fs::path(root) / out).string();
    }
    return out.string();
}

Schedule config_schedule(const RunConfig& cfg) { return make_schedule(cfg.schedule_k); }

Dataset build_dataset(const RunConfig& cfg) {
    Rng rng(mix_seed(cfg.seed, "dataset"));
    Dataset data = generate_dataset(cfg.dataset_spec(), rng);
    if (cfg.scenario == "domain-shift") {
        for (int y = 0; y < cfg.n_classes; ++y) {
            if (y == cfg.domain_holdout_label) continue;
            for (int i = 0; i < cfg.domain_pairs_per_class; ++i) {
                const Vec2 raw =
                    cfg.mode_centers[static_cast<size_t>(y)] + cfg.mode_std * rng.normal2();
                data.tune.push_back(
                    {style_transform(raw, cfg.domain_angle_deg, cfg.domain_scale), y});
            }
        }
    }
    return data;
}

VelocityField field_from_checkpoint(const Checkpoint& ckpt) {
    VelocityField f;
    f.spec = ckpt.spec;
    f.params = ckpt.params;
    const int cond = f.spec.input_dim() - VelocityField::kSampleDim - kTimeEmbedDim;
    f.n_classes = cond - 3;
    f.validate();
    return f;
}

uint64_t experiment_descriptor_hash(std::span<const TrainingPair> tune_set,
                                    const Schedule& schedule, uint64_t seed,
                                    const TuneConfig& cfg) {
    uint64_t h = kFnvOffsetBasis;
    const auto mix_double = [&h](double v) {
        uint64_t u;
        static_assert(sizeof(u) == sizeof(v));
        std::memcpy(&u, &v, 8);
        h = fnv1a_u64(u, h);
    };
    for (const TrainingPair& tp : tune_set) {
        mix_double(tp.target.x);
        mix_double(tp.target.y);
        h = fnv1a_u64(static_cast<uint64_t>(tp.label), h);
    }
    for (double t : schedule.timesteps) mix_double(t);
    h = fnv1a_u64(seed, h);
    mix_double(cfg.lr);
    mix_double(cfg.lr_end);
    mix_double(cfg.adam_eps);
    h = fnv1a_u64(static_cast<uint64_t>(cfg.batch), h);
    h = fnv1a_u64(static_cast<uint64_t>(cfg.iters), h);
    return h;
}

MetricsEvaluator::MetricsEvaluator(const RunConfig& cfg, const Schedule& schedule,
                                   const VelocityField& base_reference)
    : cfg_(cfg), schedule_(schedule) {
    const int n = cfg.eval_samples;
    const bool domain = cfg.scenario == "domain-shift";

    if (domain) {
        // Tuned labels adapt to the transformed distribution; the hold-out
        // label keeps its original one.
        for (int y = 0; y < cfg.n_classes; ++y) {
            const bool tuned = y != cfg.domain_holdout_label;
            if (tuned) {
                SampleSet target;
                target.label = y;
                Rng trng(mix_seed(cfg.seed, "targetset", static_cast<uint64_t>(y)));
                for (int i = 0; i < n; ++i) {
                    const Vec2 raw =
                        cfg.mode_centers[static_cast<size_t>(y)] + cfg.mode_std * trng.normal2();
                    target.points.push_back(
                        style_transform(raw, cfg.domain_angle_deg, cfg.domain_scale));
                }
                concept_targets_.emplace_back(y, std::move(target));
            }
            quality_labels_.push_back(y);
            Rng rrng(mix_seed(cfg.seed, "refsamples", static_cast<uint64_t>(y)));
            SampleSet ref = sample_dense(base_reference, y, n, cfg.dense_steps, rrng);
            Rng drng(mix_seed(cfg.seed, "refdata", static_cast<uint64_t>(y)));
            SampleSet dat;
            dat.label = y;
            for (int i = 0; i < n; ++i) {
                dat.points.push_back(cfg.mode_centers[static_cast<size_t>(y)] +
                                     cfg.mode_std * drng.normal2());
            }
            if (tuned) {
                for (Vec2& p : ref.points) {
                    p = style_transform(p, cfg.domain_angle_deg, cfg.domain_scale);
                }
                for (Vec2& p : dat.points) {
                    p = style_transform(p, cfg.domain_angle_deg, cfg.domain_scale);
                }
            }
            reference_sets_.push_back(std::move(ref));
            data_sets_.push_back(std::move(dat));
        }
    } else {
        SampleSet target;
        target.label = cfg.shift_label;
        Rng trng(mix_seed(cfg.seed, "targetset"));
        for (int i = 0; i < n; ++i) {
            target.points.push_back(cfg.shift_center + cfg.mode_std * trng.normal2());
        }
        concept_targets_.emplace_back(cfg.shift_label, std::move(target));
        for (int y = 0; y < cfg.n_classes; ++y) {
            if (y == cfg.shift_label) continue;  // retained labels only
            quality_labels_.push_back(y);
            Rng rrng(mix_seed(cfg.seed, "refsamples", static_cast<uint64_t>(y)));
            reference_sets_.push_back(sample_dense(base_reference, y, n, cfg.dense_steps, rrng));
            Rng drng(mix_seed(cfg.seed, "refdata", static_cast<uint64_t>(y)));
            SampleSet dat;
            dat.label = y;
            for (int i = 0; i < n; ++i) {
                dat.points.push_back(cfg.mode_centers[static_cast<size_t>(y)] +
                                     cfg.mode_std * drng.normal2());
            }
            data_sets_.push_back(std::move(dat));
        }
    }
}

EvalMetrics MetricsEvaluator::evaluate(const VelocityField& field, uint64_t tune_seed,
                                       int64_t iter) const {
    Rng rng(mix_seed(tune_seed, "eval", static_cast<uint64_t>(iter)));
    const int n = cfg_.eval_samples;
    EvalMetrics m;

    double concept_acc = 0.0;
    double sw_acc = 0.0;
    for (size_t i = 0; i < concept_targets_.size(); ++i) {
        const auto& [label, target] = concept_targets_[i];
        const SampleSet gen = sample_kstep(field, schedule_, label, n, rng);
        concept_acc += energy_distance(gen, target);
        sw_acc += sliced_wasserstein(gen, target, cfg_.sw_projections, 2,
                                     mix_seed(tune_seed, "sw", static_cast<uint64_t>(iter), i));
    }
    m.concept_score = concept_acc / static_cast<double>(concept_targets_.size());
    m.sw2_target = sw_acc / static_cast<double>(concept_targets_.size());

    double quality_acc = 0.0;
    double retained_acc = 0.0;
    for (size_t i = 0; i < quality_labels_.size(); ++i) {
        const SampleSet gen = sample_kstep(field, schedule_, quality_labels_[i], n, rng);
        quality_acc += energy_distance(gen, reference_sets_[i]);
        retained_acc += energy_distance(gen, data_sets_[i]);
    }
    m.quality_proxy = quality_acc / static_cast<double>(quality_labels_.size());
    m.energy_retained = retained_acc / static_cast<double>(quality_labels_.size());
    return m;
}

VelocityField run_pretrain(const RunConfig& cfg, TrainLog* out_log) {
    const Dataset data = build_dataset(cfg);
    Rng init_rng(mix_seed(cfg.seed, "init"));
    VelocityField field = make_velocity_field(cfg.n_classes, cfg.hidden,
                                              activation_from_string(cfg.activation), init_rng);
    Rng rng(mix_seed(cfg.seed, "pretrain"));

    TrainLog log;
    log.method = "pretrain";
    AdamState adam;
    adam.reset(field.params.size());
    std::vector<TrainingPair> batch(static_cast<size_t>(cfg.pretrain_batch));

    for (int it = 0; it < cfg.pretrain_iters; ++it) {
        for (auto& tp : batch) {
            tp = data.pretrain[static_cast<size_t>(
                rng.uniform_int(static_cast<int>(data.pretrain.size())))];
        }
        FmLossResult step =
            fm_loss_and_grad(field, batch, CondMode::kDropout, cfg.context_dropout, rng);
        const AdamConfig acfg{
            .lr = cosine_lr(cfg.pretrain_lr, cfg.pretrain_lr_end, it, cfg.pretrain_iters)};
        adam_update(field.params, step.grad, adam, acfg);
        log.rows.push_back({it, step.loss, false, {}});
    }
    if (out_log) *out_log = std::move(log);
    return field;
}

VelocityField run_distill(const RunConfig& cfg, const VelocityField& base, TrainLog* out_log) {
    DistillConfig dcfg;
    dcfg.iters = cfg.distill_iters;
    dcfg.batch = cfg.distill_batch;
    dcfg.lr = cfg.distill_lr;
    dcfg.lr_end = cfg.distill_lr_end;
    dcfg.pool = cfg.distill_pool;
    Rng rng(mix_seed(cfg.seed, "distill"));
    DistillResult res = distill_few_step(base, config_schedule(cfg), dcfg, rng);
    if (out_log) *out_log = std::move(res.log);
    return res.field;
}

TuneOutput run_tune(const RunConfig& cfg, const std::string& method, const VelocityField& start,
                    uint64_t tune_seed, const MetricsEvaluator* evaluator) {
    const Dataset data = build_dataset(cfg);
    if (data.tune.empty()) throw UsageError("tune: scenario produced an empty tune set");
    const Schedule schedule = config_schedule(cfg);

    TuneConfig tc = tune_config_from(cfg);
    tc.descriptor_hash = experiment_descriptor_hash(data.tune, schedule, tune_seed, tc);
    Rng rng(mix_seed(tune_seed, "tune"));

    EvalCallback eval;
    if (evaluator != nullptr) {
        eval = [&, tune_seed](const VelocityField& f, int64_t iter) {
            return evaluator->evaluate(f, tune_seed, iter);
        };
    }

    TuneOutput out;
    const OpsdOptions options = options_from_config(cfg);

    if (method == "sft") {
        out.tuned = start;
        out.log = sft_train(out.tuned, data.tune, tc, rng, eval);
    } else if (method == "sft-teacher") {
        EmaPair pair = make_ema_pair(start, cfg.ema_momentum,
                                     teacher_mode_from_string(cfg.teacher_mode));
        out.log = sft_from_teacher_samples_train(pair, data.tune, schedule, tc, rng, eval);
        out.tuned = std::move(pair.student);
    } else if (method == "offpolicy") {
        EmaPair pair = make_ema_pair(start, cfg.ema_momentum,
                                     teacher_mode_from_string(cfg.teacher_mode));
        out.log = offpolicy_distill_train(pair, data.tune, schedule, tc, rng, options, eval);
        out.tuned = std::move(pair.student);
    } else if (method == "opsd" || method == "opsd-frozen" || method == "opsd-copy") {
        TeacherMode mode = teacher_mode_from_string(cfg.teacher_mode);
        if (method == "opsd-frozen") mode = TeacherMode::kFrozenBase;
        if (method == "opsd-copy") mode = TeacherMode::kStudentCopy;
        EmaPair pair = make_ema_pair(start, cfg.ema_momentum, mode);
        out.log = opsd_train(pair, data.tune, schedule, tc, rng, options, eval);
        out.tuned = std::move(pair.student);
    } else {
        throw UsageError("unknown tune method: " + method +
                         " (expected opsd | sft | sft-teacher | offpolicy)");
    }
    out.log.method = method;
    return out;
}

std::string csv_row(int64_t iter, const std::string& method, uint64_t seed, double loss,
                    const EvalMetrics& eval) {
    std::ostringstream ss;
    ss << iter << "," << method << "," << seed << "," << cell(loss) << ","
       << cell(eval.concept_score) << "," << cell(eval.quality_proxy) << ","
       << cell(eval.sw2_target) << "," << cell(eval.energy_retained);
    return ss.str();
}

std::string train_log_csv(const TrainLog& log, uint64_t seed, int log_period) {
    std::ostringstream ss;
    ss << kCsvHeader << "\n";
    ss << "# descriptor = " << hex64(log.descriptor_hash) << "\n";
    bool any_eval = false;
    for (const auto& row : log.rows) any_eval = any_eval || row.has_eval;
    for (size_t i = 0; i < log.rows.size(); ++i) {
        const TrainRow& row = log.rows[i];
        const bool keep = any_eval ? row.has_eval
                                   : (row.iter % log_period == 0 || i + 1 == log.rows.size());
        if (!keep) continue;
        ss << csv_row(row.iter, log.method, seed, row.loss, row.eval) << "\n";
    }
    return ss.str();
}

std::vector<CsvRow> parse_csv(const std::string& text) {
    std::vector<CsvRow> rows;
    std::istringstream is(text);
    std::string line;
    bool header_seen = false;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line != kCsvHeader) throw UsageError("CSV header mismatch: " + line);
            header_seen = true;
            continue;
        }
        std::vector<std::string> cells;
        std::string cur;
        std::istringstream ls(line);
        while (std::getline(ls, cur, ',')) cells.push_back(cur);
        while (cells.size() < 8) cells.push_back("");
        CsvRow row;
        row.iter = std::strtoll(cells[0].c_str(), nullptr, 10);
        row.method = cells[1];
        row.seed = std::strtoull(cells[2].c_str(), nullptr, 10);
        const auto num = [](const std::string& s) {
            return s.empty() ? std::numeric_limits<double>::quiet_NaN() : std::strtod(s.c_str(), nullptr);
        };
        row.loss = num(cells[3]);
        row.eval.concept_score = num(cells[4]);
        row.eval.quality_proxy = num(cells[5]);
        row.eval.sw2_target = num(cells[6]);
        row.eval.energy_retained = num(cells[7]);
        rows.push_back(std::move(row));
    }
    if (!header_seen) throw UsageError("CSV has no header");
    return rows;
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const size_t lo = static_cast<size_t>(pos);
    const size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
}

int cli_pretrain(const RunConfig& cfg) {
    const std::string out = resolve_out_dir(cfg);
    ensure_dir(out);
    TrainLog log;
    VelocityField base = run_pretrain(cfg, &log);
    const std::string ckpt_path = out + "/base.ckpt";
    save_checkpoint(ckpt_path, base.spec, base.params);
    write_file(out + "/pretrain_log.csv", train_log_csv(log, cfg.seed, cfg.log_period));
    write_manifest(out + "/manifest_pretrain.json", "pretrain", cfg, {},
                   {{"base.ckpt", file_hash(ckpt_path)},
                    {"pretrain_log.csv", fnv1a(read_file(out + "/pretrain_log.csv"))}});
    return 0;
}

int cli_distill(const RunConfig& cfg, const std::string& base_path) {
    const std::string out = resolve_out_dir(cfg);
    ensure_dir(out);
    const VelocityField base = field_from_checkpoint(load_checkpoint(base_path));
    TrainLog log;
    VelocityField distilled = run_distill(cfg, base, &log);
    const std::string ckpt_path = out + "/distilled.ckpt";
    save_checkpoint(ckpt_path, distilled.spec, distilled.params);
    write_file(out + "/distill_log.csv", train_log_csv(log, cfg.seed, cfg.log_period));
    write_manifest(out + "/manifest_distill.json", "distill", cfg,
                   {{"base.ckpt", file_hash(base_path)}},
                   {{"distilled.ckpt", file_hash(ckpt_path)},
                    {"distill_log.csv", fnv1a(read_file(out + "/distill_log.csv"))}});
    return 0;
}

int cli_tune(const RunConfig& cfg, const std::string& model_path, const std::string& base_path,
             const std::string& method) {
    const std::string out = resolve_out_dir(cfg);
    ensure_dir(out);
    const VelocityField start = field_from_checkpoint(load_checkpoint(model_path));
    const VelocityField base = field_from_checkpoint(load_checkpoint(base_path));
    const MetricsEvaluator evaluator(cfg, config_schedule(cfg), base);

    TuneOutput res = run_tune(cfg, method, start, cfg.seed, &evaluator);

    const std::string tag = method + "_seed" + std::to_string(cfg.seed);
    const std::string ckpt_path = out + "/tuned_" + tag + ".ckpt";
    const std::string csv_path = out + "/tune_" + tag + ".csv";
    save_checkpoint(ckpt_path, res.tuned.spec, res.tuned.params);
    write_file(csv_path, train_log_csv(res.log, cfg.seed, cfg.log_period));
    write_manifest(out + "/manifest_tune_" + tag + ".json", "tune", cfg,
                   {{"model.ckpt", file_hash(model_path)}, {"base.ckpt", file_hash(base_path)}},
                   {{"tuned_" + tag + ".ckpt", file_hash(ckpt_path)},
                    {"tune_" + tag + ".csv", fnv1a(read_file(csv_path))}});
    return 0;
}

int cli_eval(const RunConfig& cfg, const std::string& model_path, const std::string& base_path) {
    const std::string out = resolve_out_dir(cfg);
    ensure_dir(out);
    const VelocityField model = field_from_checkpoint(load_checkpoint(model_path));
    const VelocityField base = field_from_checkpoint(load_checkpoint(base_path));
    const MetricsEvaluator evaluator(cfg, config_schedule(cfg), base);
    const EvalMetrics m = evaluator.evaluate(model, cfg.seed, 0);

    std::ostringstream csv;
    csv << kCsvHeader << "\n"
        << csv_row(0, "eval", cfg.seed, std::numeric_limits<double>::quiet_NaN(), m) << "\n";
    write_file(out + "/eval.csv", csv.str());

    nlohmann::json j;
    j["concept_score"] = m.concept_score;
    j["quality_proxy"] = m.quality_proxy;
    j["sw2_target"] = m.sw2_target;
    j["energy_retained"] = m.energy_retained;
    j["model_hash"] = hex64(file_hash(model_path));
    j["config_hash"] = hex64(cfg.hash());
    j["seed"] = cfg.seed;
    write_file(out + "/eval.json", j.dump(2) + "\n");

    write_manifest(out + "/manifest_eval.json", "eval", cfg,
                   {{"model.ckpt", file_hash(model_path)}, {"base.ckpt", file_hash(base_path)}},
                   {{"eval.csv", fnv1a(csv.str())},
                    {"eval.json", fnv1a(read_file(out + "/eval.json"))}});
    return 0;
}

int cli_ablate(const RunConfig& cfg) {
    std::set<uint64_t> unique_seeds(cfg.ablate_seeds.begin(), cfg.ablate_seeds.end());
    if (unique_seeds.size() != cfg.ablate_seeds.size()) {
        throw UsageError("ablate: seed collision in ablate_seeds");
    }

    const std::string out = resolve_out_dir(cfg);
    ensure_dir(out);

    TrainLog pre_log;
    VelocityField base = run_pretrain(cfg, &pre_log);
    save_checkpoint(out + "/base.ckpt", base.spec, base.params);
    write_file(out + "/pretrain_log.csv", train_log_csv(pre_log, cfg.seed, cfg.log_period));

    TrainLog dis_log;
    VelocityField distilled = run_distill(cfg, base, &dis_log);
    save_checkpoint(out + "/distilled.ckpt", distilled.spec, distilled.params);
    write_file(out + "/distill_log.csv", train_log_csv(dis_log, cfg.seed, cfg.log_period));

    const MetricsEvaluator evaluator(cfg, config_schedule(cfg), base);

    // Four training paradigms plus the teacher-construction sweep.
    const std::vector<std::string> arms = {"opsd", "sft", "sft-teacher", "offpolicy"};
    const std::vector<std::string> sweep = {"opsd-frozen", "opsd-copy"};

    std::vector<std::string> all_methods = arms;
    all_methods.insert(all_methods.end(), sweep.begin(), sweep.end());

    std::ostringstream curves;
    curves << kCsvHeader << "\n";
    std::map<std::string, uint64_t> outputs;

    for (uint64_t seed : cfg.ablate_seeds) {
        uint64_t seed_descriptor = 0;
        bool have_descriptor = false;
        for (const std::string& method : all_methods) {
            TuneOutput res = run_tune(cfg, method, distilled, seed, &evaluator);
            // Every arm of one comparative run must share dataset, schedule,
            // seed and optimizer settings.
            if (!have_descriptor) {
                seed_descriptor = res.log.descriptor_hash;
                have_descriptor = true;
            } else if (res.log.descriptor_hash != seed_descriptor) {
                throw UsageError("ablate: descriptor hash mismatch across arms");
            }
            const std::string tag = method + "_seed" + std::to_string(seed);
            save_checkpoint(out + "/tuned_" + tag + ".ckpt", res.tuned.spec, res.tuned.params);
            outputs["tuned_" + tag + ".ckpt"] = file_hash(out + "/tuned_" + tag + ".ckpt");
            for (const TrainRow& row : res.log.rows) {
                if (!row.has_eval) continue;
                curves << csv_row(row.iter, method, seed, row.loss, row.eval) << "\n";
            }
        }
    }

    write_file(out + "/curves.csv", curves.str());
    outputs["curves.csv"] = fnv1a(curves.str());
    outputs["base.ckpt"] = file_hash(out + "/base.ckpt");
    outputs["distilled.ckpt"] = file_hash(out + "/distilled.ckpt");
    write_manifest(out + "/manifest_ablate.json", "ablate", cfg, {}, outputs);
    return 0;
}

int cli_report(const std::string& rundir) {
    if (!fs::is_directory(rundir)) throw UsageError("report: not a directory: " + rundir);

    // Gather every data CSV in the run directory that uses the shared schema.
    std::vector<CsvRow> rows;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(rundir)) {
        if (!entry.is_regular_file()) continue;
        const std::string name = entry.path().filename().string();
        if (name == "report.csv" || entry.path().extension() != ".csv") continue;
        files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& path : files) {
        const std::string text = read_file(path.string());
        if (text.rfind(kCsvHeader, 0) != 0) continue;
        auto parsed = parse_csv(text);
        rows.insert(rows.end(), parsed.begin(), parsed.end());
    }
    if (rows.empty()) throw UsageError("report: no schema-matching CSV rows under " + rundir);

    // Median / IQR over seeds for each (method, iter) cell.
    std::map<std::pair<std::string, int64_t>, std::vector<CsvRow>> groups;
    for (const auto& row : rows) groups[{row.method, row.iter}].push_back(row);

    std::ostringstream outcsv;
    outcsv << "method,iter,seeds";
    const std::vector<std::string> metric_names = {"loss", "concept_score", "quality_proxy",
                                                   "sw2_target", "energy_retained"};
    for (const auto& name : metric_names) outcsv << "," << name << "_med," << name << "_iqr";
    outcsv << "\n";

    for (const auto& [key, group] : groups) {
        std::set<uint64_t> seeds;
        for (const auto& r : group) seeds.insert(r.seed);
        outcsv << key.first << "," << key.second << "," << seeds.size();
        const auto values_of = [&group](int metric) {
            std::vector<double> vals;
            for (const auto& r : group) {
                const double v = metric == 0   ? r.loss
                                 : metric == 1 ? r.eval.concept_score
                                 : metric == 2 ? r.eval.quality_proxy
                                 : metric == 3 ? r.eval.sw2_target
                                               : r.eval.energy_retained;
                if (!std::isnan(v)) vals.push_back(v);
            }
            return vals;
        };
        for (int metric = 0; metric < 5; ++metric) {
            const auto vals = values_of(metric);
            if (vals.empty()) {
                outcsv << ",,";
            } else {
                outcsv << "," << format_double(quantile(vals, 0.5)) << ","
                       << format_double(quantile(vals, 0.75) - quantile(vals, 0.25));
            }
        }
        outcsv << "\n";
    }
    write_file(rundir + "/report.csv", outcsv.str());
    return 0;
}

}  // namespace flopsd
