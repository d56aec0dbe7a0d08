#include "flopsd/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "flopsd/errors.hpp"
#include "flopsd/hash.hpp"

namespace flopsd {

std::string format_double(double v) {
    char buf[64];
    // %.17g round-trips any double; trim to shorter forms when exact.
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    char* end = nullptr;
    double d = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0') {
        throw UsageError("config: bad number for '" + key + "': " + v);
    }
    return d;
}

int parse_int(const std::string& key, const std::string& v) {
    double d = parse_double(key, v);
    int i = static_cast<int>(d);
    if (static_cast<double>(i) != d) throw UsageError("config: '" + key + "' must be an integer");
    return i;
}

uint64_t parse_u64(const std::string& key, const std::string& v) {
    char* end = nullptr;
    unsigned long long u = std::strtoull(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0') {
        throw UsageError("config: bad unsigned integer for '" + key + "': " + v);
    }
    return static_cast<uint64_t>(u);
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw UsageError("config: '" + key + "' must be true or false");
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(trim(cur));
    if (!s.empty() && s.back() == sep) out.push_back("");
    return out;
}

Vec2 parse_vec2(const std::string& key, const std::string& v) {
    auto parts = split(v, ',');
    if (parts.size() != 2) throw UsageError("config: '" + key + "' needs 'x,y'");
    return {parse_double(key, parts[0]), parse_double(key, parts[1])};
}

std::vector<Vec2> parse_vec2_list(const std::string& key, const std::string& v) {
    std::vector<Vec2> out;
    for (const auto& item : split(v, ';')) {
        if (item.empty()) throw UsageError("config: empty entry in '" + key + "'");
        out.push_back(parse_vec2(key, item));
    }
    if (out.empty()) throw UsageError("config: '" + key + "' must not be empty");
    return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
    std::vector<int> out;
    for (const auto& item : split(v, ',')) {
        if (item.empty()) throw UsageError("config: empty entry in '" + key + "'");
        out.push_back(parse_int(key, item));
    }
    if (out.empty()) throw UsageError("config: '" + key + "' must not be empty");
    return out;
}

std::vector<uint64_t> parse_u64_list(const std::string& key, const std::string& v) {
    std::vector<uint64_t> out;
    for (const auto& item : split(v, ',')) {
        if (item.empty()) throw UsageError("config: empty entry in '" + key + "'");
        out.push_back(parse_u64(key, item));
    }
    if (out.empty()) throw UsageError("config: '" + key + "' must not be empty");
    return out;
}

std::string join_ints(const std::vector<int>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(v[i]);
    }
    return s;
}

std::string join_u64s(const std::vector<uint64_t>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(v[i]);
    }
    return s;
}

std::string join_vec2s(const std::vector<Vec2>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
        if (i) s += "; ";
        s += format_double(v[i].x) + "," + format_double(v[i].y);
    }
    return s;
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"seed", [](RunConfig& c, const std::string& k, const std::string& v) { c.seed = parse_u64(k, v); }},
        {"out_dir", [](RunConfig& c, const std::string&, const std::string& v) { c.out_dir = v; }},
        {"scenario", [](RunConfig& c, const std::string&, const std::string& v) { c.scenario = v; }},
        {"n_classes", [](RunConfig& c, const std::string& k, const std::string& v) { c.n_classes = parse_int(k, v); }},
        {"mode_centers", [](RunConfig& c, const std::string& k, const std::string& v) { c.mode_centers = parse_vec2_list(k, v); }},
        {"mode_std", [](RunConfig& c, const std::string& k, const std::string& v) { c.mode_std = parse_double(k, v); }},
        {"samples_per_class", [](RunConfig& c, const std::string& k, const std::string& v) { c.samples_per_class = parse_int(k, v); }},
        {"shift_label", [](RunConfig& c, const std::string& k, const std::string& v) { c.shift_label = parse_int(k, v); }},
        {"shift_center", [](RunConfig& c, const std::string& k, const std::string& v) { c.shift_center = parse_vec2(k, v); }},
        {"n_tune_pairs", [](RunConfig& c, const std::string& k, const std::string& v) { c.n_tune_pairs = parse_int(k, v); }},
        {"domain_angle_deg", [](RunConfig& c, const std::string& k, const std::string& v) { c.domain_angle_deg = parse_double(k, v); }},
        {"domain_scale", [](RunConfig& c, const std::string& k, const std::string& v) { c.domain_scale = parse_double(k, v); }},
        {"domain_holdout_label", [](RunConfig& c, const std::string& k, const std::string& v) { c.domain_holdout_label = parse_int(k, v); }},
        {"domain_pairs_per_class", [](RunConfig& c, const std::string& k, const std::string& v) { c.domain_pairs_per_class = parse_int(k, v); }},
        {"hidden", [](RunConfig& c, const std::string& k, const std::string& v) { c.hidden = parse_int_list(k, v); }},
        {"activation", [](RunConfig& c, const std::string&, const std::string& v) { c.activation = v; }},
        {"schedule_k", [](RunConfig& c, const std::string& k, const std::string& v) { c.schedule_k = parse_int(k, v); }},
        {"pretrain_iters", [](RunConfig& c, const std::string& k, const std::string& v) { c.pretrain_iters = parse_int(k, v); }},
        {"pretrain_batch", [](RunConfig& c, const std::string& k, const std::string& v) { c.pretrain_batch = parse_int(k, v); }},
        {"pretrain_lr", [](RunConfig& c, const std::string& k, const std::string& v) { c.pretrain_lr = parse_double(k, v); }},
        {"pretrain_lr_end", [](RunConfig& c, const std::string& k, const std::string& v) { c.pretrain_lr_end = parse_double(k, v); }},
        {"context_dropout", [](RunConfig& c, const std::string& k, const std::string& v) { c.context_dropout = parse_double(k, v); }},
        {"distill_iters", [](RunConfig& c, const std::string& k, const std::string& v) { c.distill_iters = parse_int(k, v); }},
        {"distill_batch", [](RunConfig& c, const std::string& k, const std::string& v) { c.distill_batch = parse_int(k, v); }},
        {"distill_lr", [](RunConfig& c, const std::string& k, const std::string& v) { c.distill_lr = parse_double(k, v); }},
        {"distill_lr_end", [](RunConfig& c, const std::string& k, const std::string& v) { c.distill_lr_end = parse_double(k, v); }},
        {"distill_pool", [](RunConfig& c, const std::string& k, const std::string& v) { c.distill_pool = parse_int(k, v); }},
        {"tune_iters", [](RunConfig& c, const std::string& k, const std::string& v) { c.tune_iters = parse_int(k, v); }},
        {"tune_batch", [](RunConfig& c, const std::string& k, const std::string& v) { c.tune_batch = parse_int(k, v); }},
        {"tune_lr", [](RunConfig& c, const std::string& k, const std::string& v) { c.tune_lr = parse_double(k, v); }},
        {"tune_lr_end", [](RunConfig& c, const std::string& k, const std::string& v) { c.tune_lr_end = parse_double(k, v); }},
        {"tune_eps", [](RunConfig& c, const std::string& k, const std::string& v) { c.tune_eps = parse_double(k, v); }},
        {"teacher_mode", [](RunConfig& c, const std::string&, const std::string& v) { c.teacher_mode = v; }},
        {"ema_momentum", [](RunConfig& c, const std::string& k, const std::string& v) { c.ema_momentum = parse_double(k, v); }},
        {"teacher_cond", [](RunConfig& c, const std::string&, const std::string& v) { c.teacher_cond = v; }},
        {"teacher_params", [](RunConfig& c, const std::string&, const std::string& v) { c.teacher_params = v; }},
        {"offpolicy_random_t", [](RunConfig& c, const std::string& k, const std::string& v) { c.offpolicy_random_t = parse_bool(k, v); }},
        {"sft_teacher_refresh", [](RunConfig& c, const std::string& k, const std::string& v) { c.sft_teacher_refresh = parse_int(k, v); }},
        {"eval_period", [](RunConfig& c, const std::string& k, const std::string& v) { c.eval_period = parse_int(k, v); }},
        {"eval_samples", [](RunConfig& c, const std::string& k, const std::string& v) { c.eval_samples = parse_int(k, v); }},
        {"sw_projections", [](RunConfig& c, const std::string& k, const std::string& v) { c.sw_projections = parse_int(k, v); }},
        {"dense_steps", [](RunConfig& c, const std::string& k, const std::string& v) { c.dense_steps = parse_int(k, v); }},
        {"log_period", [](RunConfig& c, const std::string& k, const std::string& v) { c.log_period = parse_int(k, v); }},
        {"ablate_seeds", [](RunConfig& c, const std::string& k, const std::string& v) { c.ablate_seeds = parse_u64_list(k, v); }},
    };
    return table;
}

}  // namespace

RunConfig RunConfig::parse(const std::string& text) {
    RunConfig cfg;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    std::map<std::string, int> seen;
    while (std::getline(is, line)) {
        ++lineno;
        const size_t hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw UsageError("config line " + std::to_string(lineno) + ": expected 'key = value'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw UsageError("config line " + std::to_string(lineno) + ": empty key");
        auto it = setters().find(key);
        if (it == setters().end()) {
            throw UsageError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
        if (seen.count(key)) {
            throw UsageError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
        }
        seen[key] = lineno;
        it->second(cfg, key, value);
    }
    cfg.validate();
    return cfg;
}

RunConfig RunConfig::parse_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw UsageError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
}

void RunConfig::validate() const {
    const auto positive = [](int v, const char* name) {
        if (v < 1) throw UsageError(std::string("config: ") + name + " must be >= 1");
    };
    positive(n_classes, "n_classes");
    positive(samples_per_class, "samples_per_class");
    positive(n_tune_pairs, "n_tune_pairs");
    positive(schedule_k, "schedule_k");
    positive(pretrain_batch, "pretrain_batch");
    positive(distill_batch, "distill_batch");
    positive(tune_batch, "tune_batch");
    positive(distill_pool, "distill_pool");
    positive(eval_samples, "eval_samples");
    positive(sw_projections, "sw_projections");
    positive(dense_steps, "dense_steps");
    positive(log_period, "log_period");
    positive(sft_teacher_refresh, "sft_teacher_refresh");
    positive(domain_pairs_per_class, "domain_pairs_per_class");
    if (pretrain_iters < 0 || distill_iters < 0 || tune_iters < 0 || eval_period < 0) {
        throw UsageError("config: iteration counts must be >= 0");
    }
    if (static_cast<int>(mode_centers.size()) != n_classes) {
        throw UsageError("config: mode_centers must list one center per class");
    }
    if (shift_label < 0 || shift_label >= n_classes) {
        throw UsageError("config: shift_label out of range");
    }
    if (scenario != "customize" && scenario != "domain-shift") {
        throw UsageError("config: scenario must be 'customize' or 'domain-shift'");
    }
    if (scenario == "domain-shift" &&
        (domain_holdout_label < 0 || domain_holdout_label >= n_classes)) {
        throw UsageError("config: domain_holdout_label out of range");
    }
    if (activation != "tanh" && activation != "silu") {
        throw UsageError("config: activation must be 'tanh' or 'silu'");
    }
    if (teacher_mode != "ema" && teacher_mode != "frozen_base" && teacher_mode != "student_copy") {
        throw UsageError("config: teacher_mode must be ema | frozen_base | student_copy");
    }
    if (teacher_cond != "teacher" && teacher_cond != "student") {
        throw UsageError("config: teacher_cond must be teacher | student");
    }
    if (teacher_params != "teacher" && teacher_params != "student") {
        throw UsageError("config: teacher_params must be teacher | student");
    }
    if (ema_momentum < 0.0 || ema_momentum > 1.0) {
        throw UsageError("config: ema_momentum must lie in [0, 1]");
    }
    if (context_dropout < 0.0 || context_dropout > 1.0) {
        throw UsageError("config: context_dropout must lie in [0, 1]");
    }
    if (mode_std < 0.0) throw UsageError("config: mode_std must be >= 0");
    if (pretrain_lr <= 0.0 || pretrain_lr_end <= 0.0 || distill_lr <= 0.0 || tune_lr <= 0.0) {
        throw UsageError("config: learning rates must be positive");
    }
    if (tune_eps <= 0.0) throw UsageError("config: tune_eps must be positive");
    if (distill_lr_end <= 0.0 || tune_lr_end <= 0.0) {
        throw UsageError("config: lr decay targets must be positive");
    }
    if (ablate_seeds.empty()) throw UsageError("config: ablate_seeds must not be empty");
}

std::string RunConfig::canonical_text() const {
    std::ostringstream ss;
    ss << "seed = " << seed << "\n";
    ss << "out_dir = " << out_dir << "\n";
    ss << "scenario = " << scenario << "\n";
    ss << "n_classes = " << n_classes << "\n";
    ss << "mode_centers = " << join_vec2s(mode_centers) << "\n";
    ss << "mode_std = " << format_double(mode_std) << "\n";
    ss << "samples_per_class = " << samples_per_class << "\n";
    ss << "shift_label = " << shift_label << "\n";
    ss << "shift_center = " << format_double(shift_center.x) << "," << format_double(shift_center.y) << "\n";
    ss << "n_tune_pairs = " << n_tune_pairs << "\n";
    ss << "domain_angle_deg = " << format_double(domain_angle_deg) << "\n";
    ss << "domain_scale = " << format_double(domain_scale) << "\n";
    ss << "domain_holdout_label = " << domain_holdout_label << "\n";
    ss << "domain_pairs_per_class = " << domain_pairs_per_class << "\n";
    ss << "hidden = " << join_ints(hidden) << "\n";
    ss << "activation = " << activation << "\n";
    ss << "schedule_k = " << schedule_k << "\n";
    ss << "pretrain_iters = " << pretrain_iters << "\n";
    ss << "pretrain_batch = " << pretrain_batch << "\n";
    ss << "pretrain_lr = " << format_double(pretrain_lr) << "\n";
    ss << "pretrain_lr_end = " << format_double(pretrain_lr_end) << "\n";
    ss << "context_dropout = " << format_double(context_dropout) << "\n";
    ss << "distill_iters = " << distill_iters << "\n";
    ss << "distill_batch = " << distill_batch << "\n";
    ss << "distill_lr = " << format_double(distill_lr) << "\n";
    ss << "distill_lr_end = " << format_double(distill_lr_end) << "\n";
    ss << "distill_pool = " << distill_pool << "\n";
    ss << "tune_iters = " << tune_iters << "\n";
    ss << "tune_batch = " << tune_batch << "\n";
    ss << "tune_lr = " << format_double(tune_lr) << "\n";
    ss << "tune_lr_end = " << format_double(tune_lr_end) << "\n";
    ss << "tune_eps = " << format_double(tune_eps) << "\n";
    ss << "teacher_mode = " << teacher_mode << "\n";
    ss << "ema_momentum = " << format_double(ema_momentum) << "\n";
    ss << "teacher_cond = " << teacher_cond << "\n";
    ss << "teacher_params = " << teacher_params << "\n";
    ss << "offpolicy_random_t = " << (offpolicy_random_t ? "true" : "false") << "\n";
    ss << "sft_teacher_refresh = " << sft_teacher_refresh << "\n";
    ss << "eval_period = " << eval_period << "\n";
    ss << "eval_samples = " << eval_samples << "\n";
    ss << "sw_projections = " << sw_projections << "\n";
    ss << "dense_steps = " << dense_steps << "\n";
    ss << "log_period = " << log_period << "\n";
    ss << "ablate_seeds = " << join_u64s(ablate_seeds) << "\n";
    return ss.str();
}

uint64_t RunConfig::hash() const { return fnv1a(canonical_text()); }

DatasetSpec RunConfig::dataset_spec() const {
    DatasetSpec spec;
    spec.n_classes = n_classes;
    spec.mode_centers = mode_centers;
    spec.mode_std = mode_std;
    spec.samples_per_class = samples_per_class;
    if (scenario == "customize") {
        spec.concept_shift = ConceptShift{shift_label, shift_center, n_tune_pairs};
    }
    return spec;
}

}  // namespace flopsd
