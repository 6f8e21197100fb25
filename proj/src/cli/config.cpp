#include "evrk/cli/config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string_view>
#include <unordered_map>

#include "evrk/core/csv.hpp"

namespace evrk::cli {
namespace {

std::string_view trim(std::string_view s) {
    const auto from = s.find_first_not_of(" \t\r");
    if (from == std::string_view::npos) return {};
    const auto to = s.find_last_not_of(" \t\r");
    return s.substr(from, to - from + 1);
}

std::vector<std::string> split_list(std::string_view value) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= value.size(); ++i) {
        if (i == value.size() || value[i] == ',') {
            const auto item = trim(value.substr(start, i - start));
            if (!item.empty()) out.emplace_back(item);
            start = i + 1;
        }
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& key, std::string_view value) {
    std::vector<double> out;
    for (const auto& item : split_list(value)) {
        try {
            out.push_back(core::parse_double(item));
        } catch (const std::invalid_argument&) {
            throw std::invalid_argument("config: " + key + ": bad real '" + item + "'");
        }
    }
    if (out.empty()) throw std::invalid_argument("config: " + key + ": empty list");
    return out;
}

std::vector<int> parse_int_list(const std::string& key, std::string_view value) {
    std::vector<int> out;
    for (double v : parse_double_list(key, value)) {
        const int i = static_cast<int>(v);
        if (static_cast<double>(i) != v) {
            throw std::invalid_argument("config: " + key + ": expected integers");
        }
        out.push_back(i);
    }
    return out;
}

double parse_one_double(const std::string& key, std::string_view value) {
    try {
        return core::parse_double(trim(value));
    } catch (const std::invalid_argument&) {
        throw std::invalid_argument("config: " + key + ": bad real '" +
                                    std::string(value) + "'");
    }
}

int parse_one_int(const std::string& key, std::string_view value) {
    const double v = parse_one_double(key, value);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v) {
        throw std::invalid_argument("config: " + key + ": expected an integer");
    }
    return i;
}

bool parse_bool(const std::string& key, std::string_view value) {
    const auto v = trim(value);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::invalid_argument("config: " + key + ": expected true/false");
}

std::uint64_t parse_seed(const std::string& key, std::string_view value) {
    const auto v = trim(value);
    std::uint64_t out = 0;
    if (v.empty()) throw std::invalid_argument("config: " + key + ": empty seed");
    for (char c : v) {
        if (c < '0' || c > '9') {
            throw std::invalid_argument("config: " + key + ": expected an unsigned integer");
        }
        out = out * 10 + static_cast<std::uint64_t>(c - '0');
    }
    return out;
}

std::string join_doubles(const std::vector<double>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ',';
        out += core::format_double(xs[i]);
    }
    return out;
}

std::string join_ints(const std::vector<int>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(xs[i]);
    }
    return out;
}

std::string join_names(const std::vector<std::string>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ',';
        out += xs[i];
    }
    return out;
}

const std::vector<std::string> kGradeNames = {"flat", "rolling", "hill_climb", "descent"};
const std::vector<std::string> kAuxNames = {"off", "low", "climate"};
const std::vector<std::string> kCycleNames = {"trapezoid", "sawtooth", "stop_and_go",
                                              "udds_like"};

bool known_wind(const std::string& name) {
    if (name == "calm" || name == "strong_breeze") return true;
    if (name.rfind("beaufort", 0) == 0 && name.size() == 9) {
        return name[8] >= '0' && name[8] <= '7';
    }
    return false;
}

void check_names(const std::string& key, const std::vector<std::string>& names,
                 const std::vector<std::string>& known) {
    if (names.empty()) throw std::invalid_argument("config: " + key + ": empty list");
    for (const auto& n : names) {
        if (std::find(known.begin(), known.end(), n) == known.end()) {
            throw std::invalid_argument("config: " + key + ": unknown name '" + n + "'");
        }
    }
}

void check_grid(const std::string& prefix, const GridSpec& g) {
    if (g.temps_C.empty()) {
        throw std::invalid_argument("config: " + prefix + ".temps_c: empty list");
    }
    if (g.initial_socs.empty()) {
        throw std::invalid_argument("config: " + prefix + ".initial_socs: empty list");
    }
    for (double s : g.initial_socs) {
        if (s < 0.0 || s > 100.0) {
            throw std::invalid_argument("config: " + prefix +
                                        ".initial_socs: outside [0,100]");
        }
    }
    check_names(prefix + ".grades", g.grades, kGradeNames);
    check_names(prefix + ".cycles", g.cycles, kCycleNames);
    check_names(prefix + ".aux", g.aux, kAuxNames);
    if (g.winds.empty()) {
        throw std::invalid_argument("config: " + prefix + ".winds: empty list");
    }
    for (const auto& w : g.winds) {
        if (!known_wind(w)) {
            throw std::invalid_argument("config: " + prefix + ".winds: unknown name '" +
                                        w + "'");
        }
    }
}

}  // namespace

void ExperimentConfig::validate() const {
    vehicle.validate();
    check_grid("gen", gen);
    check_grid("test", test);
    if (gen_noise_scale < 0.0) {
        throw std::invalid_argument("config: gen.noise_scale: negative");
    }
    if (train_fraction <= 0.0 || train_fraction >= 1.0) {
        throw std::invalid_argument("config: gen.train_fraction: outside (0,1)");
    }
    if (train_epochs < 1) throw std::invalid_argument("config: train.epochs: < 1");
    if (train_batch_size < 1) throw std::invalid_argument("config: train.batch_size: < 1");
    if (train_hidden < 1) throw std::invalid_argument("config: train.hidden: < 1");
    if (train_dropout < 0.0 || train_dropout >= 1.0) {
        throw std::invalid_argument("config: train.dropout: outside [0,1)");
    }
    if (bdt_tree_counts.empty() || bdt_max_depths.empty() || bdt_min_leaf_sizes.empty()) {
        throw std::invalid_argument("config: bdt search space: empty axis");
    }
    for (int t : bdt_tree_counts) {
        if (t < 1) throw std::invalid_argument("config: bdt.tree_counts: < 1");
    }
    for (int m : bdt_min_leaf_sizes) {
        if (m < 1) throw std::invalid_argument("config: bdt.min_leaf_sizes: < 1");
    }
    if (bdt_k_folds < 2) throw std::invalid_argument("config: bdt.k_folds: < 2");
    if (bdt_tune_max_rows < 0) {
        throw std::invalid_argument("config: bdt.tune_max_rows: negative");
    }
    if (eval_cv_k < 4) throw std::invalid_argument("config: eval.cv_k: < 4");
    if (eval_cv_runs < 1) throw std::invalid_argument("config: eval.cv_runs: < 1");
    if (eval_cv_max_windows < 0) {
        throw std::invalid_argument("config: eval.cv_max_windows: negative");
    }
    if (eval_cv_epochs < 0) throw std::invalid_argument("config: eval.cv_epochs: negative");
    if (eval_alpha <= 0.0 || eval_alpha >= 0.5) {
        throw std::invalid_argument("config: eval.alpha: outside (0,0.5)");
    }
    if (eval_timing_reps < 1) throw std::invalid_argument("config: eval.timing_reps: < 1");
    if (eval_min_corr < -1.0 || eval_min_corr > 1.0) {
        throw std::invalid_argument("config: eval.min_corr: outside [-1,1]");
    }
}

std::string ExperimentConfig::canonical_text() const {
    std::ostringstream out;
    out << "seed = " << seed << '\n';
    out << "out_dir = " << out_dir << '\n';
    out << "vehicle.mass_kg = " << core::format_double(vehicle.mass_kg) << '\n';
    out << "vehicle.frontal_area_m2 = " << core::format_double(vehicle.frontal_area_m2)
        << '\n';
    out << "vehicle.drag_coeff = " << core::format_double(vehicle.drag_coeff) << '\n';
    out << "vehicle.rolling_resist_coeff = "
        << core::format_double(vehicle.rolling_resist_coeff) << '\n';
    out << "vehicle.mass_factor = " << core::format_double(vehicle.mass_factor) << '\n';
    out << "vehicle.trans_eff = " << core::format_double(vehicle.trans_eff) << '\n';
    out << "vehicle.motor_eff = " << core::format_double(vehicle.motor_eff) << '\n';
    out << "vehicle.elec_eff = " << core::format_double(vehicle.elec_eff) << '\n';
    out << "vehicle.battery_capacity_j = "
        << core::format_double(vehicle.battery_capacity_J) << '\n';
    out << "vehicle.accessory_base_w = " << core::format_double(vehicle.accessory_base_W)
        << '\n';
    out << "vehicle.rated_power_w = " << core::format_double(vehicle.rated_power_W) << '\n';
    out << "gen.temps_c = " << join_doubles(gen.temps_C) << '\n';
    out << "gen.grades = " << join_names(gen.grades) << '\n';
    out << "gen.initial_socs = " << join_doubles(gen.initial_socs) << '\n';
    out << "gen.cycles = " << join_names(gen.cycles) << '\n';
    out << "gen.winds = " << join_names(gen.winds) << '\n';
    out << "gen.aux = " << join_names(gen.aux) << '\n';
    out << "gen.noise_scale = " << core::format_double(gen_noise_scale) << '\n';
    out << "gen.derating = " << (gen_derating ? "true" : "false") << '\n';
    out << "gen.train_fraction = " << core::format_double(train_fraction) << '\n';
    out << "test.temps_c = " << join_doubles(test.temps_C) << '\n';
    out << "test.grades = " << join_names(test.grades) << '\n';
    out << "test.initial_socs = " << join_doubles(test.initial_socs) << '\n';
    out << "test.cycles = " << join_names(test.cycles) << '\n';
    out << "test.winds = " << join_names(test.winds) << '\n';
    out << "test.aux = " << join_names(test.aux) << '\n';
    out << "train.epochs = " << train_epochs << '\n';
    out << "train.batch_size = " << train_batch_size << '\n';
    out << "train.hidden = " << train_hidden << '\n';
    out << "train.dropout = " << core::format_double(train_dropout) << '\n';
    out << "bdt.tree_counts = " << join_ints(bdt_tree_counts) << '\n';
    out << "bdt.max_depths = " << join_ints(bdt_max_depths) << '\n';
    out << "bdt.min_leaf_sizes = " << join_ints(bdt_min_leaf_sizes) << '\n';
    out << "bdt.k_folds = " << bdt_k_folds << '\n';
    out << "bdt.tune_max_rows = " << bdt_tune_max_rows << '\n';
    out << "eval.cv_k = " << eval_cv_k << '\n';
    out << "eval.cv_runs = " << eval_cv_runs << '\n';
    out << "eval.cv_max_windows = " << eval_cv_max_windows << '\n';
    out << "eval.cv_epochs = " << eval_cv_epochs << '\n';
    out << "eval.alpha = " << core::format_double(eval_alpha) << '\n';
    out << "eval.timing_reps = " << eval_timing_reps << '\n';
    out << "eval.min_corr = " << core::format_double(eval_min_corr) << '\n';
    return out.str();
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::string ExperimentConfig::checksum() const {
    static const char* kHex = "0123456789abcdef";
    std::uint64_t h = fnv1a64(canonical_text());
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = kHex[h & 0xf];
        h >>= 4;
    }
    return out;
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    const std::unordered_map<std::string, std::function<void(const std::string&,
                                                             std::string_view)>>
        setters = {
            {"seed", [&](const std::string& k, std::string_view v) { cfg.seed = parse_seed(k, v); }},
            {"out_dir",
             [&](const std::string&, std::string_view v) { cfg.out_dir = std::string(trim(v)); }},
            {"vehicle.mass_kg",
             [&](const std::string& k, std::string_view v) { cfg.vehicle.mass_kg = parse_one_double(k, v); }},
            {"vehicle.frontal_area_m2",
             [&](const std::string& k, std::string_view v) { cfg.vehicle.frontal_area_m2 = parse_one_double(k, v); }},
            {"vehicle.drag_coeff",
             [&](const std::string& k, std::string_view v) { cfg.vehicle.drag_coeff = parse_one_double(k, v); }},
            {"vehicle.rolling_resist_coeff",
             [&](const std::string& k, std::string_view v) { cfg.vehicle.rolling_resist_coeff = parse_one_double(k, v); }},
            {"vehicle.mass_factor",
             [&](const std::string& k, std::string_view v) { cfg.vehicle.mass_factor = parse_one_double(k, v); }},
            {"vehicle.trans_eff",
             [&](const std::string& k, std::string_view v) { cfg.vehicle.trans_eff = parse_one_double(k, v); }},
            {"vehicle.motor_eff",
             [&](const std::string& k, std::string_view v) { cfg.vehicle.motor_eff = parse_one_double(k, v); }},
            {"vehicle.elec_eff",
             [&](const std::string& k, std::string_view v) { cfg.vehicle.elec_eff = parse_one_double(k, v); }},
            {"vehicle.battery_capacity_j",
             [&](const std::string& k, std::string_view v) { cfg.vehicle.battery_capacity_J = parse_one_double(k, v); }},
            {"vehicle.accessory_base_w",
             [&](const std::string& k, std::string_view v) { cfg.vehicle.accessory_base_W = parse_one_double(k, v); }},
            {"vehicle.rated_power_w",
             [&](const std::string& k, std::string_view v) { cfg.vehicle.rated_power_W = parse_one_double(k, v); }},
            {"gen.temps_c",
             [&](const std::string& k, std::string_view v) { cfg.gen.temps_C = parse_double_list(k, v); }},
            {"gen.grades",
             [&](const std::string&, std::string_view v) { cfg.gen.grades = split_list(v); }},
            {"gen.initial_socs",
             [&](const std::string& k, std::string_view v) { cfg.gen.initial_socs = parse_double_list(k, v); }},
            {"gen.cycles",
             [&](const std::string&, std::string_view v) { cfg.gen.cycles = split_list(v); }},
            {"gen.winds",
             [&](const std::string&, std::string_view v) { cfg.gen.winds = split_list(v); }},
            {"gen.aux",
             [&](const std::string&, std::string_view v) { cfg.gen.aux = split_list(v); }},
            {"gen.noise_scale",
             [&](const std::string& k, std::string_view v) { cfg.gen_noise_scale = parse_one_double(k, v); }},
            {"gen.derating",
             [&](const std::string& k, std::string_view v) { cfg.gen_derating = parse_bool(k, v); }},
            {"gen.train_fraction",
             [&](const std::string& k, std::string_view v) { cfg.train_fraction = parse_one_double(k, v); }},
            {"test.temps_c",
             [&](const std::string& k, std::string_view v) { cfg.test.temps_C = parse_double_list(k, v); }},
            {"test.grades",
             [&](const std::string&, std::string_view v) { cfg.test.grades = split_list(v); }},
            {"test.initial_socs",
             [&](const std::string& k, std::string_view v) { cfg.test.initial_socs = parse_double_list(k, v); }},
            {"test.cycles",
             [&](const std::string&, std::string_view v) { cfg.test.cycles = split_list(v); }},
            {"test.winds",
             [&](const std::string&, std::string_view v) { cfg.test.winds = split_list(v); }},
            {"test.aux",
             [&](const std::string&, std::string_view v) { cfg.test.aux = split_list(v); }},
            {"train.epochs",
             [&](const std::string& k, std::string_view v) { cfg.train_epochs = parse_one_int(k, v); }},
            {"train.batch_size",
             [&](const std::string& k, std::string_view v) { cfg.train_batch_size = parse_one_int(k, v); }},
            {"train.hidden",
             [&](const std::string& k, std::string_view v) { cfg.train_hidden = parse_one_int(k, v); }},
            {"train.dropout",
             [&](const std::string& k, std::string_view v) { cfg.train_dropout = parse_one_double(k, v); }},
            {"bdt.tree_counts",
             [&](const std::string& k, std::string_view v) { cfg.bdt_tree_counts = parse_int_list(k, v); }},
            {"bdt.max_depths",
             [&](const std::string& k, std::string_view v) { cfg.bdt_max_depths = parse_int_list(k, v); }},
            {"bdt.min_leaf_sizes",
             [&](const std::string& k, std::string_view v) { cfg.bdt_min_leaf_sizes = parse_int_list(k, v); }},
            {"bdt.k_folds",
             [&](const std::string& k, std::string_view v) { cfg.bdt_k_folds = parse_one_int(k, v); }},
            {"bdt.tune_max_rows",
             [&](const std::string& k, std::string_view v) { cfg.bdt_tune_max_rows = parse_one_int(k, v); }},
            {"eval.cv_k",
             [&](const std::string& k, std::string_view v) { cfg.eval_cv_k = parse_one_int(k, v); }},
            {"eval.cv_runs",
             [&](const std::string& k, std::string_view v) { cfg.eval_cv_runs = parse_one_int(k, v); }},
            {"eval.cv_max_windows",
             [&](const std::string& k, std::string_view v) { cfg.eval_cv_max_windows = parse_one_int(k, v); }},
            {"eval.cv_epochs",
             [&](const std::string& k, std::string_view v) { cfg.eval_cv_epochs = parse_one_int(k, v); }},
            {"eval.alpha",
             [&](const std::string& k, std::string_view v) { cfg.eval_alpha = parse_one_double(k, v); }},
            {"eval.timing_reps",
             [&](const std::string& k, std::string_view v) { cfg.eval_timing_reps = parse_one_int(k, v); }},
            {"eval.min_corr",
             [&](const std::string& k, std::string_view v) { cfg.eval_min_corr = parse_one_double(k, v); }},
        };

    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                        ": expected key = value");
        }
        const std::string key{trim(line.substr(0, eq))};
        const auto it = setters.find(key);
        if (it == setters.end()) {
            throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                        ": unknown key '" + key + "'");
        }
        it->second(key, line.substr(eq + 1));
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace evrk::cli
