#include "evrk/core/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace evrk::core {

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
        throw std::invalid_argument("parse_double: malformed real '" + std::string(text) + "'");
    }
    return v;
}

std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            out.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

namespace {

[[nodiscard]] std::string groups_path(const std::string& path) { return path + ".groups.csv"; }

}  // namespace

void write_dataset_csv(const std::string& path, const Dataset& ds) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::invalid_argument("write_dataset_csv: cannot open '" + path + "'");
    }
    out << kDatasetHeader << '\n';
    std::size_t row = 0;
    for (const auto& w : ds.windows) {
        const auto check = validate_window(w);
        if (!check) {
            throw std::invalid_argument("write_dataset_csv: invalid window: " + check.violation);
        }
        for (int i = 0; i < kWindowSamples; ++i, ++row) {
            out << format_double(static_cast<double>(row) * 0.1) << ',';
            out << format_double(w.veh_sp[i]) << ',';
            out << format_double(w.road_el[i]) << ',';
            out << format_double(w.veh_acc[i]) << ',';
            out << format_double(w.aux_ld[i]) << ',';
            out << format_double(w.wind_sp[i]) << ',';
            out << format_double(w.env_temp) << ',';
            out << format_double(w.batt_soc) << ',';
            if (w.act_pow) {
                out << format_double((*w.act_pow)[i / 10]);
            }
            out << '\n';
        }
    }
    if (!out) {
        throw std::invalid_argument("write_dataset_csv: write failed for '" + path + "'");
    }
    out.close();

    if (!ds.trip_ids.empty()) {
        if (ds.trip_ids.size() != ds.windows.size()) {
            throw std::invalid_argument("write_dataset_csv: trip_ids size mismatch");
        }
        std::ofstream g(groups_path(path), std::ios::binary);
        if (!g) {
            throw std::invalid_argument("write_dataset_csv: cannot open groups sidecar");
        }
        g << "window_index,trip_id\n";
        for (std::size_t i = 0; i < ds.trip_ids.size(); ++i) {
            g << i << ',' << ds.trip_ids[i] << '\n';
        }
    }
}

Dataset read_dataset_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::invalid_argument("read_dataset_csv: cannot open '" + path + "'");
    }
    std::string line;
    if (!std::getline(in, line) || line != kDatasetHeader) {
        throw std::invalid_argument("read_dataset_csv: bad header in '" + path + "'");
    }

    Dataset ds;
    ds.provenance = path;
    PartitionedWindow w;
    auto reset_window = [&w] {
        w.veh_sp.resize(kWindowSamples);
        w.road_el.resize(kWindowSamples);
        w.veh_acc.resize(kWindowSamples);
        w.aux_ld.resize(kWindowSamples);
        w.wind_sp.resize(kWindowSamples);
        w.act_pow.reset();
    };
    reset_window();

    int in_window = 0;
    std::size_t row = 0;
    Eigen::VectorXd act(kWindowSeconds);
    bool has_act = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != 9) {
            throw std::invalid_argument("read_dataset_csv: row " + std::to_string(row + 2) +
                                        " has " + std::to_string(cells.size()) + " cells");
        }
        w.veh_sp[in_window] = parse_double(cells[1]);
        w.road_el[in_window] = parse_double(cells[2]);
        w.veh_acc[in_window] = parse_double(cells[3]);
        w.aux_ld[in_window] = parse_double(cells[4]);
        w.wind_sp[in_window] = parse_double(cells[5]);
        if (in_window == 0) {
            w.env_temp = parse_double(cells[6]);
            w.batt_soc = parse_double(cells[7]);
            has_act = !cells[8].empty();
        }
        if (has_act != !cells[8].empty()) {
            throw std::invalid_argument("read_dataset_csv: mixed empty/non-empty act_pow_w");
        }
        if (has_act && in_window % 10 == 0) {
            act[in_window / 10] = parse_double(cells[8]);
        }
        ++in_window;
        ++row;
        if (in_window == kWindowSamples) {
            if (has_act) w.act_pow = act;
            ds.windows.push_back(w);
            reset_window();
            in_window = 0;
        }
    }
    if (in_window != 0) {
        throw std::invalid_argument("read_dataset_csv: row count not a multiple of 100");
    }

    std::ifstream g(groups_path(path), std::ios::binary);
    if (g) {
        std::string gline;
        if (!std::getline(g, gline) || (gline != "window_index,trip_id" &&
                                        gline != "window_index,trip_id\r")) {
            throw std::invalid_argument("read_dataset_csv: bad groups sidecar header");
        }
        while (std::getline(g, gline)) {
            if (!gline.empty() && gline.back() == '\r') gline.pop_back();
            if (gline.empty()) continue;
            const auto cells = split_csv_line(gline);
            if (cells.size() != 2) {
                throw std::invalid_argument("read_dataset_csv: bad groups sidecar row");
            }
            ds.trip_ids.push_back(static_cast<int64_t>(parse_double(cells[1])));
        }
        if (ds.trip_ids.size() != ds.windows.size()) {
            throw std::invalid_argument("read_dataset_csv: groups sidecar size mismatch");
        }
    }
    return ds;
}

}  // namespace evrk::core
