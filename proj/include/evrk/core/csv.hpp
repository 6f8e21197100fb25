// Dataset CSV format.
//
// Bit-exact contract: header row
//   t_s,veh_sp_mps,road_el_m,veh_acc_mps2,aux_ld_w,wind_sp_mps,env_temp_c,batt_soc_pct,act_pow_w
// followed by 10 Hz rows. Reals are written with the shortest decimal form
// that round-trips to the same IEEE-754 double, so write → read → write is
// byte-identical. Each window occupies 100 consecutive rows; env_temp_c and
// batt_soc_pct repeat the window scalar, act_pow_w repeats each 1 Hz target
// value 10 times. road_el_m carries elevation in meters (grade is derived by
// differencing at load, see prep).
//
// Trip membership is not part of the pinned schema; it travels in an optional
// sidecar `<path>.groups.csv` with header `window_index,trip_id`.
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "evrk/core/types.hpp"

namespace evrk::core {

inline constexpr std::string_view kDatasetHeader =
    "t_s,veh_sp_mps,road_el_m,veh_acc_mps2,aux_ld_w,wind_sp_mps,env_temp_c,batt_soc_pct,act_pow_w";

// Shortest decimal string that parses back to exactly v.
[[nodiscard]] std::string format_double(double v);

// Inverse of format_double; throws std::invalid_argument on malformed input.
[[nodiscard]] double parse_double(std::string_view text);

// Splits one CSV line on commas (no quoting in this format).
[[nodiscard]] std::vector<std::string_view> split_csv_line(std::string_view line);

// Writes windows (and the groups sidecar when trip ids are present).
// Windows without act_pow write empty act_pow_w cells.
void write_dataset_csv(const std::string& path, const Dataset& ds);

// Reads a dataset written by write_dataset_csv. Row count must be a multiple
// of 100; the groups sidecar is loaded when present.
[[nodiscard]] Dataset read_dataset_csv(const std::string& path);

}  // namespace evrk::core
