#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mkc/measures.hpp"
#include "mkc/series.hpp"

namespace mkc {

// scenario_id,seed,t,coupled_cost,lp_distance,ci_low,ci_high with %.17g numbers
// ("nan" where the OT column was not computed).
void write_series_csv(std::ostream& out, const std::vector<DistanceSeries>& series);
std::vector<DistanceSeries> read_series_csv(std::istream& in);

// Clouds: one row per atom, "weight,x1,...,xd"; lines starting with '#' and a
// non-numeric header row are skipped.
EmpiricalMeasure read_cloud_csv(const std::string& path);
void write_cloud_csv(const std::string& path, const EmpiricalMeasure& m);

// Grid snapshot: little-endian binary
//   char[8] "MKCGRID1" | u32 dim | u64 shape[dim] | f64 origin[dim] | f64 spacing[dim] | f64 values[prod shape]
// values row-major with the last axis fastest, plus a "<path>.txt" sidecar
// listing the same header fields as key = value lines.
void write_snapshot(const std::string& path, const GridDensity& g);
GridDensity read_snapshot(const std::string& path);

struct Verdict {
    std::string scenario_id;
    bool monotone = true;
    std::optional<double> fitted_rate;
    std::optional<double> expected_rate;
    bool pass = false;
    std::string detail;
};

std::string verdict_json(const Verdict& v);
void write_verdict(const std::string& path, const Verdict& v);
Verdict read_verdict(const std::string& path);

} // namespace mkc
