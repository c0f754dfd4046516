#include "mkc/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mkc/error.hpp"

namespace mkc {

namespace {

std::string number(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split(const std::string& line, char sep)
{
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, sep)) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
    }
    return out;
}

double parse_number(const std::string& s, const std::string& where)
{
    if (s == "nan") {
        return std::nan("");
    }
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        require(used == s.size(), ErrorKind::IoError, where + ": bad number '" + s + "'");
        return v;
    } catch (const std::invalid_argument&) {
        fail(ErrorKind::IoError, where + ": bad number '" + s + "'");
    } catch (const std::out_of_range&) {
        fail(ErrorKind::IoError, where + ": number out of range '" + s + "'");
    }
}

template <class T>
void put(std::ostream& out, const T& v)
{
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T take(std::istream& in)
{
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    require(static_cast<bool>(in), ErrorKind::IoError, "truncated snapshot");
    return v;
}

} // namespace

void write_series_csv(std::ostream& out, const std::vector<DistanceSeries>& series)
{
    out << "scenario_id,seed,t,coupled_cost,lp_distance,ci_low,ci_high\n";
    for (const auto& s : series) {
        for (std::size_t k = 0; k < s.size(); ++k) {
            out << s.scenario_id << ',' << s.seed << ',' << number(s.times[k]) << ',' << number(s.coupled_cost[k])
                << ',' << number(s.lp_distance[k]) << ',' << number(s.ci_low[k]) << ',' << number(s.ci_high[k])
                << '\n';
        }
    }
}

std::vector<DistanceSeries> read_series_csv(std::istream& in)
{
    std::vector<DistanceSeries> out;
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorKind::IoError, "empty series file");
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto cells = split(line, ',');
        const std::string where = "row " + std::to_string(row);
        require(cells.size() == 7, ErrorKind::IoError, where + ": expected 7 columns");
        if (out.empty() || out.back().scenario_id != cells[0] || out.back().seed != cells[1]) {
            out.emplace_back();
            out.back().scenario_id = cells[0];
            out.back().seed = cells[1];
        }
        auto& s = out.back();
        s.times.push_back(parse_number(cells[2], where));
        s.coupled_cost.push_back(parse_number(cells[3], where));
        s.lp_distance.push_back(parse_number(cells[4], where));
        s.ci_low.push_back(parse_number(cells[5], where));
        s.ci_high.push_back(parse_number(cells[6], where));
        s.stderr_.push_back(0.0);
    }
    return out;
}

EmpiricalMeasure read_cloud_csv(const std::string& path)
{
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorKind::IoError, "cannot open cloud '" + path + "'");
    std::vector<double> points;
    std::vector<double> weights;
    std::size_t dim = 0;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty() || line[0] == '#') continue;
        const auto cells = split(line, ',');
        if (weights.empty() && dim == 0) {
            char* end = nullptr;
            std::strtod(cells[0].c_str(), &end);
            if (end == cells[0].c_str()) continue;  // header
        }
        const std::string where = path + ":" + std::to_string(row);
        require(cells.size() >= 2, ErrorKind::IoError, where + ": expected weight and coordinates");
        if (dim == 0) dim = cells.size() - 1;
        require(cells.size() - 1 == dim, ErrorKind::IoError, where + ": inconsistent dimension");
        weights.push_back(parse_number(cells[0], where));
        for (std::size_t k = 1; k < cells.size(); ++k) points.push_back(parse_number(cells[k], where));
    }
    require(!weights.empty(), ErrorKind::IoError, "cloud '" + path + "' has no atoms");
    return EmpiricalMeasure(dim, std::move(points), std::move(weights));
}

void write_cloud_csv(const std::string& path, const EmpiricalMeasure& m)
{
    std::ofstream out(path);
    require(static_cast<bool>(out), ErrorKind::IoError, "cannot write '" + path + "'");
    out << "weight";
    for (std::size_t k = 1; k <= m.dim(); ++k) out << ",x" << k;
    out << '\n';
    for (std::size_t i = 0; i < m.size(); ++i) {
        out << number(m.weight(i));
        for (double x : m.point(i)) out << ',' << number(x);
        out << '\n';
    }
}

void write_snapshot(const std::string& path, const GridDensity& g)
{
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), ErrorKind::IoError, "cannot write '" + path + "'");
    out.write("MKCGRID1", 8);
    put(out, static_cast<std::uint32_t>(g.dim()));
    for (auto n : g.shape()) put(out, static_cast<std::uint64_t>(n));
    for (double o : g.origin()) put(out, o);
    for (double h : g.spacing()) put(out, h);
    out.write(reinterpret_cast<const char*>(g.values().data()),
              static_cast<std::streamsize>(g.values().size() * sizeof(double)));
    require(static_cast<bool>(out), ErrorKind::IoError, "failed writing '" + path + "'");

    std::ofstream side(path + ".txt");
    side << "format = MKCGRID1\nendianness = little\ndim = " << g.dim() << "\nshape =";
    for (auto n : g.shape()) side << ' ' << n;
    side << "\norigin =";
    for (double o : g.origin()) side << ' ' << number(o);
    side << "\nspacing =";
    for (double h : g.spacing()) side << ' ' << number(h);
    side << "\nlayout = row-major, last axis fastest, float64\nmass = " << number(g.mass()) << '\n';
}

GridDensity read_snapshot(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorKind::IoError, "cannot open '" + path + "'");
    char magic[8];
    in.read(magic, 8);
    require(in && std::memcmp(magic, "MKCGRID1", 8) == 0, ErrorKind::IoError, "'" + path + "' is not a snapshot");
    const auto dim = take<std::uint32_t>(in);
    require(dim >= 1 && dim <= 2, ErrorKind::IoError, "snapshot dimension must be 1 or 2");
    std::vector<std::size_t> shape(dim);
    std::vector<double> origin(dim), spacing(dim);
    std::size_t count = 1;
    for (auto& n : shape) {
        n = static_cast<std::size_t>(take<std::uint64_t>(in));
        count *= n;
    }
    for (auto& o : origin) o = take<double>(in);
    for (auto& h : spacing) h = take<double>(in);
    std::vector<double> values(count);
    in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(count * sizeof(double)));
    require(static_cast<bool>(in), ErrorKind::IoError, "truncated snapshot");
    return GridDensity(std::move(origin), std::move(spacing), std::move(shape), std::move(values));
}

std::string verdict_json(const Verdict& v)
{
    nlohmann::json j;
    j["scenario_id"] = v.scenario_id;
    j["monotone"] = v.monotone;
    j["fitted_rate"] = v.fitted_rate ? nlohmann::json(*v.fitted_rate) : nlohmann::json(nullptr);
    j["expected_rate"] = v.expected_rate ? nlohmann::json(*v.expected_rate) : nlohmann::json(nullptr);
    j["pass"] = v.pass;
    j["detail"] = v.detail;
    return j.dump(2);
}

void write_verdict(const std::string& path, const Verdict& v)
{
    std::ofstream out(path);
    require(static_cast<bool>(out), ErrorKind::IoError, "cannot write '" + path + "'");
    out << verdict_json(v) << '\n';
}

Verdict read_verdict(const std::string& path)
{
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorKind::IoError, "cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
        Verdict v;
        v.scenario_id = j.at("scenario_id").get<std::string>();
        v.monotone = j.at("monotone").get<bool>();
        if (!j.at("fitted_rate").is_null()) v.fitted_rate = j["fitted_rate"].get<double>();
        if (!j.at("expected_rate").is_null()) v.expected_rate = j["expected_rate"].get<double>();
        v.pass = j.at("pass").get<bool>();
        v.detail = j.value("detail", std::string());
        return v;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::IoError, "'" + path + "': " + e.what());
    }
}

} // namespace mkc
