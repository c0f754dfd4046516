// mkclab: run scenario configs, solve ad-hoc transport problems, evaluate the
// cost identities and summarize result directories.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mkc/config.hpp"
#include "mkc/costs.hpp"
#include "mkc/expression.hpp"
#include "mkc/harness.hpp"
#include "mkc/io.hpp"
#include "mkc/ot.hpp"
#include "mkc/parallel.hpp"

namespace fs = std::filesystem;

namespace {

int cmd_run(const std::vector<std::string>& configs, const std::string& out_override)
{
    bool all_pass = true;
    for (const auto& path : configs) {
        mkc::ScenarioConfig cfg = mkc::load_config(path);
        if (!out_override.empty()) cfg.output_dir = out_override;
        const mkc::ScenarioResult r = mkc::run_scenario(cfg);
        mkc::write_outputs(r, cfg.output_dir);
        std::printf("%-28s %s  %s\n", cfg.id.c_str(), r.verdict.pass ? "PASS" : "FAIL", r.verdict.detail.c_str());
        all_pass = all_pass && r.verdict.pass;
    }
    return all_pass ? 0 : 1;
}

int cmd_distance(const std::string& a, const std::string& b, const std::string& cost_text)
{
    const mkc::EmpiricalMeasure u1 = mkc::read_cloud_csv(a);
    const mkc::EmpiricalMeasure u2 = mkc::read_cloud_csv(b);
    const mkc::CostSpec cost = mkc::parse_cost(cost_text);
    const mkc::TransportPlan plan = mkc::wasserstein_lp(u1, u2, cost);
    std::printf("%.17g\n", plan.cost_value);
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Monotone coupling laboratory"};
    app.require_subcommand(1);
    app.footer("Worker threads: MKC_WORKERS (default: hardware concurrency).");

    std::vector<std::string> configs;
    std::string out_dir;
    auto* run = app.add_subcommand("run", "Run scenario configs and write series and verdicts");
    run->add_option("config", configs, "YAML scenario files")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "Override the output directory of every config");

    std::string cloud1, cloud2, cost_text = "power:2";
    auto* distance = app.add_subcommand("distance", "Optimal transport cost between two CSV clouds");
    distance->add_option("cloud1", cloud1)->required()->check(CLI::ExistingFile);
    distance->add_option("cloud2", cloud2)->required()->check(CLI::ExistingFile);
    distance->add_option("--cost", cost_text, "power:p | dfunction:d(r) | regularized:eps | yamada:eps");

    auto* residual = app.add_subcommand("residual", "Evaluate cost-side identities");
    residual->require_subcommand(1);

    double alpha = 1.5, truncation = 1e4;
    auto* stable = residual->add_subcommand("stable", "Stable-kernel identity residual and constant");
    stable->add_option("--alpha", alpha)->check(CLI::Range(0.0, 2.0));
    stable->add_option("--truncation", truncation);

    std::string sigma_text = "1", rho_text = "power:2";
    double x = 0.3, y = -0.4;
    auto* weight = residual->add_subcommand("weight", "1D weight equation residual with a = sigma^2");
    weight->add_option("--sigma", sigma_text, "sigma(x)");
    weight->add_option("--cost", rho_text);
    weight->add_option("-x", x);
    weight->add_option("-y", y);

    std::string d_text = "x", source_text = "0";
    double tx = 0.2, ty = 0.7;
    auto* ttt = residual->add_subcommand("ttt", "Jump inequality rho max(d) >= int ... b(z) dz");
    ttt->add_option("--cost", rho_text);
    ttt->add_option("--rate", d_text, "d(x)");
    ttt->add_option("--source", source_text, "atom location, or lower:upper for the uniform law");
    ttt->add_option("-x", tx);
    ttt->add_option("-y", ty);

    std::string report_dir;
    auto* report = app.add_subcommand("report", "Summarize verdicts in a results directory");
    report->add_option("dir", report_dir)->required()->check(CLI::ExistingDirectory);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(configs, out_dir);
        if (*distance) return cmd_distance(cloud1, cloud2, cost_text);
        if (*stable) {
            const double r = mkc::stable_identity_residual(alpha, truncation);
            std::printf("residual %.6e\nC_alpha quadrature %.15g\nC_alpha closed form %.15g\n", r,
                        mkc::stable_constant(alpha), mkc::stable_constant_closed_form(alpha));
            return 0;
        }
        if (*weight) {
            const auto s = mkc::Expression::compile(sigma_text, {"x"});
            const mkc::MatrixField sig = [s](std::span<const double> p) {
                return Eigen::MatrixXd::Constant(1, 1, s(p[0]));
            };
            const mkc::MatrixField a = [s](std::span<const double> p) {
                const double v = s(p[0]);
                return Eigen::MatrixXd::Constant(1, 1, v * v);
            };
            const double r = mkc::weight_pde_residual(a, sig, mkc::parse_cost(rho_text), std::span<const double>(&x, 1),
                                                      std::span<const double>(&y, 1));
            std::printf("%.17g\n", r);
            return 0;
        }
        if (*ttt) {
            const auto d = mkc::Expression::compile(d_text, {"x"});
            mkc::SourceLaw b;
            if (const auto colon = source_text.find(':'); colon != std::string::npos) {
                const double lo = std::stod(source_text.substr(0, colon));
                const double hi = std::stod(source_text.substr(colon + 1));
                b = mkc::SourceLaw::on_interval([lo, hi](double) { return 1.0 / (hi - lo); }, lo, hi);
            } else {
                b = mkc::SourceLaw::dirac(std::stod(source_text));
            }
            const auto res = mkc::ttt_check(mkc::parse_cost(rho_text), b, [d](double z) { return d(z); }, tx, ty);
            std::printf("lhs %.17g\nrhs %.17g\n%s\n", res.lhs, res.rhs, res.holds ? "holds" : "violated");
            return res.holds ? 0 : 1;
        }
        if (*report) {
            std::map<std::string, mkc::Verdict> verdicts;
            for (const auto& entry : fs::directory_iterator(report_dir)) {
                if (entry.path().extension() == ".json") {
                    const auto v = mkc::read_verdict(entry.path().string());
                    verdicts[v.scenario_id] = v;
                }
            }
            bool all = !verdicts.empty();
            for (const auto& [id, v] : verdicts) {
                std::printf("%-28s %s  monotone=%d", id.c_str(), v.pass ? "PASS" : "FAIL", v.monotone ? 1 : 0);
                if (v.fitted_rate) std::printf("  rate=%.4f", *v.fitted_rate);
                if (v.expected_rate) std::printf("  expected=%.4f", *v.expected_rate);
                std::printf("\n");
                all = all && v.pass;
            }
            return all ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
