// Offline Monte Carlo generator for the Mann-Whitney CPM threshold tables.
//
// For each t, h_t is the (1 - 1/ARL0) quantile of max_k |Z_{k,t}| among
// simulated i.i.d. streams that have not alarmed before t, so the
// conditional false-alarm probability is constant and the in-control run
// length is geometric with mean ARL0. The statistic is rank based, so
// uniform streams cover every continuous distribution.
//
// Usage: gen_cpm_thresholds [--streams N] [--length T] [--seed S] [--out file.cpp]

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "psmdid/changepoint.hpp"

namespace {

std::vector<std::size_t> tabulated_points(std::size_t warmup, std::size_t length) {
    std::vector<std::size_t> ts;
    for (std::size_t t = warmup; t <= length; ++t) {
        if (t <= 60 || (t <= 200 && t % 5 == 0) || t % 25 == 0 || t == length) ts.push_back(t);
    }
    return ts;
}

std::size_t smoothing_half_width(std::size_t t) {
    if (t < 30) return 0;
    if (t < 60) return 3;
    if (t < 200) return 6;
    return 15;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Generate Mann-Whitney CPM threshold tables"};
    std::size_t streams = 40000;
    std::size_t length = 500;
    std::uint64_t seed = 20110101;
    std::string out_path = "cpm_thresholds.cpp";
    app.add_option("--streams", streams, "number of simulated in-control streams");
    app.add_option("--length", length, "largest tabulated t");
    app.add_option("--seed", seed, "generator seed");
    app.add_option("--out", out_path, "output C++ source");
    CLI11_PARSE(app, argc, argv);

    constexpr std::size_t kWarmup = 20;
    const std::vector<int> arls = {370, 500, 1000};

    // max statistic per stream and t, stored as float to bound memory
    std::vector<float> stats(streams * (length + 1), 0.0f);
    std::mt19937_64 rng(seed);
    for (std::size_t s = 0; s < streams; ++s) {
        psmdid::MannWhitneyCpm cpm;
        for (std::size_t t = 1; t <= length; ++t) {
            const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            stats[s * (length + 1) + t] = static_cast<float>(cpm.push(u).max_abs);
        }
        if ((s + 1) % 5000 == 0) std::cerr << "simulated " << (s + 1) << " streams\n";
    }

    std::ofstream out(out_path);
    out << "// Generated by tools/gen_cpm_thresholds (streams=" << streams << ", length=" << length
        << ", seed=" << seed << "). Do not edit.\n";
    out << "#include \"cpm_thresholds.hpp\"\n\n#include <array>\n\nnamespace psmdid::detail {\n\nnamespace {\n\n";

    const auto ts = tabulated_points(kWarmup, length);
    for (int arl : arls) {
        const double alpha = 1.0 / arl;
        std::vector<bool> alive(streams, true);
        std::vector<double> raw(length + 1, 0.0);
        std::vector<float> pool;
        for (std::size_t t = kWarmup; t <= length; ++t) {
            pool.clear();
            for (std::size_t s = 0; s < streams; ++s)
                if (alive[s]) pool.push_back(stats[s * (length + 1) + t]);
            const auto rank = static_cast<std::size_t>((1.0 - alpha) * static_cast<double>(pool.size()));
            std::nth_element(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(rank), pool.end());
            raw[t] = pool[rank];
            for (std::size_t s = 0; s < streams; ++s)
                if (alive[s] && stats[s * (length + 1) + t] > raw[t]) alive[s] = false;
        }
        out << "constexpr std::array<ThresholdPoint, " << ts.size() << "> kArl" << arl << " = {{\n";
        for (std::size_t t : ts) {
            const std::size_t w = smoothing_half_width(t);
            const std::size_t lo = std::max(kWarmup, t - std::min(t, w));
            const std::size_t hi = std::min(length, t + w);
            double h = 0.0;
            for (std::size_t q = lo; q <= hi; ++q) h += raw[q];
            h /= static_cast<double>(hi - lo + 1);
            char buf[64];
            std::snprintf(buf, sizeof buf, "    {%zu, %.4f},\n", t, h);
            out << buf;
        }
        out << "}};\n\n";
    }
    out << "}  // namespace\n\nstd::span<const ThresholdPoint> cpm_threshold_table(int arl0) {\n";
    for (int arl : arls) out << "    if (arl0 == " << arl << ") return kArl" << arl << ";\n";
    out << "    return {};\n}\n\n}  // namespace psmdid::detail\n";
    return 0;
}
