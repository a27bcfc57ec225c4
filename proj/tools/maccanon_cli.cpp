#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "maccanon/admission.hpp"
#include "maccanon/io.hpp"
#include "maccanon/solvers.hpp"

using namespace maccanon;

namespace {

std::uint64_t env_seed() {
    if (const char* s = std::getenv("MACCANON_SEED")) return std::strtoull(s, nullptr, 10);
    return 0;
}

rvec to_rvec(const std::vector<double>& v) {
    return Eigen::Map<const rvec>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void print_vec(const char* label, const rvec& v) {
    std::printf("%s:", label);
    for (Eigen::Index i = 0; i < v.size(); ++i) std::printf(" %.9g", v(i));
    std::printf("\n");
}

void print_summary(const SolveReport& rep, double seconds) {
    std::printf("flag: %d\n", rep.flag);
    std::printf("objective: %.12g\n", rep.objective);
    if (rep.rates.size()) print_vec("rates", rep.combined_rates());
    if (rep.energies.size()) print_vec("energies", rep.energies);
    std::printf("outer_iterations: %d\n", rep.outer_iterations);
    std::printf("wall_time_s: %.3f\n", seconds);
}

struct GenArgs {
    ChannelSpec spec;
    std::string model = "iid";
    int tx = 2;
    std::string out = "channel.json";
};

int run_gen(GenArgs& a) {
    a.spec.tx_antennas.assign(static_cast<size_t>(a.spec.num_users), a.tx);
    a.spec.model = a.model == "kronecker" ? FadingModel::KroneckerExponential
                                          : FadingModel::IidRayleigh;
    ChannelSet ch = generate_channel(a.spec);
    save_channel(a.out, ch);
    std::printf("wrote %s (U=%d, L_y=%d, N=%d)\n", a.out.c_str(), ch.num_users, ch.rx_antennas,
                ch.num_tones);
    return 0;
}

struct SolveArgs {
    std::string alg;
    std::string channel;
    std::vector<double> energies;
    std::vector<double> rates;
    std::vector<double> weights;
    double total_energy = -1.0;
    double snr_db = std::nan("");
    std::string out = "report.json";
    int parallel = 0;
};

int run_solve(SolveArgs& a) {
    ChannelSet ch = load_channel(a.channel);
    int nu = ch.num_users;

    rvec e;
    if (!a.energies.empty()) {
        e = to_rvec(a.energies);
    } else if (!std::isnan(a.snr_db)) {
        // convention: E_u = N * SNR_lin per user
        e = rvec::Constant(nu, ch.num_tones * std::pow(10.0, a.snr_db / 10.0));
    }
    rvec weights = a.weights.empty() ? rvec(rvec::Ones(nu)) : to_rvec(a.weights);
    rvec rates = a.rates.empty() ? rvec() : to_rvec(a.rates);

    SolverOptions so;
    so.workers = a.parallel;

    auto t0 = std::chrono::steady_clock::now();
    SolveReport rep;
    int exit_code = 0;
    try {
        if (a.alg == "maxrmac") {
            if (e.size() != nu) throw ValidationError("maxrmac needs --energies or --snr-db");
            rep = max_rmac(ch, e, weights, so);
        } else if (a.alg == "minpmac") {
            if (rates.size() != nu) throw ValidationError("minpmac needs --rates");
            rep = min_pmac(ch, rates, weights, so);
        } else if (a.alg == "maxresmac") {
            if (!(a.total_energy > 0.0)) throw ValidationError("maxresmac needs --total-energy");
            rep = max_resmac(ch, a.total_energy, weights, so);
        } else {  // admmac
            if (rates.size() != nu) throw ValidationError("admmac needs --rates");
            if (e.size() != nu) throw ValidationError("admmac needs --energies or --snr-db");
            AdmissionOptions ao;
            ao.solver = so;
            rep = adm_mac(ch, rates, e, ao);
        }
    } catch (const NonConvergenceError& err) {
        std::fprintf(stderr, "maccanon: %s\n", err.what());
        rep = err.best;
        double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        print_summary(rep, dt);
        return 4;
    } catch (const UndecidedError& err) {
        std::fprintf(stderr, "maccanon: %s\n", err.what());
        return 4;
    }
    double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (rep.flag == 0) exit_code = 3;
    save_report(a.out, ch, rep);
    print_summary(rep, dt);
    return exit_code;
}

struct TraceArgs {
    std::string channel;
    std::vector<double> energies;
    int points = 81;
    int parallel = 0;
    std::string out = "region.csv";
};

int run_trace(TraceArgs& a) {
    ChannelSet ch = load_channel(a.channel);
    if (ch.num_users != 2) {
        std::fprintf(stderr, "maccanon trace: channel must have exactly 2 users (has %d)\n",
                     ch.num_users);
        return 2;
    }
    rvec e = a.energies.empty() ? rvec(rvec::Constant(2, static_cast<double>(ch.num_tones)))
                                : to_rvec(a.energies);
    AdmissionOptions ao;
    ao.solver.workers = a.parallel;
    auto pts = trace_region_2user(ch, e, a.points, ao);
    std::ofstream f(a.out, std::ios::binary);
    if (!f) {
        std::fprintf(stderr, "maccanon trace: cannot write %s\n", a.out.c_str());
        return 1;
    }
    f << "b1,b2\n";
    char buf[64];
    for (const auto& p : pts) {
        std::snprintf(buf, sizeof buf, "%.9g,%.9g\n", p.b1, p.b2);
        f << buf;
    }
    // corner vertices of the equal-weight polymatroid face
    SolveReport v = max_rmac(ch, e, rvec::Ones(2), ao.solver);
    auto corner = [&](const std::vector<int>& order) {
        return rates_for_order(ch, v.plan, order).totals;
    };
    rvec c1 = corner({0, 1}), c2 = corner({1, 0});
    std::snprintf(buf, sizeof buf, "# corner,%.9g,%.9g\n", c1(0), c1(1));
    f << buf;
    std::snprintf(buf, sizeof buf, "# corner,%.9g,%.9g\n", c2(0), c2(1));
    f << buf;
    std::printf("wrote %s (%d points)\n", a.out.c_str(), a.points);
    return 0;
}

struct StudyArgs {
    std::vector<int> tones{1, 2, 4, 8, 16, 32};
    std::vector<double> rhos{0.85, 0.95};
    int trials = 50;
    double snr_db = 10.0;
    int taps = 3;
    std::uint64_t seed = 1;
    int parallel = 0;
    std::string out = "timeshare.csv";
};

int run_study(StudyArgs& a) {
    std::ofstream f(a.out, std::ios::binary);
    if (!f) {
        std::fprintf(stderr, "maccanon study-timeshare: cannot write %s\n", a.out.c_str());
        return 1;
    }
    f << "tones,rho,trials,timeshare_prob,mean_alpha_max\n";
    for (int n : a.tones) {
        for (double rho : a.rhos) {
            int ts = 0, solved = 0;
            double alpha_acc = 0.0;
            for (int t = 0; t < a.trials; ++t) {
                ChannelSpec spec;
                spec.num_users = 3;
                spec.rx_antennas = 2;
                spec.tx_antennas = {1, 1, 1};
                spec.num_tones = n;
                spec.taps = std::min(a.taps, n);
                spec.seed = a.seed + 7919ull * static_cast<std::uint64_t>(t);
                ChannelSet ch = generate_channel(spec);
                double energy = n * std::pow(10.0, a.snr_db / 10.0);

                SolverOptions so;
                so.workers = a.parallel;
                // per-user targets: rho x the rate each user gets on the
                // equal-weight boundary vertex
                SolveReport vertex = max_rmac(ch, rvec::Constant(3, energy), rvec::Ones(3), so);
                rvec b = rho * vertex.rates[0].totals;
                try {
                    SolveReport rep = min_pmac(ch, b, rvec::Ones(3), so);
                    if (rep.flag == 0) continue;
                    ++solved;
                    if (rep.flag == 2) {
                        ++ts;
                        alpha_acc += rep.alpha.maxCoeff();
                    }
                } catch (const NonConvergenceError&) {
                }
            }
            double prob = solved ? static_cast<double>(ts) / solved : 0.0;
            double mean_alpha = ts ? alpha_acc / ts : 0.0;
            char buf[96];
            std::snprintf(buf, sizeof buf, "%d,%.9g,%d,%.9g,%.9g\n", n, rho, solved, prob,
                          mean_alpha);
            f << buf;
            std::printf("N=%d rho=%.2f: P(timeshare)=%.3f mean_alpha_max=%.3f (%d trials)\n", n,
                        rho, prob, mean_alpha, solved);
        }
    }
    std::printf("wrote %s\n", a.out.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"maccanon: MIMO multiple-access-channel resource allocation"};
    app.require_subcommand(1);

    GenArgs ga;
    ga.spec.seed = env_seed();
    auto* gen = app.add_subcommand("gen", "generate a random channel file");
    gen->add_option("--users", ga.spec.num_users, "number of users")->check(CLI::PositiveNumber);
    gen->add_option("--rx", ga.spec.rx_antennas, "receive antennas")->check(CLI::PositiveNumber);
    gen->add_option("--tx", ga.tx, "transmit antennas per user")->check(CLI::PositiveNumber);
    gen->add_option("--tones", ga.spec.num_tones, "number of tones")->check(CLI::PositiveNumber);
    gen->add_option("--model", ga.model, "fading model")
        ->check(CLI::IsMember({"iid", "kronecker"}));
    CLI::Validator rho_check(
        [](std::string& s) {
            double v = std::strtod(s.c_str(), nullptr);
            return (v >= 0.0 && v < 1.0) ? std::string() : std::string("must be in [0, 1)");
        },
        "RHO");
    gen->add_option("--rho-tx", ga.spec.rho_tx, "transmit correlation")->check(rho_check);
    gen->add_option("--rho-rx", ga.spec.rho_rx, "receive correlation")->check(rho_check);
    gen->add_option("--taps", ga.spec.taps, "delay taps")->check(CLI::PositiveNumber);
    gen->add_option("--seed", ga.spec.seed, "RNG seed");
    gen->add_option("-o,--output", ga.out, "output channel file");

    SolveArgs sa;
    auto* solve = app.add_subcommand("solve", "run a solver on a channel file");
    solve->add_option("algorithm", sa.alg, "solver to run")
        ->required()
        ->check(CLI::IsMember({"maxrmac", "minpmac", "maxresmac", "admmac"}));
    solve->add_option("--channel", sa.channel, "channel file")->required();
    solve->add_option("--energies", sa.energies, "per-user energy budgets");
    solve->add_option("--rates", sa.rates, "per-user rate targets");
    solve->add_option("--weights", sa.weights, "per-user weights");
    solve->add_option("--total-energy", sa.total_energy, "total energy budget");
    solve->add_option("--snr-db", sa.snr_db, "per-user SNR in dB (E_u = N * SNR_lin)");
    solve->add_option("--parallel", sa.parallel, "tone-level worker bound (0 = hardware)");
    solve->add_option("-o,--output", sa.out, "output report file");

    TraceArgs ta;
    auto* trace = app.add_subcommand("trace", "trace a 2-user capacity region boundary");
    trace->add_option("--channel", ta.channel, "channel file")->required();
    trace->add_option("--energies", ta.energies, "per-user energy budgets");
    trace->add_option("--points", ta.points, "grid points")->check(CLI::Range(2, 100000));
    trace->add_option("--parallel", ta.parallel, "tone-level worker bound");
    trace->add_option("-o,--output", ta.out, "output CSV file");

    StudyArgs ua;
    ua.seed = std::max<std::uint64_t>(1, env_seed());
    auto* study = app.add_subcommand("study-timeshare", "time-sharing probability sweep");
    study->add_option("--tones", ua.tones, "tone counts to sweep");
    study->add_option("--rho", ua.rhos, "loading factors to sweep");
    study->add_option("--trials", ua.trials, "trials per cell")->check(CLI::PositiveNumber);
    study->add_option("--snr-db", ua.snr_db, "per-user SNR in dB");
    study->add_option("--taps", ua.taps, "delay taps")->check(CLI::PositiveNumber);
    study->add_option("--seed", ua.seed, "RNG seed");
    study->add_option("--parallel", ua.parallel, "tone-level worker bound");
    study->add_option("-o,--output", ua.out, "output CSV file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 2;
    }

    try {
        if (*gen) return run_gen(ga);
        if (*solve) {
            if (sa.parallel <= 0)
                sa.parallel = static_cast<int>(std::thread::hardware_concurrency());
            return run_solve(sa);
        }
        if (*trace) {
            if (ta.parallel <= 0)
                ta.parallel = static_cast<int>(std::thread::hardware_concurrency());
            return run_trace(ta);
        }
        if (*study) {
            if (ua.parallel <= 0)
                ua.parallel = static_cast<int>(std::thread::hardware_concurrency());
            return run_study(ua);
        }
    } catch (const ParseError& e) {
        std::fprintf(stderr, "maccanon: %s\n", e.what());
        return 2;
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "maccanon: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "maccanon: %s\n", e.what());
        return 4;
    }
    return 0;
}
