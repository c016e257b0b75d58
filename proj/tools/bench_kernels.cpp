// Compares the serial and OpenMP execution of the experiment kernels and
// checks that both produce bit-identical results.
#include <chrono>
#include <cstdio>
#include <vector>

#include "semiope/experiments.hpp"

using namespace semiope;

namespace {

double now_seconds() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

template <typename Fn>
double timed(Fn&& fn) {
    double t0 = now_seconds();
    fn();
    return now_seconds() - t0;
}

void report(const char* name, double serial_s, double parallel_s, bool identical) {
    std::printf("%-24s serial %8.3fs  parallel %8.3fs  speedup %5.2fx  identical %s\n", name,
                serial_s, parallel_s, serial_s / parallel_s, identical ? "yes" : "NO");
}

}  // namespace

int main() {
    int jobs = resolve_jobs(0);
    std::printf("workers: %d\n", jobs);

    {
        // raw map kernel: per-index single-sample bandit estimates
        TabularMDP mdp = make_one_state_bandit(1.0, 2.0, 1.0, 1.0);
        Policy pi_b(1, 2), pi_e(1, 2);
        pi_b.at(0, 0) = 0.1;
        pi_b.at(0, 1) = 0.9;
        pi_e.at(0, 0) = 0.8;
        pi_e.at(0, 1) = 0.2;
        const int64_t n = 4'000'000;
        std::vector<double> a(n), b(n);
        auto kernel = [&](std::vector<double>& out) {
            return [&out, &mdp, &pi_b, &pi_e](int64_t i) {
                RngStream rng = RngStream::derive(7, "bench", {uint64_t(i)});
                Trajectory traj = sample_trajectory(mdp, pi_b, rng);
                const Step& st = traj.steps[0];
                double rho = pi_b(0, st.action) > 0.0 ? pi_e(0, st.action) / pi_b(0, st.action)
                                                      : 0.0;
                out[i] = rho * st.reward;
            };
        };
        double ts = timed([&] { serial_for(n, kernel(a)); });
        double tp = timed([&] { parallel_for(n, jobs, kernel(b)); });
        report("single_sample_is", ts, tp, a == b);
    }

    {
        BanditTableConfig cfg;
        cfg.n_reps = 20000;
        Table t_serial, t_parallel;
        cfg.jobs = 1;
        double ts = timed([&] { t_serial = run_bandit_table(cfg); });
        cfg.jobs = jobs;
        double tp = timed([&] { t_parallel = run_bandit_table(cfg); });
        report("bandit_table", ts, tp, t_serial.to_csv() == t_parallel.to_csv());
    }

    {
        WeightHeatmapConfig cfg;
        cfg.n_reps = 2000;
        WeightHeatmapResult r_serial, r_parallel;
        cfg.jobs = 1;
        double ts = timed([&] { r_serial = run_weight_heatmap(cfg); });
        cfg.jobs = jobs;
        double tp = timed([&] { r_parallel = run_weight_heatmap(cfg); });
        report("weight_heatmap", ts, tp,
               r_serial.grid.to_csv() == r_parallel.grid.to_csv() &&
                   r_serial.width_sweep.to_csv() == r_parallel.width_sweep.to_csv());
    }

    return 0;
}
