use zmodel_bench::driver::{run_sim, SimConfig};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let steps: u64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(60);
    let amps: Vec<f64> = args[2..].iter().filter_map(|s| s.parse().ok()).collect();

    for amp in amps {
        let mut cfg = SimConfig::single_mode_default();
        cfg.rank_grid = (4, 4);
        cfg.steps = steps;
        cfg.dt = 4e-3;
        cfg.mu = 0.02;
        cfg.epsilon = Some(0.1);
        cfg.amplitude = amp;
        cfg.write_every = 5;
        match run_sim(&cfg) {
            Ok(out) => {
                let double_step = out
                    .metrics
                    .steps
                    .iter()
                    .find(|m| m.max_abs_z >= 2.0 * amp)
                    .map(|m| m.step);
                let cross_step = out
                    .metrics
                    .imbalance
                    .iter()
                    .find(|r| r.max_over_mean > 1.0)
                    .map(|r| r.step);
                let ratio_at_double = double_step.and_then(|d| {
                    out.metrics
                        .imbalance
                        .iter()
                        .find(|r| r.step >= d)
                        .map(|r| r.max_over_mean)
                });
                println!(
                    "amp={amp:.2}: first crossing at {cross_step:?}, doubling at {double_step:?}, ratio at doubling report = {ratio_at_double:?}"
                );
            }
            Err(e) => println!("amp={amp:.2}: run failed: {e}"),
        }
    }
}
