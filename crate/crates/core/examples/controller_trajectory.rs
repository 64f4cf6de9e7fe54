//! The weight controller alone, driven by synthetic gains: one strategy
//! pays off early, another late.
//!
//! cargo run --example controller_trajectory -- [rounds] [blend]

use modesel::controller::{convergence_stats, round_update, ControllerConfig, ControllerState};

fn main() -> modesel::Result<()> {
    let mut args = std::env::args().skip(1);
    let rounds: usize = args.next().map_or(40, |s| s.parse().expect("rounds"));
    let blend: f64 = args.next().map_or(0.2, |s| s.parse().expect("blend"));
    let cfg = ControllerConfig {
        blend,
        ..ControllerConfig::default()
    };
    let mut state = ControllerState::new(&cfg);
    let mut history = vec![state.weights];
    println!("round  temp    w_u    w_d    w_c    w_b");
    for t in 0..rounds {
        let progress = t as f64 / rounds as f64;
        state.observe(progress, 0.5 + 0.4 * progress, 1.0 - progress, 1.0 - progress);
        // diversity helps while the coreset is small, uncertainty afterwards
        let gains = if progress < 0.5 {
            [0.01, 0.2, 0.0, 0.0]
        } else {
            [0.2, 0.01, 0.0, 0.0]
        };
        state = round_update(&state, &cfg, &gains, None);
        history.push(state.weights);
        let w = state.weights.as_array();
        println!(
            "{:>5}  {:.3}  {:.4} {:.4} {:.4} {:.4}",
            state.round, state.temperature, w[0], w[1], w[2], w[3]
        );
    }
    let stats = convergence_stats(&history)?;
    println!("cumulative movement {:.4}", stats.cumulative);
    if let Some(rate) = stats.geometric_rate(1e-12) {
        println!("geometric step rate {rate:.3}");
    }
    Ok(())
}
