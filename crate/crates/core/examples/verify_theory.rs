//! Submodularity and greedy approximation checks on random facility
//! location instances.
//!
//! cargo run --release --example verify_theory -- [n] [instances]

use modesel::verify::{
    approximation_curve, check_diminishing_returns, check_weighted_combination, FacilityLocation, SetFunction,
    SquaredCardinality, GREEDY_BOUND,
};

fn main() -> modesel::Result<()> {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(12, |s| s.parse().expect("ground size"));
    let instances: usize = args.next().map_or(50, |s| s.parse().expect("instances"));

    let fl = FacilityLocation::random(n, 2, 1);
    let r = check_diminishing_returns(&fl, 10_000, 2)?;
    println!("facility location: {} violations in {} chains", r.violations, r.trials);

    let parts = [
        FacilityLocation::random(n, 2, 3),
        FacilityLocation::random(n, 3, 4),
        FacilityLocation::random(n, 4, 5),
    ];
    let refs: Vec<&dyn SetFunction> = parts.iter().map(|f| f as &dyn SetFunction).collect();
    let combo = check_weighted_combination(&refs, &[0.2, 0.5, 1.3], 10_000, 6)?;
    println!(
        "weighted sum: components submodular {}, combined violations {}",
        combo.components_submodular(),
        combo.combined.violations
    );

    let control = check_diminishing_returns(&SquaredCardinality { n }, 10_000, 7)?;
    println!("|S|^2 control: {} violations (expected > 0)", control.violations);

    println!("budget  mean_ratio  min_ratio   (bound {GREEDY_BOUND:.4})");
    for row in approximation_curve(n, &[1, 2, 3, 4, 5], instances, 8)? {
        println!("{:>6}  {:>10.4}  {:>9.4}", row.budget, row.mean_ratio, row.min_ratio);
    }
    Ok(())
}
