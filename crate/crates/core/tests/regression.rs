//! Regression pin: a stored trajectory must be reproduced by the current
//! code, coefficient for coefficient, from the same configuration. Catches
//! silent changes to the transforms, the quadrature weights, the random
//! field generator, or the file format.
//!
//! To regenerate the baseline after an intentional behavior change:
//! `NSMILD_REGEN_GOLDEN=1 cargo test -p nsmild --test regression`.

use nsmild::io;
use nsmild::solver::{picard_solve, SolverConfig};
use nsmild::spaces::Trajectory;
use nsmild::spectral::{make_initial_data, GridSpec, InitialData};

const GOLDEN: &str = concat!(
    env!("CARGO_MANIFEST_DIR"),
    "/tests/data/golden-trajectory.spct"
);

fn compute() -> Trajectory {
    let grid = GridSpec::new(2, 16, 2.0 * std::f64::consts::PI).unwrap();
    let u0 = make_initial_data(
        grid,
        &InitialData::RandomSlope {
            beta: 1.0,
            seed: 7,
            amplitude: 0.05,
        },
    )
    .unwrap();
    picard_solve(&u0, &SolverConfig::new(0.25, 16))
        .unwrap()
        .trajectory
}

#[test]
fn stored_trajectory_is_reproduced() {
    let fresh = compute();
    if std::env::var_os("NSMILD_REGEN_GOLDEN").is_some() {
        io::write_trajectory(GOLDEN, &fresh).unwrap();
        println!("regenerated {GOLDEN}");
        return;
    }

    let stored = io::read_trajectory(GOLDEN).unwrap();
    assert_eq!(stored.grid(), fresh.grid());
    assert_eq!(stored.len(), fresh.len());
    let mut worst = 0.0f64;
    for i in 0..stored.len() {
        let (ts, us) = stored.sample(i);
        let (tf, uf) = fresh.sample(i);
        assert!((ts - tf).abs() <= 1e-15 * ts.max(1.0), "mesh drift at {i}");
        worst = worst.max(us.sub(uf).max_coeff_abs());
    }
    assert!(
        worst <= 1e-12,
        "stored trajectory deviates by {worst:e}; if intentional, regenerate \
         with NSMILD_REGEN_GOLDEN=1"
    );
}
