//! Seeded random initial conditions for the dissipation and phase-separation
//! experiments.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::field::{RealField, VectorField};
use crate::grid::Grid;

/// Which experiment family the initial data belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RandomIc {
    /// φ uniform in [0, 1); u = v = p = 1.
    TwoComponent,
    /// φ₁, φ₂ = 1/3 + 0.01(2·rand - 1), φ₃ = 1 - φ₁ - φ₂; u = v = p = 0.
    ThreeComponentUnitSum,
    /// All three phases independently perturbed around 1/3; u = v = p = 0.
    ThreeComponentIndependent,
}

fn uniform_field(grid: &Arc<Grid>, rng: &mut ChaCha12Rng) -> RealField {
    RealField::from_fn(grid, |_, _| rng.gen::<f64>())
}

fn perturbed_third(grid: &Arc<Grid>, rng: &mut ChaCha12Rng) -> RealField {
    RealField::from_fn(grid, |_, _| {
        1.0 / 3.0 + 0.01 * (2.0 * rng.gen::<f64>() - 1.0)
    })
}

/// Build (φ fields, u, p) for the requested family. The same seed always
/// produces bit-identical fields.
pub fn random_initial_state(
    kind: RandomIc,
    seed: u64,
    grid: &Arc<Grid>,
) -> (Vec<RealField>, VectorField, RealField) {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    match kind {
        RandomIc::TwoComponent => {
            let phi = vec![uniform_field(grid, &mut rng)];
            let u = VectorField::new(
                RealField::constant(grid, 1.0),
                RealField::constant(grid, 1.0),
            );
            (phi, u, RealField::constant(grid, 1.0))
        }
        RandomIc::ThreeComponentUnitSum => {
            let p1 = perturbed_third(grid, &mut rng);
            let p2 = perturbed_third(grid, &mut rng);
            // 1 - (a+b) keeps (φ₁+φ₂)+φ₃ exactly 1 in floating point.
            let p3 = p1.zip_with(&p2, |a, b| 1.0 - (a + b));
            (
                vec![p1, p2, p3],
                VectorField::zeros(grid),
                RealField::zeros(grid),
            )
        }
        RandomIc::ThreeComponentIndependent => {
            let p1 = perturbed_third(grid, &mut rng);
            let p2 = perturbed_third(grid, &mut rng);
            let p3 = perturbed_third(grid, &mut rng);
            (
                vec![p1, p2, p3],
                VectorField::zeros(grid),
                RealField::zeros(grid),
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_is_bit_identical() {
        let grid = Grid::new(16, 16, 2.0, 2.0).unwrap();
        let (a, ua, pa) = random_initial_state(RandomIc::TwoComponent, 7, &grid);
        let (b, ub, pb) = random_initial_state(RandomIc::TwoComponent, 7, &grid);
        assert_eq!(a[0].data(), b[0].data());
        assert_eq!(ua.x.data(), ub.x.data());
        assert_eq!(pa.data(), pb.data());
        let (c, _, _) = random_initial_state(RandomIc::TwoComponent, 8, &grid);
        assert_ne!(a[0].data(), c[0].data());
    }

    #[test]
    fn two_component_values_in_unit_interval() {
        let grid = Grid::new(32, 32, 2.0, 2.0).unwrap();
        let (phi, u, p) = random_initial_state(RandomIc::TwoComponent, 3, &grid);
        assert!(phi[0].data().iter().all(|&v| (0.0..1.0).contains(&v)));
        assert!(u.x.data().iter().all(|&v| v == 1.0));
        assert!(p.data().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn unit_sum_family_sums_exactly() {
        let grid = Grid::new(16, 16, 2.0, 2.0).unwrap();
        let (phi, u, _) = random_initial_state(RandomIc::ThreeComponentUnitSum, 5, &grid);
        let sum = phi[0].add_scaled(1.0, &phi[1]).add_scaled(1.0, &phi[2]);
        assert!(sum.map(|v| v - 1.0).max_abs() == 0.0);
        assert_eq!(u.max_abs(), 0.0);
        for f in &phi[..2] {
            assert!(f
                .data()
                .iter()
                .all(|&v| (1.0 / 3.0 - 0.01..=1.0 / 3.0 + 0.01).contains(&v)));
        }
    }

    #[test]
    fn independent_family_perturbs_all_three() {
        let grid = Grid::new(16, 16, 2.0, 2.0).unwrap();
        let (phi, _, _) = random_initial_state(RandomIc::ThreeComponentIndependent, 5, &grid);
        for f in &phi {
            assert!(f
                .data()
                .iter()
                .all(|&v| (1.0 / 3.0 - 0.01..=1.0 / 3.0 + 0.01).contains(&v)));
        }
        // The sum is close to but not exactly one.
        let sum = phi[0].add_scaled(1.0, &phi[1]).add_scaled(1.0, &phi[2]);
        let dev = sum.map(|v| v - 1.0).max_abs();
        assert!(dev > 0.0 && dev <= 0.03);
    }
}
