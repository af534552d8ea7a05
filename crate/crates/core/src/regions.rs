//! Connected-region counting on the dominant-phase map, used to verify
//! coarsening: after spinodal decomposition the number of distinct phase
//! regions must not grow.

use crate::field::RealField;

/// Label each cell with its dominant phase (argmax over the fields; a single
/// field is thresholded against 1/2).
pub fn dominant_phase_map(phi: &[RealField]) -> Vec<usize> {
    let n = phi[0].data().len();
    if phi.len() == 1 {
        return phi[0]
            .data()
            .iter()
            .map(|&v| usize::from(v >= 0.5))
            .collect();
    }
    (0..n)
        .map(|i| {
            let mut best = 0;
            let mut val = phi[0].data()[i];
            for (k, f) in phi.iter().enumerate().skip(1) {
                if f.data()[i] > val {
                    val = f.data()[i];
                    best = k;
                }
            }
            best
        })
        .collect()
}

/// Count connected same-phase regions of the dominant-phase map under
/// periodic 4-connectivity, ignoring regions smaller than `min_size` cells
/// (sub-interface labeling noise).
pub fn count_phase_regions(phi: &[RealField], min_size: usize) -> usize {
    let grid = phi[0].grid();
    let (nx, ny) = (grid.nx(), grid.ny());
    let labels = dominant_phase_map(phi);
    let mut seen = vec![false; nx * ny];
    let mut regions = 0;
    let mut stack = Vec::new();
    for start in 0..nx * ny {
        if seen[start] {
            continue;
        }
        let phase = labels[start];
        let mut size = 0usize;
        stack.push(start);
        seen[start] = true;
        while let Some(idx) = stack.pop() {
            size += 1;
            let (ix, iy) = (idx / ny, idx % ny);
            let neighbors = [
                ((ix + 1) % nx) * ny + iy,
                ((ix + nx - 1) % nx) * ny + iy,
                ix * ny + (iy + 1) % ny,
                ix * ny + (iy + ny - 1) % ny,
            ];
            for &nb in &neighbors {
                if !seen[nb] && labels[nb] == phase {
                    seen[nb] = true;
                    stack.push(nb);
                }
            }
        }
        if size >= min_size {
            regions += 1;
        }
    }
    regions
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn uniform_field_is_one_region() {
        let grid = Grid::new(16, 16, 1.0, 1.0).unwrap();
        let phi = vec![RealField::constant(&grid, 0.9)];
        assert_eq!(count_phase_regions(&phi, 1), 1);
    }

    #[test]
    fn stripes_count_with_periodic_wrap() {
        let grid = Grid::new(32, 32, 1.0, 1.0).unwrap();
        // Two vertical bands cut the periodic background into two arcs:
        // the background piece at x < 0.1 joins the one at x >= 0.8 across
        // the wrap, giving 2 bands + 2 background arcs.
        let phi = vec![RealField::from_fn(&grid, |x, _| {
            if (0.1..0.3).contains(&x) || (0.6..0.8).contains(&x) {
                1.0
            } else {
                0.0
            }
        })];
        assert_eq!(count_phase_regions(&phi, 1), 4);
        // A single band leaves one wrapped background region.
        let one = vec![RealField::from_fn(&grid, |x, _| {
            if (0.1..0.3).contains(&x) {
                1.0
            } else {
                0.0
            }
        })];
        assert_eq!(count_phase_regions(&one, 1), 2);
    }

    #[test]
    fn argmax_labeling_for_three_phases() {
        let grid = Grid::new(32, 32, 1.0, 1.0).unwrap();
        // Left half dominated by phase 0, right half by phase 2, thin phase-1
        // collar suppressed by the min-size filter.
        let p0 = RealField::from_fn(&grid, |x, _| if x < 0.5 { 0.8 } else { 0.1 });
        let p1 = RealField::constant(&grid, 0.15);
        let p2 = RealField::from_fn(&grid, |x, _| if x >= 0.5 { 0.8 } else { 0.1 });
        assert_eq!(count_phase_regions(&[p0, p1, p2], 1), 2);
    }

    #[test]
    fn min_size_filter_drops_speckles() {
        let grid = Grid::new(32, 32, 1.0, 1.0).unwrap();
        // A smooth blob plus one isolated flipped cell.
        let mut phi = RealField::from_fn(&grid, |x, y| {
            if ((x - 0.5).powi(2) + (y - 0.5).powi(2)).sqrt() < 0.2 {
                1.0
            } else {
                0.0
            }
        });
        let idx = grid.idx(2, 2);
        phi.data_mut()[idx] = 1.0;
        let fields = vec![phi];
        assert_eq!(count_phase_regions(&fields, 1), 3);
        assert_eq!(count_phase_regions(&fields, 4), 2);
    }

    #[test]
    fn checkerboard_extreme() {
        // Degenerate worst case: every cell its own region under
        // 4-connectivity with alternating labels.
        let grid = Grid::new(8, 8, 1.0, 1.0).unwrap();
        let phi = vec![RealField::from_fn(&grid, |x, y| {
            let ix = (x * 8.0).round() as usize;
            let iy = (y * 8.0).round() as usize;
            ((ix + iy) % 2) as f64
        })];
        assert_eq!(count_phase_regions(&phi, 1), 64);
    }
}
