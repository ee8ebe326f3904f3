//! Certified bounds on the Perron root of nonnegative integer matrices.

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectralBounds {
    pub lower: f64,
    pub upper: f64,
}

impl SpectralBounds {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// Relative slack absorbing rounding in one matrix-vector product.
fn margin(n: usize) -> f64 {
    10.0 * (n as f64 + 1.0) * f64::EPSILON
}

/// Indices that survive repeated deletion of all-zero rows.
///
/// A zero row `i` means `(Av)_i = 0`; placing such indices first makes `A`
/// block triangular with a zero diagonal block, so deleting them leaves the
/// spectral radius unchanged.
fn core_indices(a: &[Vec<u64>]) -> Vec<usize> {
    let mut alive: Vec<usize> = (0..a.len()).collect();
    loop {
        let keep: Vec<usize> = alive.iter().copied().filter(|&i| alive.iter().any(|&j| a[i][j] > 0)).collect();
        if keep.len() == alive.len() {
            return keep;
        }
        alive = keep;
    }
}

/// Collatz–Wielandt bounds from `iters` steps of power iteration starting at `v0`.
///
/// Returns the best lower and upper ratios observed, widened by a rounding
/// margin. The zero matrix gives `(0, 0)`.
pub fn spectral_bounds(a: &[Vec<u64>], v0: &[f64], iters: usize) -> SpectralBounds {
    assert_eq!(a.len(), v0.len(), "matrix and start vector disagree in size");
    let idx = core_indices(a);
    if idx.is_empty() {
        return SpectralBounds { lower: 0.0, upper: 0.0 };
    }
    let sub: Vec<Vec<f64>> = idx.iter().map(|&i| idx.iter().map(|&j| a[i][j] as f64).collect()).collect();
    let v: Vec<f64> = idx.iter().map(|&i| v0[i]).collect();
    power_bounds(&sub, v, iters, 0.0)
}

fn power_bounds(a: &[Vec<f64>], mut v: Vec<f64>, iters: usize, shift: f64) -> SpectralBounds {
    let n = a.len();
    let eps = margin(n);
    let mut lower = 0.0f64;
    let mut upper = f64::INFINITY;
    for _ in 0..iters.max(1) {
        let w: Vec<f64> = a.iter().map(|row| row.iter().zip(&v).map(|(x, y)| x * y).sum()).collect();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for (wi, vi) in w.iter().zip(&v) {
            let r = wi / vi;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        lower = lower.max((lo * (1.0 - eps) - shift).max(0.0));
        upper = upper.min(hi * (1.0 + eps) - shift);
        let scale = w.iter().copied().fold(0.0, f64::max);
        v = w.into_iter().map(|x| x / scale).collect();
        if upper - lower <= 1e-15 * upper.max(1.0) {
            break;
        }
    }
    SpectralBounds { lower: lower.min(upper), upper }
}

/// Tight bounds on the spectral radius via strongly connected components.
///
/// Each irreducible diagonal block `B` is handled through `B + I`, which is
/// primitive, so the Collatz–Wielandt ratios converge even for periodic
/// blocks. A single vertex contributes its loop weight exactly.
pub fn spectral_radius(a: &[Vec<u64>], iters: usize) -> SpectralBounds {
    let n = a.len();
    let reach = reachability(a);
    let mut seen = vec![false; n];
    let mut best = SpectralBounds { lower: 0.0, upper: 0.0 };
    for i in 0..n {
        if seen[i] {
            continue;
        }
        let comp: Vec<usize> = (0..n).filter(|&j| j == i || (reach[i][j] && reach[j][i])).collect();
        comp.iter().for_each(|&j| seen[j] = true);
        let b = if comp.len() == 1 {
            let x = a[i][i] as f64;
            SpectralBounds { lower: x, upper: x }
        } else {
            let sub: Vec<Vec<f64>> = comp
                .iter()
                .map(|&r| comp.iter().map(|&c| a[r][c] as f64 + if r == c { 1.0 } else { 0.0 }).collect())
                .collect();
            power_bounds(&sub, vec![1.0; comp.len()], iters, 1.0)
        };
        best.lower = best.lower.max(b.lower);
        best.upper = best.upper.max(b.upper);
    }
    best
}

/// `reach[i][j]`: a path of length ≥ 1 leads from `i` to `j` in the graph with
/// an edge `i → j` whenever `a[i][j] > 0`.
pub(crate) fn reachability(a: &[Vec<u64>]) -> Vec<Vec<bool>> {
    let n = a.len();
    (0..n)
        .map(|s| {
            let mut r = vec![false; n];
            let mut stack: Vec<usize> = (0..n).filter(|&j| a[s][j] > 0).collect();
            stack.iter().for_each(|&j| r[j] = true);
            while let Some(u) = stack.pop() {
                for j in 0..n {
                    if a[u][j] > 0 && !r[j] {
                        r[j] = true;
                        stack.push(j);
                    }
                }
            }
            r
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ex4_matrix() -> Vec<Vec<u64>> {
        vec![vec![0, 1, 0, 0, 1], vec![0, 1, 0, 1, 1], vec![1, 0, 1, 0, 0], vec![1, 0, 1, 0, 0], vec![0, 1, 0, 1, 0]]
    }

    #[test]
    fn trivial_matrices() {
        assert_eq!(
            spectral_bounds(&[vec![0, 0], vec![0, 0]], &[1.0, 1.0], 10),
            SpectralBounds { lower: 0.0, upper: 0.0 }
        );
        let b = spectral_bounds(&[vec![2]], &[1.0], 5);
        assert!((b.lower - 2.0).abs() < 1e-12 && (b.upper - 2.0).abs() < 1e-12);
        let b = spectral_bounds(&[vec![1, 0], vec![0, 1]], &[1.0, 1.0], 5);
        assert!((b.lower - 1.0).abs() < 1e-12 && (b.upper - 1.0).abs() < 1e-12);
        assert_eq!(spectral_radius(&[], 10), SpectralBounds { lower: 0.0, upper: 0.0 });
    }

    #[test]
    fn nilpotent_part_is_ignored() {
        // strictly lower triangular: spectral radius 0
        let a = vec![vec![0, 0, 0], vec![3, 0, 0], vec![1, 2, 0]];
        assert_eq!(spectral_bounds(&a, &[1.0; 3], 10).upper, 0.0);
        assert_eq!(spectral_radius(&a, 10).upper, 0.0);
    }

    #[test]
    fn five_type_matrix() {
        let b = spectral_bounds(&ex4_matrix(), &[1.0; 5], 60);
        assert!(b.width() <= 1e-3, "{b:?}");
        assert!(b.lower <= 2.2775 + 5e-5 && b.upper >= 2.2775 - 5e-5, "{b:?}");
        let t = spectral_radius(&ex4_matrix(), 200);
        assert!(t.width() < 1e-9 && (t.lower - 2.277452).abs() < 1e-6, "{t:?}");
    }

    #[test]
    fn periodic_and_jordan_blocks() {
        // cyclic permutation: ratios oscillate under plain iteration from a bad start
        let c = vec![vec![0, 1, 0], vec![0, 0, 1], vec![1, 0, 0]];
        let b = spectral_radius(&c, 100);
        assert!((b.lower - 1.0).abs() < 1e-9 && (b.upper - 1.0).abs() < 1e-9);
        let j = vec![vec![1, 0], vec![1, 1]];
        let b = spectral_radius(&j, 10);
        assert_eq!((b.lower, b.upper), (1.0, 1.0));
        let p = spectral_bounds(&j, &[1.0, 1.0], 200);
        assert!(p.lower <= 1.0 && p.upper >= 1.0);
    }

    fn small_matrix() -> impl Strategy<Value = Vec<Vec<u64>>> {
        (1usize..6).prop_flat_map(|n| proptest::collection::vec(proptest::collection::vec(0u64..4, n), n))
    }

    proptest! {
        #[test]
        fn bounds_sandwich_the_radius(a in small_matrix()) {
            let n = a.len();
            let m = nalgebra::DMatrix::from_fn(n, n, |i, j| a[i][j] as f64);
            let rho = m.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
            let b = spectral_bounds(&a, &vec![1.0; n], 100);
            prop_assert!(b.lower <= b.upper);
            prop_assert!(b.lower <= rho + 1e-7 && rho <= b.upper + 1e-7, "{:?} vs {}", b, rho);
            let t = spectral_radius(&a, 300);
            prop_assert!(t.lower <= rho + 1e-7 && rho <= t.upper + 1e-7, "{:?} vs {}", t, rho);
        }

        #[test]
        fn relabeling_preserves_bounds(a in small_matrix(), seed in 0u64..1000) {
            let n = a.len();
            let mut perm: Vec<usize> = (0..n).collect();
            let mut s = seed;
            for i in (1..n).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                perm.swap(i, (s >> 33) as usize % (i + 1));
            }
            let p: Vec<Vec<u64>> = (0..n).map(|i| (0..n).map(|j| a[perm[i]][perm[j]]).collect()).collect();
            let x = spectral_radius(&a, 300);
            let y = spectral_radius(&p, 300);
            prop_assert!((x.lower - y.lower).abs() < 1e-6 && (x.upper - y.upper).abs() < 1e-6);
        }
    }
}
